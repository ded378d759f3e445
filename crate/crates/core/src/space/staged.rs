use serde::{Deserialize, Serialize};

use super::bits::BitString;
use super::prefix_free::PrefixFreeSet;
use super::rational::Rational;
use crate::error::{Error, Result};

/// A monotone finite enumeration of an open set; each stage's open set
/// contains the previous one. Stands in for a set of computable measure,
/// where every stage measure is known exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStaged", into = "RawStaged")]
pub struct StagedOpenSet {
    stages: Vec<PrefixFreeSet>,
}

#[derive(Serialize, Deserialize)]
struct RawStaged {
    stages: Vec<PrefixFreeSet>,
    #[serde(rename = "finalMeasure", default, skip_deserializing, with = "opt_rational")]
    final_measure: Option<Rational>,
}

mod opt_rational {
    use super::Rational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => crate::space::rational::serde_rational::serialize(r, s),
            None => s.serialize_none(),
        }
    }
}

impl TryFrom<RawStaged> for StagedOpenSet {
    type Error = Error;

    fn try_from(raw: RawStaged) -> Result<Self> {
        StagedOpenSet::new(raw.stages)
    }
}

impl From<StagedOpenSet> for RawStaged {
    fn from(s: StagedOpenSet) -> Self {
        let m = s.final_measure();
        RawStaged { stages: s.stages, final_measure: Some(m) }
    }
}

impl StagedOpenSet {
    /// Validates that the stages are nested as open sets. An empty list is
    /// read as the single empty stage.
    pub fn new(stages: Vec<PrefixFreeSet>) -> Result<Self> {
        if stages.is_empty() {
            return Ok(Self::single(PrefixFreeSet::empty()));
        }
        for (s, w) in stages.windows(2).enumerate() {
            if !w[1].covers(&w[0]) {
                return Err(Error::NonMonotone(format!("stage {} does not contain stage {s}", s + 1)));
            }
        }
        Ok(StagedOpenSet { stages })
    }

    pub fn single(set: PrefixFreeSet) -> Self {
        StagedOpenSet { stages: vec![set] }
    }

    pub fn stages(&self) -> &[PrefixFreeSet] {
        &self.stages
    }

    pub fn stage(&self, s: usize) -> Result<&PrefixFreeSet> {
        self.stages.get(s).ok_or(Error::MissingStage(s))
    }

    pub fn final_set(&self) -> &PrefixFreeSet {
        self.stages.last().expect("at least one stage")
    }

    pub fn final_measure(&self) -> Rational {
        self.final_set().measure()
    }

    /// μ(final \ stage s).
    pub fn deficit(&self, s: usize) -> Result<Rational> {
        Ok(self.final_set().measure_minus(self.stage(s)?))
    }

    /// Stagewise conditioning.
    pub fn condition(&self, sigma: &BitString) -> StagedOpenSet {
        StagedOpenSet { stages: self.stages.iter().map(|u| u.condition(sigma)).collect() }
    }

    /// Stagewise union; the shorter enumeration is padded with its last stage.
    pub fn union(&self, other: &StagedOpenSet) -> StagedOpenSet {
        let n = self.stages.len().max(other.stages.len());
        let pick = |v: &[PrefixFreeSet], i: usize| v.get(i).unwrap_or_else(|| v.last().unwrap()).clone();
        StagedOpenSet {
            stages: (0..n).map(|i| pick(&self.stages, i).union(&pick(&other.stages, i))).collect(),
        }
    }

    pub fn stage_measures(&self) -> Vec<Rational> {
        self.stages.iter().map(PrefixFreeSet::measure).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::ratio;

    fn set(s: &[&str]) -> PrefixFreeSet {
        PrefixFreeSet::from_strs(s).unwrap()
    }

    #[test]
    fn rejects_shrinking_stages() {
        assert!(StagedOpenSet::new(vec![set(&["0"]), set(&["00"])]).is_err());
        assert!(StagedOpenSet::new(vec![set(&["00"]), set(&["0"])]).is_ok());
    }

    #[test]
    fn stagewise_ops() {
        let u = StagedOpenSet::new(vec![set(&[]), set(&["00"])]).unwrap();
        let c = u.condition(&"0".into());
        assert_eq!(c.stages(), &[set(&[]), set(&["0"])]);
        assert!(u.condition(&"1".into()).final_set().is_empty());

        let v = StagedOpenSet::single(set(&["11"]));
        let w = u.union(&v);
        assert_eq!(w.final_set(), &set(&["00", "11"]));
        assert_eq!(w.final_measure(), ratio(1, 2));
        assert_eq!(w.stages().len(), 2);
    }

    #[test]
    fn deficit_tracks_missing_measure() {
        let u = StagedOpenSet::new(vec![set(&["00"]), set(&["00", "11"])]).unwrap();
        assert_eq!(u.deficit(0).unwrap(), ratio(1, 4));
        assert_eq!(u.deficit(1).unwrap(), ratio(0, 1));
    }
}
