use num_traits::One;
use serde::Serialize;

use crate::covers::TestFamily;
use crate::error::{Error, Result};
use crate::space::rational::{format, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet, StagedOpenSet};

pub fn p1_sr(u: &StagedOpenSet, sigma: &BitString) -> StagedOpenSet {
    u.condition(sigma)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageChoice {
    pub sigma: BitString,
    pub stage: usize,
    #[serde(with = "serde_rational")]
    pub stage_conditional: Rational,
    pub included: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P2SrReport {
    pub v: PrefixFreeSet,
    pub k: usize,
    pub depth: usize,
    /// μ([V] \ [U]) and its bound 2^-k.
    #[serde(with = "serde_rational")]
    pub excess: Rational,
    #[serde(with = "serde_rational")]
    pub excess_bound: Rational,
    pub covers_full_cylinders: bool,
    /// μ([V] ∪ [U]).
    #[serde(with = "serde_rational")]
    pub union_measure: Rational,
    pub choices: Vec<StageChoice>,
    pub pass: bool,
}

pub fn p2_sr(u: &StagedOpenSet, k: usize, depth: usize) -> Result<P2SrReport> {
    let fin = u.final_set();
    let mu = fin.measure();
    if mu >= Rational::one() - pow2_neg(k) {
        return Err(Error::SlackViolated(format!("final measure {} is not below 1 - 2^-{k}", format(&mu))));
    }
    let deficits: Vec<Rational> = (0..u.stages().len()).map(|s| u.deficit(s)).collect::<Result<_>>()?;
    let mut choices = Vec::new();
    let mut members = Vec::new();
    for sigma in (0..=depth).flat_map(BitString::all_of_length) {
        let n = sigma.len();
        let gap = pow2_neg(2 * n + k + 1);
        // The final stage has deficit 0, so the search always succeeds.
        let stage = deficits.iter().position(|d| *d < gap).expect("final stage has no deficit");
        let c = u.stage(stage)?.conditional_measure(&sigma);
        let included = c > Rational::one() - pow2_neg(n + k + 1);
        if included {
            members.push(sigma.clone());
        }
        choices.push(StageChoice { sigma, stage, stage_conditional: c, included });
    }
    let v = PrefixFreeSet::reduce(members);
    let excess = v.measure_minus(fin);
    let excess_bound = pow2_neg(k);
    let covers_full_cylinders = (0..=depth)
        .flat_map(BitString::all_of_length)
        .filter(|s| fin.conditional_measure(s).is_one())
        .all(|s| v.covers_cylinder(&s));
    let union_measure = v.union(fin).measure();
    let pass = excess < excess_bound && covers_full_cylinders && union_measure < Rational::one();
    Ok(P2SrReport { v, k, depth, excess, excess_bound, covers_full_cylinders, union_measure, choices, pass })
}

pub fn p3_sr(u: &StagedOpenSet, v: &StagedOpenSet) -> StagedOpenSet {
    u.union(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P3SrReport {
    pub n_e: usize,
    pub v: StagedOpenSet,
    #[serde(with = "serde_rational")]
    pub cond_after: Rational,
    pub covers_u: bool,
    pub covers_level: bool,
    pub pass: bool,
}

/// Stagewise `U ∪ T_{|σ|+k}` for a Schnorr test level.
pub fn p3_sr_test(u: &StagedOpenSet, sigma: &BitString, k: usize, t: &TestFamily) -> Result<P3SrReport> {
    let before = u.final_set().conditional_measure(sigma);
    if before >= Rational::one() - pow2_neg(k) {
        return Err(Error::SlackViolated(format!("mu(U|{sigma}) = {} is not below 1 - 2^-{k}", format(&before))));
    }
    let n_e = sigma.len() + k;
    let level = t.level(n_e)?;
    let v = p3_sr(u, &StagedOpenSet::single(level.clone()));
    let fin = v.final_set();
    let cond_after = fin.conditional_measure(sigma);
    let covers_u = fin.covers(u.final_set());
    let covers_level = fin.covers(level);
    Ok(P3SrReport { n_e, pass: cond_after < Rational::one() && covers_u && covers_level, v, cond_after, covers_u, covers_level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::ratio;

    fn set(s: &[&str]) -> PrefixFreeSet {
        PrefixFreeSet::from_strs(s).unwrap()
    }

    fn staged(stages: &[&[&str]]) -> StagedOpenSet {
        StagedOpenSet::new(stages.iter().map(|s| set(s)).collect()).unwrap()
    }

    #[test]
    fn p2_examples() {
        let r = p2_sr(&staged(&[&["00"]]), 2, 2).unwrap();
        assert!(r.v.covers(&set(&["00"])));
        assert!(r.excess < ratio(1, 4) && r.pass);
        let r = p2_sr(&staged(&[&[]]), 1, 3).unwrap();
        assert!(r.v.is_empty());
        let r = p2_sr(&staged(&[&[], &["00"], &["00", "01"]]), 2, 2).unwrap();
        assert!(r.v.covers_cylinder(&"0".into()));
        assert!(r.pass);
        assert!(matches!(p2_sr(&staged(&[&["0"]]), 1, 2), Err(Error::SlackViolated(_))));
    }

    #[test]
    fn p1_p3_examples() {
        assert_eq!(p1_sr(&staged(&[&["00"]]), &"0".into()), staged(&[&["0"]]));
        assert!(p1_sr(&staged(&[&["00"]]), &"1".into()).final_set().is_empty());
        assert_eq!(p3_sr(&staged(&[&["00"]]), &staged(&[&["11"]])), staged(&[&["00", "11"]]));
    }
}
