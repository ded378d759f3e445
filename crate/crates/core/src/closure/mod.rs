//! The three closure properties for each randomness notion, and the
//! providers that package them for the diagonalizer.

pub mod cr;
pub mod mlr;
pub mod sr;

use num_traits::One;
use serde::Serialize;

pub use cr::{p1_cr, p2_cr_check, p3_cr, P2CrReport, P3CrReport, WinningRegion};
pub use mlr::{p1_mlr, p2_mlr, p3_mlr, slack_k, P2MlrReport, P3MlrReport};
pub use sr::{p1_sr, p2_sr, p3_sr, p3_sr_test, P2SrReport, P3SrReport};

use crate::covers::TestFamily;
use crate::error::{Error, Result};
use crate::martingale::{winning_set, Strategy};
use crate::space::rational::{format, pow2, pow2_neg, Rational};
use crate::space::{BitString, PrefixFreeSet, StagedOpenSet};

/// A class of open sets closed under conditioning (P1), under adding every
/// fully covered cylinder (P2), and under absorbing a test level while
/// leaving a given cylinder uncovered (P3).
pub trait ClosureProvider {
    type Set: Clone + Serialize;
    type Test;

    fn case(&self) -> &'static str;

    /// The empty open set, admitted into every class.
    fn empty_set(&self) -> Self::Set;

    /// Generators of the set, materialized at the provider's working depth.
    fn generators(&self, set: &Self::Set) -> PrefixFreeSet;

    fn p1(&self, set: &Self::Set, sigma: &BitString) -> Result<Self::Set>;

    fn p2(&self, set: &Self::Set) -> Result<Self::Set>;

    /// Returns the chosen level (none without a test) and the enlarged set.
    fn p3(&self, set: &Self::Set, sigma: &BitString, test: Option<&Self::Test>) -> Result<(Option<usize>, Self::Set)>;

    fn test_level(&self, test: &Self::Test, n: usize) -> Result<PrefixFreeSet>;
}

#[derive(Clone, Debug)]
pub struct Mlr {
    pub q: Rational,
    pub k: usize,
}

impl ClosureProvider for Mlr {
    type Set = PrefixFreeSet;
    type Test = TestFamily;

    fn case(&self) -> &'static str {
        "mlr"
    }

    fn empty_set(&self) -> PrefixFreeSet {
        PrefixFreeSet::empty()
    }

    fn generators(&self, set: &PrefixFreeSet) -> PrefixFreeSet {
        set.clone()
    }

    fn p1(&self, set: &PrefixFreeSet, sigma: &BitString) -> Result<PrefixFreeSet> {
        p1_mlr(set, sigma)
    }

    fn p2(&self, set: &PrefixFreeSet) -> Result<PrefixFreeSet> {
        let q = threshold_above(&set.measure(), &self.q)?;
        Ok(p2_mlr(set, &q)?.v.union(set))
    }

    fn p3(&self, set: &PrefixFreeSet, sigma: &BitString, test: Option<&TestFamily>) -> Result<(Option<usize>, PrefixFreeSet)> {
        let Some(t) = test else { return Ok((None, set.clone())) };
        let k = slack_k(set, sigma, self.k).ok_or_else(|| Error::FullConditional(sigma.to_string()))?;
        let r = p3_mlr(set, sigma, k, t)?;
        Ok((Some(r.n_e), r.v))
    }

    fn test_level(&self, test: &TestFamily, n: usize) -> Result<PrefixFreeSet> {
        test.level(n).cloned()
    }
}

/// `q` itself when it exceeds `mu`, else the midpoint of `mu` and 1.
fn threshold_above(mu: &Rational, q: &Rational) -> Result<Rational> {
    if *mu >= Rational::one() {
        return Err(Error::Unbounded(format(mu)));
    }
    if mu < q && *q < Rational::one() {
        Ok(q.clone())
    } else {
        Ok((mu + Rational::one()) / pow2(1))
    }
}

#[derive(Clone, Debug)]
pub struct Cr {
    pub depth: usize,
    pub cap: usize,
}

impl ClosureProvider for Cr {
    type Set = WinningRegion;
    type Test = Strategy;

    fn case(&self) -> &'static str {
        "cr"
    }

    fn empty_set(&self) -> WinningRegion {
        WinningRegion::empty()
    }

    fn generators(&self, set: &WinningRegion) -> PrefixFreeSet {
        set.generators.clone()
    }

    fn p1(&self, set: &WinningRegion, sigma: &BitString) -> Result<WinningRegion> {
        match p1_cr(&set.strategy, &set.threshold, sigma, true)? {
            None => Ok(WinningRegion::empty()),
            Some((d, q)) => WinningRegion::new(d, q, self.depth),
        }
    }

    /// Full cylinders are already inside a winning region.
    fn p2(&self, set: &WinningRegion) -> Result<WinningRegion> {
        Ok(set.clone())
    }

    fn p3(&self, set: &WinningRegion, sigma: &BitString, test: Option<&Strategy>) -> Result<(Option<usize>, WinningRegion)> {
        let Some(d_e) = test else { return Ok((None, set.clone())) };
        let r = p3_cr(&set.strategy, &set.threshold, sigma, d_e, self.depth, self.cap)?;
        let region = WinningRegion {
            strategy: r.mixture,
            threshold: r.v.threshold.clone(),
            generators: r.v.generators,
            truncated: r.v.truncated,
        };
        Ok((Some(r.n_e), region))
    }

    fn test_level(&self, test: &Strategy, n: usize) -> Result<PrefixFreeSet> {
        Ok(winning_set(test, &pow2(n), self.depth)?.generators)
    }
}

#[derive(Clone, Debug)]
pub struct Sr {
    pub k: usize,
    pub depth: usize,
}

impl Sr {
    fn slack(&self, measure: &Rational) -> Result<usize> {
        if *measure >= Rational::one() {
            return Err(Error::Unbounded(format(measure)));
        }
        Ok((self.k..).find(|&k| *measure < Rational::one() - pow2_neg(k)).expect("measure below 1"))
    }
}

impl ClosureProvider for Sr {
    type Set = StagedOpenSet;
    type Test = TestFamily;

    fn case(&self) -> &'static str {
        "sr"
    }

    fn empty_set(&self) -> StagedOpenSet {
        StagedOpenSet::single(PrefixFreeSet::empty())
    }

    fn generators(&self, set: &StagedOpenSet) -> PrefixFreeSet {
        set.final_set().clone()
    }

    fn p1(&self, set: &StagedOpenSet, sigma: &BitString) -> Result<StagedOpenSet> {
        Ok(p1_sr(set, sigma))
    }

    fn p2(&self, set: &StagedOpenSet) -> Result<StagedOpenSet> {
        let k = self.slack(&set.final_measure())?;
        let r = p2_sr(set, k, self.depth)?;
        Ok(set.union(&StagedOpenSet::single(r.v)))
    }

    fn p3(&self, set: &StagedOpenSet, sigma: &BitString, test: Option<&TestFamily>) -> Result<(Option<usize>, StagedOpenSet)> {
        let Some(t) = test else { return Ok((None, set.clone())) };
        let k = self.slack(&set.final_set().conditional_measure(sigma))?.max(self.k);
        let r = p3_sr_test(set, sigma, k, t)?;
        Ok((Some(r.n_e), r.v))
    }

    fn test_level(&self, test: &TestFamily, n: usize) -> Result<PrefixFreeSet> {
        test.level(n).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::ratio;

    #[test]
    fn mlr_p2_adjusts_threshold() {
        let p = Mlr { q: ratio(1, 4), k: 1 };
        let u = PrefixFreeSet::from_strs(&["0"]).unwrap();
        let v = p.p2(&u).unwrap();
        assert!(v.covers(&u));
        assert_eq!(threshold_above(&ratio(1, 2), &ratio(1, 4)).unwrap(), ratio(3, 4));
    }

    #[test]
    fn cr_p1_on_dead_capital_is_empty() {
        let p = Cr { depth: 4, cap: 8 };
        let region = WinningRegion::new(Strategy::Doubler, ratio(4, 1), 4).unwrap();
        let c = p.p1(&region, &"1".into()).unwrap();
        assert!(p.generators(&c).is_empty());
        let c = p.p1(&region, &"0".into()).unwrap();
        assert_eq!(p.generators(&c), PrefixFreeSet::from_strs(&["0"]).unwrap());
    }
}
