use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::strategy::Strategy;
use super::table::MartingaleTable;
use crate::error::{Error, Result};
use crate::space::rational::{serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet};

/// The minimal strings at which capital first reaches `threshold`,
/// searched to `source_depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WinningSet {
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    pub generators: PrefixFreeSet,
    pub source_depth: usize,
    /// Some frontier node at `source_depth` is alive and below threshold,
    /// so wins beyond the depth are not ruled out.
    pub truncated: bool,
}

pub fn winning_set(d: &Strategy, q: &Rational, depth: usize) -> Result<WinningSet> {
    if *q <= Rational::one() {
        return Err(Error::InvalidThreshold(q.to_string()));
    }
    winning_set_from(d, q, &BitString::empty(), depth)
}

/// Minimal extensions `ρ` of `root` (including `root` itself) with
/// `d(ρ) ≥ q` and `|ρ| ≤ depth`. Here `q` is absolute, so only positivity
/// is required.
pub fn winning_set_from(d: &Strategy, q: &Rational, root: &BitString, depth: usize) -> Result<WinningSet> {
    if *q <= Rational::zero() {
        return Err(Error::InvalidThreshold(q.to_string()));
    }
    let frozen = d.frozen_after();
    let mut generators = Vec::new();
    let mut truncated = false;
    let mut stack = vec![root.clone()];
    while let Some(s) = stack.pop() {
        let v = d.value(&s)?;
        if v >= *q {
            generators.push(s);
            continue;
        }
        // Zero capital stays zero; frozen capital below q never rises.
        if v.is_zero() || frozen.is_some_and(|f| f <= s.len()) {
            continue;
        }
        if s.len() >= depth {
            truncated = true;
            continue;
        }
        stack.push(s.child(true));
        stack.push(s.child(false));
    }
    Ok(WinningSet {
        threshold: q.clone(),
        generators: PrefixFreeSet::new(generators)?,
        source_depth: depth,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VkReport {
    pub sigma: BitString,
    #[serde(with = "serde_rational")]
    pub q: Rational,
    #[serde(with = "serde_rational")]
    pub capital_at_sigma: Rational,
    /// μ(𝒰_{d,σ,q} | σ) within the table depth.
    #[serde(with = "serde_rational")]
    pub measured: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    /// `d(σ) = 0`: the event is empty and the check is vacuous.
    pub degenerate: bool,
    pub pass: bool,
}

/// Measures, over extensions of `σ` within the table, the set where capital
/// climbs to `q·d(σ)`, and compares it with `1/q`.
pub fn verify_ville_kolmogorov(table: &MartingaleTable, sigma: &BitString, q: &Rational) -> Result<VkReport> {
    if *q <= Rational::one() {
        return Err(Error::InvalidThreshold(q.to_string()));
    }
    let base = table.value(sigma).clone();
    let bound = q.recip();
    if base.is_zero() {
        return Ok(VkReport {
            sigma: sigma.clone(),
            q: q.clone(),
            capital_at_sigma: base,
            measured: Rational::zero(),
            bound,
            degenerate: true,
            pass: true,
        });
    }
    let target = q * &base;
    let d = Strategy::tabulated(table.clone());
    let depth = table.depth().max(sigma.len());
    let hits = winning_set_from(&d, &target, sigma, depth)?;
    let measured = hits.generators.conditional_measure(sigma);
    Ok(VkReport {
        sigma: sigma.clone(),
        q: q.clone(),
        capital_at_sigma: base,
        pass: measured <= bound,
        measured,
        bound,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::space::rational::{int, ratio};

    fn strs(u: &PrefixFreeSet) -> Vec<String> {
        u.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn doubler_winning_sets() {
        let w = winning_set(&Strategy::Doubler, &int(2), 4).unwrap();
        assert_eq!(strs(&w.generators), ["0"]);
        assert!(!w.truncated);
        let w = winning_set(&Strategy::Doubler, &int(4), 4).unwrap();
        assert_eq!(strs(&w.generators), ["00"]);
        let w = winning_set(&Strategy::Doubler, &int(64), 4).unwrap();
        assert!(w.generators.is_empty());
        assert!(w.truncated);
    }

    #[test]
    fn constant_never_wins() {
        let w = winning_set(&Strategy::one(), &ratio(3, 2), 6).unwrap();
        assert!(w.generators.is_empty());
        assert!(!w.truncated);
        assert!(matches!(winning_set(&Strategy::one(), &int(1), 2), Err(Error::InvalidThreshold(_))));
    }

    #[test]
    fn vk_examples() {
        let doubler = Strategy::Doubler.tabulate(4).unwrap();
        let r = verify_ville_kolmogorov(&doubler, &BitString::empty(), &int(2)).unwrap();
        assert_eq!((r.measured, r.bound, r.pass), (ratio(1, 2), ratio(1, 2), true));

        let flat = MartingaleTable::constant(int(1), 3);
        let r = verify_ville_kolmogorov(&flat, &"01".into(), &int(2)).unwrap();
        assert_eq!(r.measured, int(0));

        let skew = MartingaleTable::new(
            2,
            BTreeMap::from([("".into(), int(1)), ("0".into(), ratio(3, 2)), ("1".into(), ratio(1, 2))]),
        )
        .unwrap();
        let r = verify_ville_kolmogorov(&skew, &BitString::empty(), &ratio(3, 2)).unwrap();
        assert_eq!((r.measured, r.bound), (ratio(1, 2), ratio(2, 3)));
    }
}
