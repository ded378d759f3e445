use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::bits::BitString;
use super::periodic::PeriodicPoint;
use super::rational::{pow, pow2_neg, Rational};
use crate::error::{Error, Result};

/// A finite prefix-free set of strings: finite generators of an open set.
///
/// Elements are kept in length-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "AnySet", into = "RawSet")]
pub struct PrefixFreeSet {
    elements: BTreeSet<BitString>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    elements: Vec<BitString>,
}

/// Input may also be a bare list of strings.
#[derive(Deserialize)]
#[serde(untagged)]
enum AnySet {
    Wrapped(RawSet),
    Bare(Vec<BitString>),
}

impl TryFrom<AnySet> for PrefixFreeSet {
    type Error = Error;

    fn try_from(raw: AnySet) -> Result<Self> {
        match raw {
            AnySet::Wrapped(r) => PrefixFreeSet::new(r.elements),
            AnySet::Bare(v) => PrefixFreeSet::new(v),
        }
    }
}

impl From<PrefixFreeSet> for RawSet {
    fn from(set: PrefixFreeSet) -> Self {
        RawSet { elements: set.elements.into_iter().collect() }
    }
}

impl std::fmt::Debug for PrefixFreeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl PrefixFreeSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{ε}`, generating the whole space.
    pub fn full() -> Self {
        Self::singleton(BitString::empty())
    }

    pub fn singleton(s: BitString) -> Self {
        PrefixFreeSet { elements: BTreeSet::from([s]) }
    }

    /// Builds a set, rejecting input where one string is a proper prefix of another.
    pub fn new(strings: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let elements: BTreeSet<BitString> = strings.into_iter().collect();
        for s in &elements {
            for n in 0..s.len() {
                let p = s.prefix(n);
                if elements.contains(&p) {
                    return Err(Error::NotPrefixFree(format!("{p:?}"), format!("{s:?}")));
                }
            }
        }
        Ok(PrefixFreeSet { elements })
    }

    /// Parses string literals; panics on malformed input. Intended for fixtures.
    pub fn from_strs(strs: &[&str]) -> Result<Self> {
        Self::new(strs.iter().map(|s| BitString::from(*s)))
    }

    /// Keeps the prefix-minimal strings. The generated open set is unchanged.
    pub fn reduce(strings: impl IntoIterator<Item = BitString>) -> Self {
        let sorted: BTreeSet<BitString> = strings.into_iter().collect();
        let mut elements = BTreeSet::new();
        // Length-lex order visits every prefix before its extensions.
        for s in sorted {
            if !(0..=s.len()).any(|n| elements.contains(&s.prefix(n))) {
                elements.insert(s);
            }
        }
        PrefixFreeSet { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.elements.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitString> {
        self.elements.iter()
    }

    pub fn max_len(&self) -> usize {
        self.elements.iter().map(BitString::len).max().unwrap_or(0)
    }

    /// Σ 2^-|σ| over the generators.
    pub fn measure(&self) -> Rational {
        self.elements.iter().map(|s| pow2_neg(s.len())).sum()
    }

    /// The generator that is a prefix of `s`, if any (unique by prefix-freeness).
    pub fn generator_below(&self, s: &BitString) -> Option<&BitString> {
        (0..=s.len()).find_map(|n| self.elements.get(&s.prefix(n)))
    }

    /// Generators strictly extending `s`.
    pub fn extensions_of<'a>(&'a self, s: &'a BitString) -> impl Iterator<Item = &'a BitString> + 'a {
        self.elements.iter().filter(move |t| s.is_proper_prefix_of(t))
    }

    /// μ([U] ∩ [σ]).
    pub fn measure_within(&self, s: &BitString) -> Rational {
        if self.generator_below(s).is_some() {
            pow2_neg(s.len())
        } else {
            self.extensions_of(s).map(|t| pow2_neg(t.len())).sum()
        }
    }

    /// μ([U] | σ) = μ([U] ∩ [σ]) / μ([σ]).
    pub fn conditional_measure(&self, s: &BitString) -> Rational {
        self.measure_within(s) * super::rational::pow2(s.len())
    }

    /// `(U | σ)`: the strings τ with στ ∈ U, or `{ε}` when a prefix of σ is in U.
    pub fn condition(&self, s: &BitString) -> PrefixFreeSet {
        if self.generator_below(s).is_some() {
            return PrefixFreeSet::full();
        }
        PrefixFreeSet {
            elements: self.extensions_of(s).map(|t| t.suffix_from(s.len())).collect(),
        }
    }

    /// `{στ : τ ∈ U}`.
    pub fn rooted_at(&self, s: &BitString) -> PrefixFreeSet {
        PrefixFreeSet { elements: self.elements.iter().map(|t| s.concat(t)).collect() }
    }

    /// `U^n`, the n-fold concatenations. `U^0 = {ε}`.
    pub fn power(&self, n: usize) -> Result<PrefixFreeSet> {
        if n >= 2 && self.contains(&BitString::empty()) {
            return Err(Error::PowerOfEpsilon(n));
        }
        let mut acc = PrefixFreeSet::full();
        for _ in 0..n {
            let mut next = BTreeSet::new();
            for a in &acc.elements {
                for b in &self.elements {
                    next.insert(a.concat(b));
                }
            }
            acc = PrefixFreeSet { elements: next };
        }
        Ok(acc)
    }

    pub fn union(&self, other: &PrefixFreeSet) -> PrefixFreeSet {
        PrefixFreeSet::reduce(self.elements.iter().chain(other.elements.iter()).cloned())
    }

    /// `[σ] ⊆ [U]`.
    pub fn covers_cylinder(&self, s: &BitString) -> bool {
        self.measure_within(s) == pow2_neg(s.len())
    }

    /// `[other] ⊆ [self]`, decided by exact measure on each generator of `other`.
    pub fn covers(&self, other: &PrefixFreeSet) -> bool {
        other.iter().all(|s| self.covers_cylinder(s))
    }

    /// Generators of `[self] ∩ [other]`.
    pub fn intersection(&self, other: &PrefixFreeSet) -> PrefixFreeSet {
        let mut out = BTreeSet::new();
        for s in &self.elements {
            if other.generator_below(s).is_some() {
                out.insert(s.clone());
            } else {
                out.extend(other.extensions_of(s).cloned());
            }
        }
        PrefixFreeSet { elements: out }
    }

    /// μ([self] \ [other]).
    pub fn measure_minus(&self, other: &PrefixFreeSet) -> Rational {
        let inside: Rational = self.elements.iter().map(|s| other.measure_within(s)).sum();
        self.measure() - inside
    }

    /// Some generator is a prefix of the point.
    pub fn member(&self, x: &PeriodicPoint) -> bool {
        let p = x.prefix(self.max_len());
        self.generator_below(&p).is_some()
    }

    pub fn is_bounded(&self) -> bool {
        self.measure() < Rational::one()
    }

    /// Cross-check of the power law without building the power set.
    pub fn power_measure(&self, n: usize) -> Rational {
        pow(&self.measure(), n)
    }

    pub fn is_full(&self) -> bool {
        self.contains(&BitString::empty())
    }

    pub fn measure_is_zero(&self) -> bool {
        self.measure().is_zero()
    }
}

impl FromIterator<BitString> for PrefixFreeSet {
    /// Collects with [`PrefixFreeSet::reduce`].
    fn from_iter<I: IntoIterator<Item = BitString>>(iter: I) -> Self {
        PrefixFreeSet::reduce(iter)
    }
}

impl<'a> IntoIterator for &'a PrefixFreeSet {
    type Item = &'a BitString;
    type IntoIter = std::collections::btree_set::Iter<'a, BitString>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::{int, ratio};

    fn set(s: &[&str]) -> PrefixFreeSet {
        PrefixFreeSet::from_strs(s).unwrap()
    }

    fn strs(u: &PrefixFreeSet) -> Vec<String> {
        u.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reduce_examples() {
        let r = PrefixFreeSet::reduce(["0", "00", "01"].map(BitString::from));
        assert_eq!(strs(&r), ["0"]);
        assert!(PrefixFreeSet::reduce(Vec::<BitString>::new()).is_empty());
        let r = PrefixFreeSet::reduce(["00", "01", "1"].map(BitString::from));
        assert_eq!(strs(&r), ["1", "00", "01"]);
    }

    #[test]
    fn rejects_non_prefix_free() {
        assert!(matches!(PrefixFreeSet::from_strs(&["0", "01"]), Err(Error::NotPrefixFree(..))));
        assert!(PrefixFreeSet::from_strs(&["", "1"]).is_err());
    }

    #[test]
    fn measure_examples() {
        assert_eq!(set(&["0", "10", "110"]).measure(), ratio(7, 8));
        assert_eq!(set(&[""]).measure(), int(1));
        assert_eq!(set(&[]).measure(), int(0));
    }

    #[test]
    fn condition_examples() {
        assert_eq!(strs(&set(&["00", "01", "11"]).condition(&"0".into())), ["0", "1"]);
        // Both halves of [0] are covered, so the conditional is the whole space in measure.
        assert_eq!(set(&["00", "01", "11"]).condition(&"0".into()).measure(), int(1));
        assert!(set(&["00"]).condition(&"1".into()).is_empty());
        assert_eq!(strs(&set(&["0"]).condition(&"01".into())), [""]);
    }

    #[test]
    fn power_examples() {
        let p = set(&["00", "01", "10"]).power(2).unwrap();
        assert_eq!(p.len(), 9);
        assert!(p.iter().all(|s| s.len() == 4));
        assert_eq!(p.measure(), ratio(9, 16));
        assert_eq!(strs(&set(&["1", "01"]).power(0).unwrap()), [""]);
        assert_eq!(strs(&set(&["0"]).power(3).unwrap()), ["000"]);
        assert!(matches!(set(&[""]).power(2), Err(Error::PowerOfEpsilon(2))));
        assert_eq!(strs(&set(&[""]).power(1).unwrap()), [""]);
    }

    #[test]
    fn union_examples() {
        assert_eq!(strs(&set(&["0"]).union(&set(&["00"]))), ["0"]);
        assert_eq!(strs(&set(&["00"]).union(&set(&["11"]))), ["00", "11"]);
        let u = set(&["0"]).union(&set(&["1"]));
        assert_eq!(strs(&u), ["0", "1"]);
        assert_eq!(u.measure(), int(1));
    }

    #[test]
    fn covers_examples() {
        assert!(set(&["0"]).covers(&set(&["00", "01"])));
        assert!(!set(&["00"]).covers(&set(&["0"])));
        assert!(set(&["00", "01"]).covers(&set(&["0"])));
        assert!(set(&["0"]).covers(&set(&[])));
    }

    #[test]
    fn member_examples() {
        let zeros = PeriodicPoint::new("".into(), "0".into()).unwrap();
        let ones = PeriodicPoint::new("".into(), "1".into()).unwrap();
        let alt = PeriodicPoint::new("".into(), "01".into()).unwrap();
        assert!(set(&["0"]).member(&zeros));
        assert!(!set(&["0"]).member(&ones));
        assert!(set(&["010"]).member(&alt));
    }

    #[test]
    fn intersection_and_difference() {
        let a = set(&["0", "11"]);
        let b = set(&["01", "1"]);
        assert_eq!(strs(&a.intersection(&b)), ["01", "11"]);
        assert_eq!(a.measure_minus(&b), ratio(1, 4));
    }
}
