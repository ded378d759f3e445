//! Clopen sets described by bit-position constraints.
//!
//! Sets such as `{X : X(p) = 0 for p in I}` with I far from the origin would
//! need exponentially many prefix-free generators. Here they are kept as
//! finite unions of constraint maps, and measures are computed exactly by
//! splitting on positions only where terms actually overlap.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::bits::BitString;
use super::periodic::PeriodicPoint;
use super::prefix_free::PrefixFreeSet;
use super::rational::{pow2_neg, Rational};
use crate::error::{Error, Result};

/// `{X : X(p) = b for every (p, b)}`. The empty map is the whole space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct CylinderConstraintSet {
    constraints: BTreeMap<usize, bool>,
}

impl CylinderConstraintSet {
    pub fn new(constraints: BTreeMap<usize, bool>) -> Self {
        CylinderConstraintSet { constraints }
    }

    /// The cylinder `[σ]`.
    pub fn cylinder(s: &BitString) -> Self {
        CylinderConstraintSet { constraints: s.bits().iter().copied().enumerate().collect() }
    }

    /// All positions in `positions` forced to `bit`.
    pub fn constant(positions: impl IntoIterator<Item = usize>, bit: bool) -> Self {
        CylinderConstraintSet { constraints: positions.into_iter().map(|p| (p, bit)).collect() }
    }

    pub fn constraints(&self) -> &BTreeMap<usize, bool> {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn measure(&self) -> Rational {
        pow2_neg(self.constraints.len())
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.constraints.keys().copied()
    }

    pub fn max_position(&self) -> Option<usize> {
        self.constraints.keys().next_back().copied()
    }

    /// Intersection; `None` when two constraints disagree.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let mut out = self.constraints.clone();
        for (&p, &b) in &other.constraints {
            if *out.entry(p).or_insert(b) != b {
                return None;
            }
        }
        Some(CylinderConstraintSet { constraints: out })
    }

    /// Every constraint of `self` also appears in `other`, so `other ⊆ self`.
    pub fn contains_set(&self, other: &Self) -> bool {
        self.constraints.iter().all(|(p, b)| other.constraints.get(p) == Some(b))
    }

    pub fn member(&self, x: &PeriodicPoint) -> bool {
        self.constraints.iter().all(|(&p, &b)| x.bit(p) == b)
    }
}

impl Serialize for CylinderConstraintSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<usize, u8> = self.constraints.iter().map(|(&p, &b)| (p, b as u8)).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CylinderConstraintSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<usize, u8>::deserialize(d)?;
        m.into_iter()
            .map(|(p, b)| match b {
                0 => Ok((p, false)),
                1 => Ok((p, true)),
                _ => Err(serde::de::Error::custom(format!("bit at position {p} must be 0 or 1"))),
            })
            .collect::<std::result::Result<_, _>>()
            .map(CylinderConstraintSet::new)
    }
}

/// A finite union of constraint sets.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Clopen {
    terms: Vec<CylinderConstraintSet>,
}

impl Clopen {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Clopen { terms: vec![CylinderConstraintSet::default()] }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = CylinderConstraintSet>) -> Self {
        let mut c = Clopen { terms: terms.into_iter().collect() };
        c.normalize();
        c
    }

    pub fn from_prefix_free(u: &PrefixFreeSet) -> Self {
        Clopen::from_terms(u.iter().map(CylinderConstraintSet::cylinder))
    }

    pub fn terms(&self) -> &[CylinderConstraintSet] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorts, dedups, and drops terms contained in another term.
    fn normalize(&mut self) {
        self.terms.sort();
        self.terms.dedup();
        let all = std::mem::take(&mut self.terms);
        let kept: Vec<_> = all
            .iter()
            .enumerate()
            .filter(|(i, t)| !all.iter().enumerate().any(|(j, o)| j != *i && o.contains_set(t) && (o != *t)))
            .map(|(_, t)| t.clone())
            .collect();
        self.terms = kept;
    }

    pub fn union(&self, other: &Clopen) -> Clopen {
        Clopen::from_terms(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn intersection(&self, other: &Clopen) -> Clopen {
        Clopen::from_terms(
            self.terms.iter().flat_map(|a| other.terms.iter().filter_map(move |b| a.intersect(b))),
        )
    }

    pub fn member(&self, x: &PeriodicPoint) -> bool {
        self.terms.iter().any(|t| t.member(x))
    }

    pub fn max_position(&self) -> Option<usize> {
        self.terms.iter().filter_map(CylinderConstraintSet::max_position).max()
    }

    /// Exact measure of the union.
    pub fn measure(&self) -> Rational {
        let mut memo = HashMap::new();
        union_measure(self.terms.clone(), &mut memo)
    }

    /// `[other] ⊆ [self]`, decided by μ(self ∪ other) = μ(self).
    pub fn covers(&self, other: &Clopen) -> bool {
        self.union(other).measure() == self.measure()
    }

    /// μ(self \ other).
    pub fn measure_minus(&self, other: &Clopen) -> Rational {
        self.union(other).measure() - other.measure()
    }

    /// Expands to prefix-free generators, visiting at most `limit` tree nodes.
    pub fn to_prefix_free(&self, limit: usize) -> Result<PrefixFreeSet> {
        let mut out = Vec::new();
        let mut visited = 0usize;
        let mut stack = vec![(BitString::empty(), self.terms.clone())];
        while let Some((s, live)) = stack.pop() {
            visited += 1;
            if visited > limit {
                return Err(Error::TooLarge(format!("more than {limit} nodes expanding a clopen set")));
            }
            if live.iter().any(|t| t.constraints.keys().all(|&p| p < s.len())) {
                out.push(s);
                continue;
            }
            let n = s.len();
            for bit in [true, false] {
                let next: Vec<_> = live.iter().filter(|t| t.constraints.get(&n).is_none_or(|&b| b == bit)).cloned().collect();
                if !next.is_empty() {
                    stack.push((s.child(bit), next));
                }
            }
        }
        PrefixFreeSet::new(out)
    }
}

impl From<&PrefixFreeSet> for Clopen {
    fn from(u: &PrefixFreeSet) -> Self {
        Clopen::from_prefix_free(u)
    }
}

type Memo = HashMap<Vec<CylinderConstraintSet>, Rational>;

fn union_measure(mut terms: Vec<CylinderConstraintSet>, memo: &mut Memo) -> Rational {
    terms.sort();
    terms.dedup();
    if terms.is_empty() {
        return Rational::zero();
    }
    if terms.iter().any(CylinderConstraintSet::is_empty) {
        return Rational::one();
    }
    if terms.len() == 1 {
        return terms[0].measure();
    }
    if let Some(m) = memo.get(&terms) {
        return m.clone();
    }
    let groups = components(&terms);
    let m = if groups.len() > 1 {
        // Independent groups: μ(∪) = 1 − ∏(1 − μ(group)).
        let miss = groups
            .into_iter()
            .map(|g| Rational::one() - union_measure(g, memo))
            .fold(Rational::one(), |acc, x| acc * x);
        Rational::one() - miss
    } else {
        let p = terms.iter().filter_map(|t| t.constraints.keys().next().copied()).min().unwrap();
        let half = |bit: bool, memo: &mut Memo| {
            let restricted: Vec<_> = terms
                .iter()
                .filter(|t| t.constraints.get(&p).is_none_or(|&b| b == bit))
                .map(|t| {
                    let mut t = t.clone();
                    t.constraints.remove(&p);
                    t
                })
                .collect();
            union_measure(restricted, memo)
        };
        (half(false, memo) + half(true, memo)) / Rational::from_integer(2.into())
    };
    memo.insert(terms, m.clone());
    m
}

/// Groups terms whose position sets overlap, transitively.
fn components(terms: &[CylinderConstraintSet]) -> Vec<Vec<CylinderConstraintSet>> {
    let mut parent: Vec<usize> = (0..terms.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (i, t) in terms.iter().enumerate() {
        for p in t.positions() {
            if let Some(&j) = owner.get(&p) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            } else {
                owner.insert(p, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<CylinderConstraintSet>> = BTreeMap::new();
    for (i, t) in terms.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(t.clone());
    }
    groups.into_values().collect()
}

/// Positions mentioned by any term, ascending.
pub fn support(c: &Clopen) -> BTreeSet<usize> {
    c.terms.iter().flat_map(|t| t.positions()).collect()
}
