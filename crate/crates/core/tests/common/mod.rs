//! Seeded generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use opencover::martingale::{MartingaleTable, Strategy};
use opencover::space::rational::{pow2_neg, ratio};
use opencover::{BitString, PeriodicPoint, PrefixFreeSet, Rational, StagedOpenSet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_string(rng: &mut StdRng, min: usize, max: usize) -> BitString {
    let len = rng.gen_range(min..=max);
    BitString::from_bits((0..len).map(|_| rng.gen()).collect())
}

/// Up to `max_size` nonempty strings of length at most `max_len`, reduced.
pub fn random_set(rng: &mut StdRng, max_size: usize, max_len: usize) -> PrefixFreeSet {
    let n = rng.gen_range(0..=max_size);
    let strings: Vec<BitString> = (0..n).map(|_| random_string(rng, 1, max_len)).collect();
    PrefixFreeSet::reduce(strings)
}

/// A set of measure strictly below 1.
pub fn random_bounded_set(rng: &mut StdRng, max_size: usize, max_len: usize) -> PrefixFreeSet {
    loop {
        let u = random_set(rng, max_size, max_len);
        if u.measure() < Rational::one() {
            return u;
        }
    }
}

pub fn random_point(rng: &mut StdRng) -> PeriodicPoint {
    let head = random_string(rng, 0, 4);
    let period = random_string(rng, 1, 3);
    PeriodicPoint::new(head, period).unwrap()
}

/// A fair table whose splits `d(σ0) = d(σ)(1 + r)` use `r ∈ {−1, −3/4, …, 1}`.
pub fn random_table(rng: &mut StdRng, depth: usize) -> MartingaleTable {
    let mut values = BTreeMap::from([(BitString::empty(), Rational::one())]);
    for len in 0..depth {
        for s in BitString::all_of_length(len) {
            let v = values[&s].clone();
            let r = ratio(rng.gen_range(-4..=4), 4);
            values.insert(s.child(false), &v * (Rational::one() + &r));
            values.insert(s.child(true), &v * (Rational::one() - &r));
        }
    }
    MartingaleTable::new(depth, values).unwrap()
}

/// Normed strategies of assorted shapes.
pub fn random_strategy(rng: &mut StdRng) -> Strategy {
    match rng.gen_range(0..4) {
        0 => Strategy::Doubler,
        1 => Strategy::one(),
        2 => {
            let depth = rng.gen_range(2..=6);
            Strategy::tabulated(random_table(rng, depth))
        }
        _ => opencover::martingale::mixture(
            &Strategy::tabulated(random_table(rng, 4)),
            &Strategy::Doubler,
            rng.gen_range(1..=3),
        )
        .unwrap(),
    }
}

pub fn leaves(len: usize) -> impl Iterator<Item = BitString> {
    BitString::all_of_length(len)
}

pub fn has_prefix_in(u: &PrefixFreeSet, x: &BitString) -> bool {
    x.prefixes().any(|p| u.contains(&p))
}

/// μ([U] ∩ [σ]) by counting leaves at depth `max(|σ|, maxlen U)`.
pub fn bf_measure_within(u: &PrefixFreeSet, sigma: &BitString) -> Rational {
    let depth = sigma.len().max(u.max_len());
    let extra = depth - sigma.len();
    let hits = leaves(extra).filter(|t| has_prefix_in(u, &sigma.concat(t))).count();
    Rational::from_integer(hits.into()) * pow2_neg(depth)
}

pub fn bf_measure(u: &PrefixFreeSet) -> Rational {
    bf_measure_within(u, &BitString::empty())
}

pub fn bf_conditional(u: &PrefixFreeSet, sigma: &BitString) -> Rational {
    bf_measure_within(u, sigma) * opencover::space::rational::pow2(sigma.len())
}

/// `[U] ⊆ [V]` by leaves at the common depth.
pub fn bf_covers(v: &PrefixFreeSet, u: &PrefixFreeSet) -> bool {
    let depth = u.max_len().max(v.max_len());
    leaves(depth).all(|x| !has_prefix_in(u, &x) || has_prefix_in(v, &x))
}

/// A staged set: random growth of a bounded set over a few stages.
pub fn random_staged(rng: &mut StdRng, max_len: usize) -> StagedOpenSet {
    let fin = random_bounded_set(rng, 5, max_len);
    let elems: Vec<BitString> = fin.iter().cloned().collect();
    let stages = rng.gen_range(1..=3);
    let mut out = Vec::new();
    for s in 1..=stages {
        let take = elems.len() * s / stages;
        out.push(PrefixFreeSet::new(elems[..take].to_vec()).unwrap());
    }
    StagedOpenSet::new(out).unwrap()
}

pub fn zero() -> Rational {
    Rational::zero()
}
