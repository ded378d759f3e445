use num_traits::One;
use serde::Serialize;

use crate::covers::TestFamily;
use crate::error::{Error, Result};
use crate::space::rational::{format, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet};

pub fn p1_mlr(u: &PrefixFreeSet, sigma: &BitString) -> Result<PrefixFreeSet> {
    let v = u.condition(sigma);
    if v.measure() >= Rational::one() {
        return Err(Error::FullConditional(sigma.to_string()));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P2MlrReport {
    pub v: PrefixFreeSet,
    #[serde(with = "serde_rational")]
    pub q: Rational,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    /// μ(U)/q.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub search_depth: usize,
    /// `[U] ⊆ [V]`; holds automatically since each generator of U has
    /// conditional measure 1 > q.
    pub covers_u: bool,
    /// Every σ up to the search depth with μ(U|σ) = 1 has `[σ] ⊆ [V]`.
    pub covers_full_cylinders: bool,
    pub pass: bool,
}

/// The minimal σ (to depth `maxlen(U)`) where U is denser than `q`.
pub fn p2_mlr(u: &PrefixFreeSet, q: &Rational) -> Result<P2MlrReport> {
    let mu = u.measure();
    if !(mu < *q && *q < Rational::one()) {
        return Err(Error::BadThreshold { threshold: format(q), measure: format(&mu) });
    }
    let depth = u.max_len();
    let mut found = Vec::new();
    let mut stack = vec![BitString::empty()];
    while let Some(s) = stack.pop() {
        if u.conditional_measure(&s) > *q {
            found.push(s);
        } else if s.len() < depth {
            stack.push(s.child(true));
            stack.push(s.child(false));
        }
    }
    let v = PrefixFreeSet::new(found)?;
    let measure = v.measure();
    let bound = &mu / q;
    let covers_u = v.covers(u);
    let covers_full_cylinders = (0..=depth)
        .flat_map(BitString::all_of_length)
        .filter(|s| u.conditional_measure(s).is_one())
        .all(|s| v.covers_cylinder(&s));
    let pass = measure <= bound && bound < Rational::one() && covers_u && covers_full_cylinders;
    Ok(P2MlrReport { v, q: q.clone(), measure, bound, search_depth: depth, covers_u, covers_full_cylinders, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P3MlrReport {
    pub n_e: usize,
    pub k: usize,
    pub v: PrefixFreeSet,
    #[serde(with = "serde_rational")]
    pub cond_before: Rational,
    #[serde(with = "serde_rational")]
    pub cond_after: Rational,
    pub covers_u: bool,
    pub covers_level: bool,
    pub pass: bool,
}

/// `V = U ∪ T_{|σ|+k}`, which stays non-full above σ when U leaves `2^-k` room.
pub fn p3_mlr(u: &PrefixFreeSet, sigma: &BitString, k: usize, t: &TestFamily) -> Result<P3MlrReport> {
    let before = u.conditional_measure(sigma);
    if before >= Rational::one() - pow2_neg(k) {
        return Err(Error::SlackViolated(format!(
            "mu(U|{sigma}) = {} is not below 1 - 2^-{k}",
            format(&before)
        )));
    }
    let n_e = sigma.len() + k;
    let level = t.level(n_e)?;
    let v = u.union(level);
    let after = v.conditional_measure(sigma);
    let covers_u = v.covers(u);
    let covers_level = v.covers(level);
    Ok(P3MlrReport {
        n_e,
        k,
        pass: after < Rational::one() && covers_u && covers_level,
        v,
        cond_before: before,
        cond_after: after,
        covers_u,
        covers_level,
    })
}

/// Least `k ≥ k_min` with μ(U|σ) < 1 − 2^-k, if μ(U|σ) < 1.
pub fn slack_k(u: &PrefixFreeSet, sigma: &BitString, k_min: usize) -> Option<usize> {
    let c = u.conditional_measure(sigma);
    if c >= Rational::one() {
        return None;
    }
    (k_min..).find(|&k| c < Rational::one() - pow2_neg(k))
}
