use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::martingale::{mixture, normalized_translate, winning_set, Strategy, WinningSet};
use crate::space::rational::{format, int, min, pow2, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet};

/// The open set where a normed strategy first reaches a threshold, with
/// generators materialized to a working depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WinningRegion {
    pub strategy: Strategy,
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    pub generators: PrefixFreeSet,
    pub truncated: bool,
}

impl WinningRegion {
    pub fn new(strategy: Strategy, threshold: Rational, depth: usize) -> Result<Self> {
        let w = winning_set(&strategy, &threshold, depth)?;
        Ok(WinningRegion { strategy, threshold, generators: w.generators, truncated: w.truncated })
    }

    /// The constant-1 strategy never reaches 2.
    pub fn empty() -> Self {
        WinningRegion { strategy: Strategy::one(), threshold: int(2), generators: PrefixFreeSet::empty(), truncated: false }
    }
}

/// `(τ ↦ d(στ)/d(σ), q/d(σ))`. `None` for dead capital when `allow_dead`.
pub fn p1_cr(d: &Strategy, q: &Rational, sigma: &BitString, allow_dead: bool) -> Result<Option<(Strategy, Rational)>> {
    for p in sigma.prefixes() {
        if d.value(&p)? >= *q {
            return Err(Error::AlreadyWon(p.to_string()));
        }
    }
    let v = d.value(sigma)?;
    if v.is_zero() {
        return if allow_dead { Ok(None) } else { Err(Error::DeadCapital(sigma.to_string())) };
    }
    if sigma.is_empty() && v.is_one() {
        return Ok(Some((d.clone(), q.clone())));
    }
    Ok(Some((normalized_translate(d, sigma)?, q / v)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P2CrReport {
    pub sigma: BitString,
    pub depth: usize,
    /// μ(winning region | σ) at the search depth.
    #[serde(with = "serde_rational")]
    pub conditional: Rational,
    #[serde(with = "serde_rational")]
    pub capital: Rational,
    #[serde(with = "serde_rational")]
    pub q: Rational,
    /// The hypothesis μ = 1 holds, so the conclusion d(σ) ≥ q is checked.
    pub applies: bool,
    pub pass: bool,
}

/// A full conditional measure above σ forces `d(σ) ≥ q`.
pub fn p2_cr_check(d: &Strategy, q: &Rational, sigma: &BitString, depth: usize) -> Result<P2CrReport> {
    let w = winning_set(d, q, depth.max(sigma.len()))?;
    let conditional = w.generators.conditional_measure(sigma);
    let capital = d.value(sigma)?;
    let applies = conditional.is_one();
    Ok(P2CrReport {
        sigma: sigma.clone(),
        depth,
        pass: !applies || capital >= *q,
        conditional,
        capital,
        q: q.clone(),
        applies,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P3CrAttempt {
    pub n_e: usize,
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    /// Largest mixture capital along the prefixes of σ.
    #[serde(with = "serde_rational")]
    pub max_prefix_capital: Rational,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct P3CrReport {
    pub n_e: usize,
    pub mixture: Strategy,
    pub v: WinningSet,
    /// `T_{n_e}`: where `d_e` reaches `2^{n_e}`.
    pub test_level: WinningSet,
    pub covers_u: bool,
    pub covers_level: bool,
    #[serde(with = "serde_rational")]
    pub cond_after: Rational,
    pub attempts: Vec<P3CrAttempt>,
    pub pass: bool,
}

/// Searches `n_e = 1..=cap` for a mixture whose threshold stays above every
/// capital along σ.
pub fn p3_cr(
    d: &Strategy,
    q: &Rational,
    sigma: &BitString,
    d_e: &Strategy,
    depth: usize,
    cap: usize,
) -> Result<P3CrReport> {
    let u = winning_set(d, q, depth)?;
    let mut attempts = Vec::new();
    for n_e in 1..=cap {
        let mix = mixture(d, d_e, n_e)?;
        let threshold = min((Rational::one() - pow2_neg(n_e - 1)) * q, int(2));
        let mut top = Rational::zero();
        for p in sigma.prefixes() {
            let v = mix.value(&p)?;
            if v > top {
                top = v;
            }
        }
        let accepted = threshold > Rational::one() && top < threshold;
        attempts.push(P3CrAttempt { n_e, threshold: threshold.clone(), max_prefix_capital: top, accepted });
        if !accepted {
            continue;
        }
        let v = winning_set(&mix, &threshold, depth.max(sigma.len()))?;
        let test_level = winning_set(d_e, &pow2(n_e), depth)?;
        let covers_u = v.generators.covers(&u.generators);
        let covers_level = v.generators.covers(&test_level.generators);
        let cond_after = v.generators.conditional_measure(sigma);
        return Ok(P3CrReport {
            n_e,
            mixture: mix,
            pass: covers_u && covers_level && cond_after < Rational::one(),
            v,
            test_level,
            covers_u,
            covers_level,
            cond_after,
            attempts,
        });
    }
    let last = attempts.last().map(|a| {
        format!("n_e = {}: capital {} vs threshold {}", a.n_e, format(&a.max_prefix_capital), format(&a.threshold))
    });
    Err(Error::SearchExhausted(last.unwrap_or_else(|| "cap is 0".into())))
}
