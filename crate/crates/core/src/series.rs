//! Summable series versus open sets: coordinate sets, zero blocks on a
//! fixed interval partition, and a tree embedding below a martingale.

use std::collections::BTreeMap;
use std::ops::Range;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::coder::DyadicFunction;
use crate::covers::TestFamily;
use crate::error::{Error, Result};
use crate::martingale::Strategy;
use crate::space::rational::{dyadic_exponent, format, is_dyadic, pow2, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, Clopen, CylinderConstraintSet, PrefixFreeSet, StagedOpenSet};

/// Cantor pairing: `⟨n, j⟩ = d(d+1)/2 + n` with `d = n + j`.
pub fn pairing(n: usize, j: usize) -> usize {
    let d = n + j;
    d * (d + 1) / 2 + n
}

pub fn unpair(m: usize) -> (usize, usize) {
    let mut d = ((((8 * m + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    // Guard against rounding in either direction.
    while d * (d + 1) / 2 > m {
        d -= 1;
    }
    while (d + 1) * (d + 2) / 2 <= m {
        d += 1;
    }
    let n = m - d * (d + 1) / 2;
    (n, d - n)
}

/// Bit `j` of coordinate `n` sits at position `⟨n, j⟩`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoordinatePairing;

impl CoordinatePairing {
    pub fn position(&self, n: usize, j: usize) -> usize {
        pairing(n, j)
    }

    /// Number of leading bits of coordinate `n` at positions `≤ max_pos`.
    pub fn depth_below(&self, n: usize, max_pos: usize) -> usize {
        (0..).take_while(|&j| pairing(n, j) <= max_pos).count()
    }
}

/// Blocks `I_{i,l}` of length `l ≥ 1`, laid out consecutively in the order
/// of the diagonals `i + l − 1 = 0, 1, 2, …`, each diagonal by ascending `i`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalPartition;

impl IntervalPartition {
    pub fn interval(&self, i: usize, l: usize) -> Range<usize> {
        assert!(l >= 1, "intervals have positive length");
        let d = i + l - 1;
        // Diagonal e holds lengths e+1, e, …, 1, summing to (e+1)(e+2)/2.
        let before = d * (d + 1) * (d + 2) / 6;
        let start = before + i * (d + 1) - i * i.saturating_sub(1) / 2;
        start..start + l
    }
}

/// `Z_{i,l}`: zeros throughout `I_{i,l}`.
pub fn z_set(i: usize, l: usize) -> CylinderConstraintSet {
    CylinderConstraintSet::constant(IntervalPartition.interval(i, l), false)
}

/// `B_{n,α} = {X : X_n < α}` for dyadic `α ∈ [0, 1]`.
pub fn b_set(n: usize, alpha: &Rational) -> Result<Clopen> {
    if !is_dyadic(alpha) || *alpha < Rational::zero() || *alpha > Rational::one() {
        return Err(Error::NonDyadicAlpha(format(alpha)));
    }
    if alpha.is_one() {
        return Ok(Clopen::full());
    }
    let t = dyadic_exponent(alpha).expect("checked dyadic");
    let scaled = (alpha * pow2(t)).to_integer();
    let bit = |j: usize| scaled.bit((t - 1 - j) as u64);
    let mut terms = Vec::new();
    for j in 0..t {
        if bit(j) {
            let mut c: BTreeMap<usize, bool> = (0..j).map(|i| (pairing(n, i), bit(i))).collect();
            c.insert(pairing(n, j), false);
            terms.push(CylinderConstraintSet::new(c));
        }
    }
    Ok(Clopen::from_terms(terms))
}

fn product_complement(values: impl IntoIterator<Item = Rational>) -> Rational {
    Rational::one() - values.into_iter().fold(Rational::one(), |acc, v| acc * (Rational::one() - v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeriesOpenReport {
    pub open: Clopen,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    /// 1 − ∏(1 − f(n)).
    #[serde(with = "serde_rational")]
    pub product_measure: Rational,
    pub pass: bool,
}

pub fn series_to_open(f: &DyadicFunction<usize>) -> Result<SeriesOpenReport> {
    if let Some((_, v)) = f.values().iter().find(|(_, v)| **v > Rational::one()) {
        return Err(Error::ValueOverOne(format(v)));
    }
    let mut open = Clopen::empty();
    for (&n, v) in f.values() {
        open = open.union(&b_set(n, v)?);
    }
    let measure = open.measure();
    let product_measure = product_complement(f.values().values().cloned());
    Ok(SeriesOpenReport { pass: measure == product_measure, open, measure, product_measure })
}

/// Largest `m ∈ [0, 2^t]` with `pred(m)`, for a predicate true at 0 and downward closed.
fn largest_on_grid(t: usize, pred: impl Fn(&Rational) -> bool) -> Rational {
    let top = 1u128 << t;
    let at = |m: u128| Rational::new(m.into(), top.into());
    let (mut lo, mut hi) = (0u128, top);
    if pred(&at(hi)) {
        return at(hi);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pred(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// `sup {α : B_{n,α} ⊆ V}`, exact on the dyadic grid fixed by V's positions.
pub fn open_to_series_sup(v: &Clopen, n: usize) -> Rational {
    let t = v.max_position().map_or(0, |p| CoordinatePairing.depth_below(n, p));
    largest_on_grid(t, |a| v.covers(&b_set(n, a).expect("grid points are dyadic")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ApproxReport {
    pub n: usize,
    pub c: usize,
    pub grid: usize,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    /// μ(B_{n,α} \ V[n]) and the allowance 2^{-n-c}.
    #[serde(with = "serde_rational")]
    pub leak: Rational,
    #[serde(with = "serde_rational")]
    pub allowance: Rational,
    pub pass: bool,
}

/// `max {α : μ(B_{n,α} \ V[n]) ≤ 2^{-n-c}}` on the grid `2^-t`, `t ≥ n + c`.
pub fn open_to_series_approx(v: &StagedOpenSet, n: usize, c: usize) -> Result<ApproxReport> {
    let stage = Clopen::from_prefix_free(v.stage(n)?);
    let allowance = pow2_neg(n + c);
    let depth = stage.max_position().map_or(0, |p| CoordinatePairing.depth_below(n, p));
    let grid = depth.max(n + c);
    let leak_at = |a: &Rational| b_set(n, a).expect("grid points are dyadic").measure_minus(&stage);
    let alpha = largest_on_grid(grid, |a| leak_at(a) <= allowance);
    let leak = leak_at(&alpha);
    Ok(ApproxReport { n, c, grid, pass: leak <= allowance, alpha, leak, allowance })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VnReport {
    pub n: usize,
    pub v: PrefixFreeSet,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    /// 2S/n.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub pass: bool,
}

/// `V_n = {σ : g(σ) > 2^{-|σ|}·n/2}`.
pub fn vn_from_g(g: &DyadicFunction<BitString>, n: usize) -> Result<VnReport> {
    if n == 0 {
        return Err(Error::InvalidThreshold("n must be at least 1".into()));
    }
    let half_n = Rational::new(n.into(), 2.into());
    let v = PrefixFreeSet::reduce(
        g.support().filter(|(s, val)| **val > pow2_neg(s.len()) * &half_n).map(|(s, _)| s.clone()),
    );
    let measure = v.measure();
    let bound = g.sum() * pow2(1) / Rational::from_integer(n.into());
    Ok(VnReport { n, pass: measure <= bound, v, measure, bound })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TestSeriesReport {
    pub f: DyadicFunction<BitString>,
    /// Σ_n n·μ(U_n).
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub pass: bool,
}

/// `f(σ) = 2^{-|σ|}·n` for the largest level `n` listing σ as a generator.
pub fn f_from_test(t: &TestFamily) -> Result<TestSeriesReport> {
    let mut best: BTreeMap<BitString, usize> = BTreeMap::new();
    for (n, level) in t.levels().iter().enumerate() {
        for s in level {
            best.insert(s.clone(), n);
        }
    }
    let values = best
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .map(|(s, n)| {
            let v = pow2_neg(s.len()) * Rational::from_integer(n.into());
            (s, v)
        })
        .collect();
    let f = DyadicFunction::new(values)?;
    let bound: Rational =
        t.levels().iter().enumerate().map(|(n, l)| l.measure() * Rational::from_integer(n.into())).sum();
    Ok(TestSeriesReport { pass: f.sum() <= bound, f, bound })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockWin {
    pub index: usize,
    pub exponent: usize,
    pub block: (usize, usize),
    /// Capital at the end of the block on the path that is 1 everywhere else.
    #[serde(with = "serde_rational")]
    pub capital: Rational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EncodeReport {
    pub exponents: Vec<usize>,
    #[serde(with = "serde_rational")]
    pub q: Rational,
    #[serde(with = "serde_rational")]
    pub weight: Rational,
    pub open: Clopen,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    #[serde(with = "serde_rational")]
    pub product_measure: Rational,
    pub strategy: Strategy,
    pub wins: Vec<BlockWin>,
    pub pass: bool,
}

/// `U = ⋃ Z_{i,a_i}` with the block doubler that turns each reserved pot
/// `q·2^{-a_i}` into `q` across its block.
pub fn encode_series(a: &[usize], q: &Rational) -> Result<EncodeReport> {
    if *q <= Rational::one() {
        return Err(Error::InvalidThreshold(format(q)));
    }
    let weight: Rational = a.iter().map(|&x| pow2_neg(x)).sum();
    let bound = q.recip();
    if weight >= bound {
        return Err(Error::WeightTooLarge { weight: format(&weight), bound: format(&bound) });
    }
    let open = Clopen::from_terms(a.iter().enumerate().map(|(i, &l)| z_set(i, l)));
    let measure = open.measure();
    let product_measure = product_complement(a.iter().map(|&x| pow2_neg(x)));
    let strategy = Strategy::BlockDoubler { exponents: a.to_vec(), q: q.clone() };
    let mut wins = Vec::new();
    for (i, &l) in a.iter().enumerate() {
        let block = IntervalPartition.interval(i, l);
        let path = BitString::from_bits((0..block.end).map(|p| !block.contains(&p)).collect());
        let capital = strategy.value(&path)?;
        wins.push(BlockWin { index: i, exponent: l, block: (block.start, block.end), pass: capital >= *q, capital });
    }
    let pass = measure == product_measure && wins.iter().all(|w| w.pass);
    Ok(EncodeReport {
        exponents: a.to_vec(),
        q: q.clone(),
        weight,
        open,
        measure,
        product_measure,
        strategy,
        wins,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractReport {
    /// `b_i`, or `None` when no `l ≤ lmax` works.
    pub b: Vec<Option<usize>>,
    pub g: DyadicFunction<usize>,
    #[serde(with = "serde_rational")]
    pub product_measure: Rational,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    pub bounded: bool,
    pub pass: bool,
}

/// `b_i = min {l ≤ lmax : Z_{i,l} ⊆ W}` for `i < n`.
pub fn extract_series(w: &Clopen, n: usize, lmax: usize) -> ExtractReport {
    let b: Vec<Option<usize>> = (0..n)
        .map(|i| (1..=lmax).find(|&l| w.covers(&Clopen::from_terms([z_set(i, l)]))))
        .collect();
    let g = DyadicFunction::new(
        b.iter().enumerate().filter_map(|(i, bi)| bi.map(|l| (i, pow2_neg(l)))).collect(),
    )
    .expect("powers of two are nonnegative");
    let product_measure = product_complement(g.values().values().cloned());
    let measure = w.measure();
    ExtractReport {
        pass: product_measure <= measure,
        bounded: measure < Rational::one(),
        b,
        g,
        product_measure,
        measure,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeReport {
    pub depth: usize,
    pub map: BTreeMap<BitString, BitString>,
    pub incomparable: bool,
    pub monotone: bool,
    /// Largest capital seen along any image prefix.
    #[serde(with = "serde_rational")]
    pub max_capital: Rational,
    pub level_bounds: bool,
    pub pass: bool,
}

/// Embeds the full binary tree of height `depth` into strings along which
/// `d` stays below 2, splitting each node at the shortest possible length.
/// `budget` caps the extension length tried per node.
pub fn tree_embed(d: &Strategy, depth: usize, budget: usize) -> Result<TreeReport> {
    let mut map = BTreeMap::from([(BitString::empty(), BitString::empty())]);
    for k in 0..depth {
        let cap = Rational::from_integer(2.into()) - pow2_neg(k + 1);
        for sigma in BitString::all_of_length(k) {
            let tau = map[&sigma].clone();
            let mut frontier = vec![tau.clone()];
            let mut found = None;
            for m in 1..=budget {
                let mut next = Vec::new();
                for node in &frontier {
                    for bit in [false, true] {
                        let child = node.child(bit);
                        if d.value(&child)? <= cap {
                            next.push(child);
                        }
                    }
                }
                if next.len() >= 2 {
                    found = Some((next[0].clone(), next[1].clone()));
                    break;
                }
                if next.is_empty() {
                    return Err(Error::SearchExhausted(format!("no admissible extension of {tau} at length +{m}")));
                }
                frontier = next;
            }
            let Some((left, right)) = found else {
                return Err(Error::SearchExhausted(format!(
                    "extension budget {budget} spent below {tau}; frontier {:?}",
                    frontier
                )));
            };
            map.insert(sigma.child(false), left);
            map.insert(sigma.child(true), right);
        }
    }
    let keys: Vec<&BitString> = map.keys().collect();
    let mut incomparable = true;
    let mut monotone = true;
    for a in &keys {
        for b in &keys {
            if a.is_prefix_of(b) {
                monotone &= map[*a].is_prefix_of(&map[*b]);
            } else if !b.is_prefix_of(a) {
                incomparable &= !map[*a].comparable(&map[*b]);
            }
        }
    }
    let mut max_capital = Rational::zero();
    let mut level_bounds = true;
    for (sigma, tau) in &map {
        let cap = Rational::from_integer(2.into()) - pow2_neg(sigma.len());
        for p in tau.prefixes() {
            let v = d.value(&p)?;
            level_bounds &= v <= cap;
            if v > max_capital {
                max_capital = v;
            }
        }
    }
    let pass = incomparable && monotone && level_bounds && max_capital <= Rational::from_integer(2.into());
    Ok(TreeReport { depth, map, incomparable, monotone, max_capital, level_bounds, pass })
}
