//! Conversions between tests and single bounded covers.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::rational::{format, pow, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, PeriodicPoint, PrefixFreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "ML")]
    MartinLof,
    Schnorr,
    #[serde(rename = "generalized")]
    Generalized,
}

/// Finitely many levels of a test; `levels[n]` generates level `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTest", into = "RawTest")]
pub struct TestFamily {
    kind: TestKind,
    levels: Vec<PrefixFreeSet>,
    bound_schedule: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawTest {
    kind: TestKind,
    levels: Vec<Vec<BitString>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound_schedule: Option<Vec<String>>,
}

impl TryFrom<RawTest> for TestFamily {
    type Error = Error;

    fn try_from(raw: RawTest) -> Result<Self> {
        let levels = raw.levels.into_iter().map(PrefixFreeSet::new).collect::<Result<Vec<_>>>()?;
        let schedule = raw
            .bound_schedule
            .map(|v| v.iter().map(|s| crate::space::rational::parse(s)).collect::<Result<Vec<_>>>())
            .transpose()?;
        TestFamily::new(raw.kind, levels, schedule)
    }
}

impl From<TestFamily> for RawTest {
    fn from(t: TestFamily) -> Self {
        RawTest {
            kind: t.kind,
            levels: t.levels.iter().map(|l| l.iter().cloned().collect()).collect(),
            bound_schedule: t.bound_schedule.map(|v| v.iter().map(format).collect()),
        }
    }
}

impl TestFamily {
    pub fn new(kind: TestKind, levels: Vec<PrefixFreeSet>, bound_schedule: Option<Vec<Rational>>) -> Result<Self> {
        let t = TestFamily { kind, levels, bound_schedule };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTest(msg));
        for (n, level) in self.levels.iter().enumerate() {
            let m = level.measure();
            match self.kind {
                TestKind::MartinLof if m > pow2_neg(n) => return bad(format!("level {n} has measure {m} > 2^-{n}")),
                TestKind::Schnorr if m != pow2_neg(n) => return bad(format!("level {n} has measure {m} != 2^-{n}")),
                _ => {}
            }
            if let Some(b) = self.bound_schedule.as_ref().and_then(|s| s.get(n)) {
                if m > *b {
                    return bad(format!("level {n} has measure {m} above its bound {b}"));
                }
            }
        }
        for (n, w) in self.levels.windows(2).enumerate() {
            match self.kind {
                TestKind::Generalized => {
                    if w[1].measure() > w[0].measure() {
                        return bad(format!("measure increases from level {n} to {}", n + 1));
                    }
                }
                _ => {
                    if !w[0].covers(&w[1]) {
                        return bad(format!("level {} is not contained in level {n}", n + 1));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn levels(&self) -> &[PrefixFreeSet] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, n: usize) -> Result<&PrefixFreeSet> {
        self.levels.get(n).ok_or(Error::MissingLevel(n))
    }

    pub fn bound_schedule(&self) -> Option<&[Rational]> {
        self.bound_schedule.as_deref()
    }

    /// The point lies in every supplied level.
    pub fn captures(&self, x: &PeriodicPoint) -> bool {
        self.levels.iter().all(|l| l.member(x))
    }
}

/// Levels `U^0, …, U^N` with `U^0 = {ε}`.
pub fn power_test(u: &PrefixFreeSet, n_max: usize) -> Result<TestFamily> {
    let m = u.measure();
    if m >= Rational::one() {
        return Err(Error::Unbounded(format(&m)));
    }
    let levels = (0..=n_max).map(|n| u.power(n)).collect::<Result<Vec<_>>>()?;
    let schedule = (0..=n_max).map(|n| pow(&m, n)).collect();
    TestFamily::new(TestKind::Generalized, levels, Some(schedule))
}

/// An explicit factorization `X ↾ m = σ₁ ⋯ σ_n` with every `σ_i ∈ U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerCertificate {
    pub n: usize,
    pub factors: Vec<BitString>,
    pub prefix: BitString,
}

impl PowerCertificate {
    pub fn check(&self, u: &PrefixFreeSet, x: &PeriodicPoint) -> bool {
        let joined = self.factors.iter().fold(BitString::empty(), |acc, f| acc.concat(f));
        self.factors.len() == self.n
            && self.factors.iter().all(|f| u.contains(f))
            && joined == self.prefix
            && x.prefix(joined.len()) == joined
    }
}

/// Tails of `x` outside `[u]`, in order of first occurrence.
pub fn escaping_tails(u: &PrefixFreeSet, x: &PeriodicPoint) -> Vec<PeriodicPoint> {
    x.tails().into_iter().filter(|t| !u.member(t)).collect()
}

pub fn tails_to_power(u: &PrefixFreeSet, x: &PeriodicPoint, n: usize) -> Result<PowerCertificate> {
    let escaping = escaping_tails(u, x);
    if !escaping.is_empty() {
        return Err(Error::TailEscapes(escaping.iter().map(|t| t.to_string()).collect()));
    }
    let mut factors = Vec::with_capacity(n);
    let mut pos = 0;
    for _ in 0..n {
        // The tail at `pos` lies in [U], so a generator is a prefix of it.
        let tail = x.shift(pos).prefix(u.max_len());
        let g = u.generator_below(&tail).expect("every tail is covered").clone();
        pos += g.len();
        factors.push(g);
    }
    Ok(PowerCertificate { n, factors, prefix: x.prefix(pos) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelBound {
    pub k: usize,
    pub level: usize,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailCheck {
    pub tail: String,
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointCheck {
    pub point: String,
    pub in_all_levels: bool,
    pub tails: Vec<TailCheck>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeReport {
    pub k_max: usize,
    pub merged: PrefixFreeSet,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    /// Σ_{k≤K} 2^{-k-2}.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    /// Σ_{k>K} 2^{-k-2} = 2^{-K-2}.
    #[serde(with = "serde_rational")]
    pub residual: Rational,
    /// The overall cap 1/2 that the partial sums never exceed.
    #[serde(with = "serde_rational")]
    pub cap: Rational,
    pub per_k: Vec<LevelBound>,
    pub point_check: Option<PointCheck>,
    pub pass: bool,
}

/// `⋃_{k≤K} ⋃_{|σ|=k} (V_{3k+2} | σ)`, with each conditioned set left at the root.
pub fn schnorr_merge(v: &TestFamily, k_max: usize, point: Option<&PeriodicPoint>) -> Result<MergeReport> {
    if v.kind() != TestKind::Schnorr {
        return Err(Error::InvalidTest("merge expects a Schnorr test".into()));
    }
    v.level(3 * k_max + 2)?;
    let mut merged = PrefixFreeSet::empty();
    let mut per_k = Vec::new();
    for k in 0..=k_max {
        let level = v.level(3 * k + 2)?;
        let mut part = PrefixFreeSet::empty();
        for sigma in BitString::all_of_length(k) {
            part = part.union(&level.condition(&sigma));
        }
        let measure = part.measure();
        let bound = pow2_neg(k + 2);
        per_k.push(LevelBound { k, level: 3 * k + 2, pass: measure <= bound, measure, bound });
        merged = merged.union(&part);
    }
    let measure = merged.measure();
    let bound = pow2_neg(1) - pow2_neg(k_max + 2);
    let point_check = point.map(|x| {
        let tails: Vec<TailCheck> =
            x.tails().iter().map(|t| TailCheck { tail: t.to_string(), member: merged.member(t) }).collect();
        let in_all_levels = v.captures(x);
        PointCheck {
            point: x.to_string(),
            in_all_levels,
            pass: !in_all_levels || tails.iter().all(|t| t.member),
            tails,
        }
    });
    let cap = Rational::new(1.into(), 2.into());
    let pass = measure <= bound
        && bound <= cap
        && per_k.iter().all(|p| p.pass)
        && point_check.as_ref().is_none_or(|p| p.pass);
    Ok(MergeReport { k_max, merged, measure, bound, residual: pow2_neg(k_max + 2), cap, per_k, point_check, pass })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BundleEntry {
    pub point: String,
    pub certified: bool,
    pub escaping_tails: Vec<String>,
    pub certificate: Option<PowerCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BundleReport {
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    pub bounded: bool,
    pub n: usize,
    pub points: Vec<BundleEntry>,
}

/// One bounded set handling several points at once: each point whose tails
/// all lie in `[u]` gets an `n`-block factorization.
pub fn remark24_bundle(u: &PrefixFreeSet, points: &[PeriodicPoint], n: usize) -> BundleReport {
    let measure = u.measure();
    let entries = points
        .iter()
        .map(|x| match tails_to_power(u, x, n) {
            Ok(c) => BundleEntry { point: x.to_string(), certified: true, escaping_tails: vec![], certificate: Some(c) },
            Err(_) => BundleEntry {
                point: x.to_string(),
                certified: false,
                escaping_tails: escaping_tails(u, x).iter().map(|t| t.to_string()).collect(),
                certificate: None,
            },
        })
        .collect();
    BundleReport { bounded: measure < Rational::one(), measure, n, points: entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::{int, ratio};

    fn set(s: &[&str]) -> PrefixFreeSet {
        PrefixFreeSet::from_strs(s).unwrap()
    }

    fn pt(h: &str, p: &str) -> PeriodicPoint {
        PeriodicPoint::new(h.into(), p.into()).unwrap()
    }

    fn zeros_test(n: usize) -> TestFamily {
        let levels = (0..=n).map(|k| PrefixFreeSet::singleton(BitString::zeros(k))).collect();
        TestFamily::new(TestKind::Schnorr, levels, None).unwrap()
    }

    #[test]
    fn power_test_examples() {
        let t = power_test(&set(&["00", "01", "10"]), 2).unwrap();
        assert_eq!(t.level(1).unwrap().measure(), ratio(3, 4));
        assert_eq!(t.level(2).unwrap().measure(), ratio(9, 16));
        let t = power_test(&set(&["0"]), 3).unwrap();
        assert_eq!(t.level(3).unwrap(), &set(&["000"]));
        let t = power_test(&set(&[]), 2).unwrap();
        assert!(t.level(2).unwrap().is_empty());
        assert!(matches!(power_test(&set(&["0", "1"]), 2), Err(Error::Unbounded(_))));
    }

    #[test]
    fn tails_to_power_examples() {
        let c = tails_to_power(&set(&["0"]), &pt("", "0"), 4).unwrap();
        assert_eq!(c.factors, vec![BitString::from("0"); 4]);
        let u = set(&["0", "10"]);
        let x = pt("", "10");
        let c = tails_to_power(&u, &x, 3).unwrap();
        assert_eq!(c.factors, vec![BitString::from("10"); 3]);
        assert!(c.check(&u, &x));
        match tails_to_power(&set(&["00"]), &pt("0", "1"), 2) {
            Err(Error::TailEscapes(t)) => assert!(t.contains(&"(1)^ω".to_string())),
            other => panic!("expected TailEscapes, got {other:?}"),
        }
    }

    #[test]
    fn merge_examples() {
        let v = zeros_test(5);
        let r = schnorr_merge(&v, 0, None).unwrap();
        assert_eq!(r.merged, set(&["00"]));
        assert_eq!((r.measure.clone(), r.bound.clone()), (ratio(1, 4), ratio(1, 4)));
        let r = schnorr_merge(&v, 1, Some(&pt("", "0"))).unwrap();
        assert_eq!(r.merged, set(&["00"]));
        assert_eq!(r.bound, ratio(3, 8));
        assert!(r.pass);
        assert!(matches!(schnorr_merge(&v, 2, None), Err(Error::MissingLevel(8))));
    }

    #[test]
    fn validation() {
        let bad = TestFamily::new(TestKind::MartinLof, vec![set(&[""]), set(&["0", "1"])], None);
        assert!(bad.is_err());
        let not_nested = TestFamily::new(TestKind::MartinLof, vec![set(&["0"]), set(&["11"])], None);
        assert!(not_nested.is_err());
        let json = r#"{"kind":"Schnorr","levels":[[""],["0"],["00"]]}"#;
        let t: TestFamily = serde_json::from_str(json).unwrap();
        assert_eq!(t.level(2).unwrap().measure(), ratio(1, 4));
        assert_eq!(serde_json::to_string(&t).unwrap(), json);
        assert_eq!(t.level(0).unwrap().measure(), int(1));
    }

    #[test]
    fn bundle_examples() {
        let r = remark24_bundle(&set(&["0"]), &[pt("", "0"), pt("", "1")], 2);
        assert!(r.points[0].certified);
        assert!(!r.points[1].certified);
        let r = remark24_bundle(&set(&["00", "01", "10"]), &[pt("", "00"), pt("", "01")], 2);
        assert!(r.bounded && r.points.iter().all(|p| p.certified));
        assert_eq!(r.points[1].certificate.as_ref().unwrap().factors, vec![BitString::from("01"); 2]);
    }
}
