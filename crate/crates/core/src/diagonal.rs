//! Finite-extension construction of a point in `W^ω` that avoids a list of
//! tests, one block per stage.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::closure::ClosureProvider;
use crate::error::{Error, Result};
use crate::martingale::parse_blocks;
use crate::space::rational::{serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagonalStage {
    pub sigma: BitString,
    /// Generators of the cover at the start of the stage.
    pub cover: PrefixFreeSet,
    pub level: Option<usize>,
    pub tau: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagonalTrace {
    pub case: String,
    pub w: PrefixFreeSet,
    pub stages: Vec<DiagonalStage>,
    pub final_prefix: BitString,
    pub final_cover: PrefixFreeSet,
}

impl DiagonalTrace {
    /// `U_e` for `e = 0..=E`.
    pub fn covers(&self) -> Vec<&PrefixFreeSet> {
        self.stages.iter().map(|s| &s.cover).chain(std::iter::once(&self.final_cover)).collect()
    }

    /// `σ_e` for `e = 0..=E`.
    pub fn prefixes(&self) -> Vec<&BitString> {
        self.stages.iter().map(|s| &s.sigma).chain(std::iter::once(&self.final_prefix)).collect()
    }
}

/// Built when every block of W falls inside the current cover above σ:
/// conditioning then closing the cover yields a set of the class covering `[W]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoveringCertificate {
    pub stage: usize,
    pub sigma: BitString,
    pub cover: PrefixFreeSet,
    pub conditioned: PrefixFreeSet,
    pub closed: PrefixFreeSet,
    #[serde(with = "serde_rational")]
    pub closed_measure: Rational,
    pub covers_w: bool,
}

pub fn run<P: ClosureProvider>(w: &PrefixFreeSet, provider: &P, tests: &[P::Test], stages: usize) -> Result<DiagonalTrace> {
    if w.contains(&BitString::empty()) {
        return Err(Error::PowerOfEpsilon(stages));
    }
    let mut sigma = BitString::empty();
    let mut u = provider.empty_set();
    let mut out = Vec::with_capacity(stages);
    for e in 0..stages {
        let (level, v) = provider.p3(&u, &sigma, tests.get(e))?;
        let gens = provider.generators(&v);
        let tau = w.iter().find(|t| gens.conditional_measure(&sigma.concat(t)) < Rational::one()).cloned();
        let Some(tau) = tau else {
            let conditioned = provider.p1(&v, &sigma)?;
            let closed = provider.p2(&conditioned)?;
            let closed_gens = provider.generators(&closed);
            let certificate = CoveringCertificate {
                stage: e,
                sigma: sigma.clone(),
                cover: gens,
                conditioned: provider.generators(&conditioned),
                closed_measure: closed_gens.measure(),
                covers_w: closed_gens.covers(w),
                closed: closed_gens,
            };
            return Err(Error::NoEscape { stage: e, certificate: Box::new(certificate) });
        };
        out.push(DiagonalStage { sigma: sigma.clone(), cover: provider.generators(&u), level, tau: tau.clone() });
        sigma = sigma.concat(&tau);
        u = v;
    }
    Ok(DiagonalTrace {
        case: provider.case().to_string(),
        w: w.clone(),
        stages: out,
        final_prefix: sigma,
        final_cover: provider.generators(&u),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub stage: Option<usize>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub checks: Vec<Check>,
    pub violations: Vec<String>,
    pub pass: bool,
}

pub fn verify_trace<P: ClosureProvider>(
    t: &DiagonalTrace,
    w: &PrefixFreeSet,
    provider: &P,
    tests: &[P::Test],
) -> Result<TraceReport> {
    let mut checks = Vec::new();
    let mut push = |name, stage, pass, detail: String| checks.push(Check { name, stage, pass, detail });
    let covers = t.covers();
    let prefixes = t.prefixes();

    for (e, s) in t.stages.iter().enumerate() {
        push("block", Some(e), !s.tau.is_empty() && w.contains(&s.tau), format!("tau = {}", s.tau));
        let next = prefixes[e + 1];
        push("extension", Some(e), s.sigma.concat(&s.tau) == *next, format!("{} . {} = {}", s.sigma, s.tau, next));
        let c = covers[e].conditional_measure(&s.sigma);
        push("open-above-prefix", Some(e), c < Rational::one(), format!("mu(U|sigma) = {c}"));
        push("monotone", Some(e), covers[e + 1].covers(covers[e]), format!("U_{} within U_{}", e, e + 1));
        if let (Some(n), Some(test)) = (s.level, tests.get(e)) {
            let level = provider.test_level(test, n)?;
            push("test-capture", Some(e), covers[e + 1].covers(&level), format!("T^{e}_{n} within U_{}", e + 1));
            let avoid = level.conditional_measure(&t.final_prefix);
            push("test-avoidance", Some(e), avoid < Rational::one(), format!("mu(T^{e}_{n} | final) = {avoid}"));
        }
    }
    for e in 1..prefixes.len() {
        let c = covers[e].conditional_measure(prefixes[e]);
        push("non-coverage", Some(e), c < Rational::one(), format!("mu(U_{e} | sigma_{e}) = {c}"));
    }
    let (blocks, rest) = parse_blocks(w, &t.final_prefix);
    push(
        "factorization",
        None,
        blocks.len() == t.stages.len() && rest.is_empty(),
        format!("{} blocks, remainder {:?}", blocks.len(), rest),
    );

    let violations: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| match c.stage {
            Some(e) => format!("{} at stage {e}: {}", c.name, c.detail),
            None => format!("{}: {}", c.name, c.detail),
        })
        .collect();
    Ok(TraceReport { pass: violations.is_empty(), checks, violations })
}
