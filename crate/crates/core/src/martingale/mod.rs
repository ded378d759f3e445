//! Exact martingales and the transformations used by the cover constructions.

pub mod strategy;
pub mod table;
pub mod winning;

use num_traits::{One, Zero};

pub use strategy::Strategy;
pub use table::MartingaleTable;
pub use winning::{verify_ville_kolmogorov, winning_set, winning_set_from, VkReport, WinningSet};

use crate::error::{Error, Result};
use crate::space::rational::{pow2_neg, ratio, Rational};
use crate::space::{BitString, PeriodicPoint, PrefixFreeSet};

/// `τ ↦ d(στ)`.
pub fn translate(d: &Strategy, sigma: &BitString) -> Strategy {
    if sigma.is_empty() {
        return d.clone();
    }
    Strategy::Translated { base: Box::new(d.clone()), prefix: sigma.clone() }
}

/// `(d + 1)/2`: normed when `d` is, and bounded below by 1/2.
pub fn positivity_shift(d: &Strategy) -> Strategy {
    Strategy::Mixture { base: Box::new(d.clone()), extra: Box::new(Strategy::one()), weight: ratio(1, 2) }
}

pub fn average_truncated(d: &Strategy, levels: usize, shift: bool) -> Strategy {
    Strategy::Averaged { base: Box::new(d.clone()), levels, shift }
}

/// `(1 − 2^{-n_e+1})·d + 2^{-n_e+1}·d_e`.
pub fn mixture(d: &Strategy, d_e: &Strategy, n_e: usize) -> Result<Strategy> {
    if n_e == 0 {
        return Err(Error::InvalidThreshold("mixture needs n_e >= 1".into()));
    }
    for s in [d, d_e] {
        let v = s.value(&BitString::empty())?;
        if !v.is_one() {
            return Err(Error::NotNormed(v.to_string()));
        }
    }
    Ok(Strategy::Mixture { base: Box::new(d.clone()), extra: Box::new(d_e.clone()), weight: pow2_neg(n_e - 1) })
}

/// Restarts `d` after each block of `u`. `d` must be normed and every block
/// must be a minimal string reaching `q`.
pub fn reset(d: &Strategy, q: &Rational, u: &PrefixFreeSet) -> Result<Strategy> {
    let root = d.value(&BitString::empty())?;
    if !root.is_one() {
        return Err(Error::NotNormed(root.to_string()));
    }
    for block in u {
        if d.value(block)? < *q {
            return Err(Error::NotWinningSet(format!("d({block}) < {q}")));
        }
        for n in 0..block.len() {
            let p = block.prefix(n);
            if d.value(&p)? >= *q {
                return Err(Error::NotWinningSet(format!("{p:?} already reaches {q} before {block}")));
            }
        }
    }
    Ok(Strategy::Reset { base: Box::new(d.clone()), threshold: q.clone(), blocks: u.clone() })
}

/// `τ ↦ d(στ)/d(σ)`.
pub fn normalized_translate(d: &Strategy, sigma: &BitString) -> Result<Strategy> {
    let v = d.value(sigma)?;
    if v.is_zero() {
        return Err(Error::DeadCapital(sigma.to_string()));
    }
    if v.is_one() {
        return Ok(translate(d, sigma));
    }
    Ok(Strategy::Scaled { base: Box::new(translate(d, sigma)), factor: v.recip() })
}

/// Capital along `X ↾ 0, …, X ↾ depth`.
pub fn success_capital(d: &Strategy, x: &PeriodicPoint, depth: usize) -> Result<Vec<Rational>> {
    (0..=depth).map(|n| d.value(&x.prefix(n))).collect()
}

/// Greedy parse of `s` into leading blocks of `u` and a remainder.
pub fn parse_blocks(u: &PrefixFreeSet, s: &BitString) -> (Vec<BitString>, BitString) {
    let mut blocks = Vec::new();
    let mut rest = s.clone();
    while let Some(b) = u.generator_below(&rest).cloned() {
        if b.is_empty() {
            break;
        }
        rest = rest.suffix_from(b.len());
        blocks.push(b);
    }
    (blocks, rest)
}

pub fn zero_strategy() -> Strategy {
    Strategy::constant(Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::{int, pow};

    #[test]
    fn translate_examples() {
        let t = translate(&Strategy::Doubler, &"0".into());
        assert_eq!(t.value(&BitString::empty()).unwrap(), int(2));
        assert_eq!(t.value(&"0".into()).unwrap(), int(4));
        assert_eq!(translate(&Strategy::Doubler, &BitString::empty()), Strategy::Doubler);
        let dead = translate(&Strategy::Doubler, &"1".into());
        for s in ["", "0", "01", "000"] {
            assert_eq!(dead.value(&s.into()).unwrap(), int(0));
        }
    }

    #[test]
    fn average_of_shifted_doubler() {
        let shifted = positivity_shift(&Strategy::Doubler);
        let a = average_truncated(&Strategy::Doubler, 0, true);
        for s in ["", "0", "00", "1", "01"] {
            let s = BitString::from(s);
            let expect = shifted.value(&s).unwrap() / int(2) + ratio(1, 2);
            assert_eq!(a.value(&s).unwrap(), expect);
        }
        let c = average_truncated(&Strategy::one(), 3, false);
        assert_eq!(c.value(&"0110".into()).unwrap(), int(1));
    }

    #[test]
    fn reset_examples() {
        let shifted = positivity_shift(&Strategy::Doubler);
        let w = winning_set(&shifted, &ratio(3, 2), 4).unwrap();
        assert_eq!(w.generators, PrefixFreeSet::from_strs(&["0"]).unwrap());
        let r = reset(&shifted, &ratio(3, 2), &w.generators).unwrap();
        for k in 0..5 {
            assert_eq!(r.value(&BitString::zeros(k)).unwrap(), pow(&ratio(3, 2), k));
        }
        let not_min = PrefixFreeSet::from_strs(&["00"]).unwrap();
        assert!(matches!(reset(&shifted, &ratio(3, 2), &not_min), Err(Error::NotWinningSet(_))));
    }

    #[test]
    fn mixture_examples() {
        let d = Strategy::one();
        let m = mixture(&d, &Strategy::Doubler, 1).unwrap();
        assert_eq!(m.value(&"00".into()).unwrap(), int(4));
        let m = mixture(&d, &Strategy::Doubler, 3).unwrap();
        assert_eq!(m.value(&"0".into()).unwrap(), ratio(5, 4));
        let m = mixture(&d, &Strategy::Doubler, 2).unwrap();
        assert_eq!(m.value(&"0".into()).unwrap(), ratio(3, 2));
        assert!(mixture(&Strategy::constant(int(2)), &d, 2).is_err());
    }

    #[test]
    fn capital_traces() {
        let zeros = PeriodicPoint::cycle("0".into()).unwrap();
        let ones = PeriodicPoint::cycle("1".into()).unwrap();
        assert_eq!(success_capital(&Strategy::Doubler, &zeros, 3).unwrap(), [1, 2, 4, 8].map(int));
        assert_eq!(success_capital(&Strategy::Doubler, &ones, 2).unwrap(), [1, 0, 0].map(int));
        assert!(success_capital(&Strategy::one(), &ones, 4).unwrap().iter().all(|v| *v == int(1)));
    }
}
