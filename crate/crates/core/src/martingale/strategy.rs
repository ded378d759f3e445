use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::table::MartingaleTable;
use crate::error::{Error, Result};
use crate::series::IntervalPartition;
use crate::space::rational::{pow2, pow2_neg, serde_rational, Rational};
use crate::space::{BitString, PrefixFreeSet};

/// A procedural martingale. Every variant is exactly fair wherever it is
/// defined, provided its components are.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    Constant {
        #[serde(with = "serde_rational")]
        value: Rational,
    },
    Tabulated {
        table: MartingaleTable,
    },
    /// Stakes everything on 0 at every step.
    Doubler,
    /// `τ ↦ base(prefix · τ)`.
    Translated {
        base: Box<Strategy>,
        prefix: BitString,
    },
    Scaled {
        base: Box<Strategy>,
        #[serde(with = "serde_rational")]
        factor: Rational,
    },
    /// `(1 − weight)·base + weight·extra`.
    Mixture {
        base: Box<Strategy>,
        extra: Box<Strategy>,
        #[serde(with = "serde_rational")]
        weight: Rational,
    },
    /// Weighted average of the normalized translates `d_σ/d_σ(ε)` over
    /// `|σ| ≤ levels`, topped up with a constant for the missing weight.
    Averaged {
        base: Box<Strategy>,
        levels: usize,
        /// Replace `base` by `(base + 1)/2` first, so no translate is dead.
        shift: bool,
    },
    /// Plays `base` afresh after every completed block of `blocks`.
    Reset {
        base: Box<Strategy>,
        #[serde(with = "serde_rational")]
        threshold: Rational,
        blocks: PrefixFreeSet,
    },
    /// A pot of `q·2^-a_i` per index, bet all-in on zeros along `I_{i,a_i}`.
    BlockDoubler {
        exponents: Vec<usize>,
        #[serde(with = "serde_rational")]
        q: Rational,
    },
}

impl Strategy {
    pub fn constant(value: Rational) -> Self {
        Strategy::Constant { value }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn tabulated(table: MartingaleTable) -> Self {
        Strategy::Tabulated { table }
    }

    pub fn value(&self, s: &BitString) -> Result<Rational> {
        match self {
            Strategy::Constant { value } => Ok(value.clone()),
            Strategy::Tabulated { table } => Ok(table.value(s).clone()),
            Strategy::Doubler => Ok(if s.bits().iter().any(|&b| b) { Rational::zero() } else { pow2(s.len()) }),
            Strategy::Translated { base, prefix } => base.value(&prefix.concat(s)),
            Strategy::Scaled { base, factor } => Ok(base.value(s)? * factor),
            Strategy::Mixture { base, extra, weight } => {
                Ok((Rational::one() - weight) * base.value(s)? + weight * extra.value(s)?)
            }
            Strategy::Averaged { base, levels, shift } => averaged_value(base, *levels, *shift, s),
            Strategy::Reset { base, blocks, .. } => {
                let mut acc = Rational::one();
                let mut rest = s.clone();
                while let Some(u) = blocks.generator_below(&rest) {
                    acc *= base.value(u)?;
                    rest = rest.suffix_from(u.len());
                }
                Ok(acc * base.value(&rest)?)
            }
            Strategy::BlockDoubler { exponents, q } => Ok(block_doubler_value(exponents, q, s)),
        }
    }

    /// A length beyond which the capital never changes, when one is known.
    /// Used to decide whether a depth-bounded search can have missed wins.
    pub fn frozen_after(&self) -> Option<usize> {
        match self {
            Strategy::Constant { .. } => Some(0),
            Strategy::Tabulated { table } => Some(table.depth()),
            Strategy::Doubler => None,
            Strategy::Translated { base, prefix } => base.frozen_after().map(|f| f.saturating_sub(prefix.len())),
            Strategy::Scaled { base, .. } | Strategy::Averaged { base, .. } => base.frozen_after(),
            Strategy::Mixture { base, extra, .. } => Some(base.frozen_after()?.max(extra.frozen_after()?)),
            Strategy::Reset { base, blocks, .. } => {
                if blocks.is_empty() {
                    base.frozen_after()
                } else {
                    None
                }
            }
            Strategy::BlockDoubler { exponents, .. } => Some(
                exponents
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| IntervalPartition.interval(i, a).end)
                    .max()
                    .unwrap_or(0),
            ),
        }
    }

    pub fn is_normed(&self) -> Result<bool> {
        Ok(self.value(&BitString::empty())?.is_one())
    }

    /// Tabulates values on all strings of length at most `depth`.
    pub fn tabulate(&self, depth: usize) -> Result<MartingaleTable> {
        let mut values = std::collections::BTreeMap::new();
        for n in 0..=depth {
            for s in BitString::all_of_length(n) {
                let v = self.value(&s)?;
                values.insert(s, v);
            }
        }
        MartingaleTable::new(depth, values)
    }

    /// First node shorter than `depth` where fairness fails.
    pub fn first_unfair(&self, depth: usize) -> Result<Option<BitString>> {
        for n in 0..depth {
            for s in BitString::all_of_length(n) {
                let avg = (self.value(&s.child(false))? + self.value(&s.child(true))?) / pow2(1);
                if avg != self.value(&s)? {
                    return Ok(Some(s));
                }
            }
        }
        Ok(None)
    }
}

fn averaged_value(base: &Strategy, levels: usize, shift: bool, tau: &BitString) -> Result<Rational> {
    let d = |s: &BitString| -> Result<Rational> {
        let v = base.value(s)?;
        Ok(if shift { (v + Rational::one()) / pow2(1) } else { v })
    };
    let mut total = pow2_neg(levels + 1);
    for n in 0..=levels {
        let w = pow2_neg(2 * n + 1);
        for sigma in BitString::all_of_length(n) {
            let den = d(&sigma)?;
            if den.is_zero() {
                return Err(Error::ZeroPrefix(sigma.to_string()));
            }
            total += &w * d(&sigma.concat(tau))? / den;
        }
    }
    Ok(total)
}

fn block_doubler_value(exponents: &[usize], q: &Rational, s: &BitString) -> Rational {
    let reserved: Rational = exponents.iter().map(|&a| q * pow2_neg(a)).sum();
    let mut capital = Rational::one() - reserved;
    for (i, &a) in exponents.iter().enumerate() {
        let block = IntervalPartition.interval(i, a);
        let seen = block.clone().take_while(|&p| p < s.len());
        let mut pot = q * pow2_neg(a);
        for p in seen {
            if s.bits()[p] {
                pot = Rational::zero();
                break;
            }
            pot *= pow2(1);
        }
        capital += pot;
    }
    capital
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::{int, ratio};

    #[test]
    fn doubler_values() {
        let d = Strategy::Doubler;
        assert_eq!(d.value(&"000".into()).unwrap(), int(8));
        assert_eq!(d.value(&"01".into()).unwrap(), int(0));
        assert_eq!(d.first_unfair(5).unwrap(), None);
    }

    #[test]
    fn reset_unfolds_blocks() {
        let shifted = Strategy::Mixture { base: Box::new(Strategy::Doubler), extra: Box::new(Strategy::one()), weight: ratio(1, 2) };
        let r = Strategy::Reset { base: Box::new(shifted), threshold: ratio(3, 2), blocks: PrefixFreeSet::from_strs(&["0"]).unwrap() };
        assert_eq!(r.value(&"00".into()).unwrap(), ratio(9, 4));
        assert_eq!(r.value(&"".into()).unwrap(), int(1));
        assert_eq!(r.first_unfair(5).unwrap(), None);
    }

    #[test]
    fn averaged_is_fair_and_normed() {
        let a = Strategy::Averaged { base: Box::new(Strategy::Doubler), levels: 2, shift: true };
        assert_eq!(a.value(&BitString::empty()).unwrap(), int(1));
        assert_eq!(a.first_unfair(5).unwrap(), None);
        let unshifted = Strategy::Averaged { base: Box::new(Strategy::Doubler), levels: 1, shift: false };
        assert!(matches!(unshifted.value(&"0".into()), Err(Error::ZeroPrefix(_))));
    }

    #[test]
    fn block_doubler_reaches_q() {
        let d = Strategy::BlockDoubler { exponents: vec![1], q: ratio(3, 2) };
        // I_{0,1} = [0, 1): one zero doubles the reserved 3/4.
        assert_eq!(d.value(&"0".into()).unwrap(), ratio(7, 4));
        assert_eq!(d.value(&"1".into()).unwrap(), ratio(1, 4));
        assert_eq!(d.first_unfair(4).unwrap(), None);
    }

    #[test]
    fn tagged_json() {
        let s = Strategy::Translated { base: Box::new(Strategy::Doubler), prefix: "0".into() };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"translated","base":{"kind":"doubler"},"prefix":"0"}"#);
        assert_eq!(serde_json::from_str::<Strategy>(&j).unwrap(), s);
    }
}
