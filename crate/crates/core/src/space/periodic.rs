use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::bits::BitString;
use crate::error::{Error, Result};

/// The eventually periodic sequence `head · period · period · …`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct PeriodicPoint {
    head: BitString,
    period: BitString,
}

#[derive(Deserialize)]
struct RawPoint {
    head: BitString,
    period: BitString,
}

impl TryFrom<RawPoint> for PeriodicPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        PeriodicPoint::new(raw.head, raw.period)
    }
}

impl PeriodicPoint {
    pub fn new(head: BitString, period: BitString) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("periodic point needs a nonempty period".into()));
        }
        Ok(PeriodicPoint { head, period })
    }

    /// `period^ω`.
    pub fn cycle(period: BitString) -> Result<Self> {
        Self::new(BitString::empty(), period)
    }

    pub fn head(&self) -> &BitString {
        &self.head
    }

    pub fn period(&self) -> &BitString {
        &self.period
    }

    pub fn bit(&self, i: usize) -> bool {
        if i < self.head.len() {
            self.head.bits()[i]
        } else {
            self.period.bits()[(i - self.head.len()) % self.period.len()]
        }
    }

    /// `X ↾ n`.
    pub fn prefix(&self, n: usize) -> BitString {
        BitString::from_bits((0..n).map(|i| self.bit(i)).collect())
    }

    /// The tail obtained by deleting the first `k` bits.
    pub fn shift(&self, k: usize) -> PeriodicPoint {
        if k <= self.head.len() {
            return PeriodicPoint { head: self.head.suffix_from(k), period: self.period.clone() };
        }
        let r = (k - self.head.len()) % self.period.len();
        let rotated = self.period.suffix_from(r).concat(&self.period.prefix(r));
        PeriodicPoint { head: BitString::empty(), period: rotated }
    }

    /// Same infinite sequence, regardless of representation.
    pub fn same_sequence(&self, other: &PeriodicPoint) -> bool {
        let n = self.head.len().max(other.head.len()) + self.period.len().lcm(&other.period.len());
        (0..n).all(|i| self.bit(i) == other.bit(i))
    }

    /// Every distinct tail, in order of first occurrence.
    pub fn tails(&self) -> Vec<PeriodicPoint> {
        let mut out: Vec<PeriodicPoint> = Vec::new();
        for k in 0..self.head.len() + self.period.len() {
            let t = self.shift(k);
            if !out.iter().any(|o| o.same_sequence(&t)) {
                out.push(t);
            }
        }
        out
    }

    /// Smallest k such that the k-th tail equals `tail`, if it is a tail at all.
    pub fn tail_index(&self, tail: &PeriodicPoint) -> Option<usize> {
        (0..self.head.len() + self.period.len()).find(|&k| self.shift(k).same_sequence(tail))
    }
}

impl fmt::Display for PeriodicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^ω", self.head, self.period)
    }
}

impl fmt::Debug for PeriodicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
