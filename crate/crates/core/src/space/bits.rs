use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A finite binary string. The empty string is allowed.
///
/// Ordering is length-lexicographic: shorter strings first, then
/// lexicographic with `0 < 1`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn empty() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// `bit` repeated `n` times.
    pub fn repeat(bit: bool, n: usize) -> Self {
        BitString(vec![bit; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::repeat(false, n)
    }

    pub fn ones(n: usize) -> Self {
        Self::repeat(true, n)
    }

    /// The binary expansion of `value` on exactly `len` bits, most significant first.
    pub fn from_index(value: u64, len: usize) -> Self {
        BitString((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    /// All strings of length exactly `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "length {len} is too large to enumerate");
        (0..(1u64 << len)).map(move |v| BitString::from_index(v, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn child(&self, bit: bool) -> BitString {
        let mut v = self.0.clone();
        v.push(bit);
        BitString(v)
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    /// The first `n` bits (the whole string if shorter).
    pub fn prefix(&self, n: usize) -> BitString {
        BitString(self.0[..n.min(self.len())].to_vec())
    }

    /// The string with its first `n` bits removed.
    pub fn suffix_from(&self, n: usize) -> BitString {
        BitString(self.0[n.min(self.len())..].to_vec())
    }

    /// `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.0[..self.len()] == self.0[..]
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Prefixes of length `0..=len`, shortest first.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl From<&str> for BitString {
    /// Panics on characters other than `0`/`1`; for literals in code and tests.
    fn from(s: &str) -> Self {
        s.parse().expect("invalid bit string literal")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_lex_order() {
        let mut v: Vec<BitString> = ["1", "00", "", "0", "01"].iter().map(|s| BitString::from(*s)).collect();
        v.sort();
        let shown: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["", "0", "1", "00", "01"]);
    }

    #[test]
    fn prefix_relations() {
        let a = BitString::from("01");
        let b = BitString::from("011");
        assert!(a.is_prefix_of(&b));
        assert!(a.is_proper_prefix_of(&b));
        assert!(!b.is_prefix_of(&a));
        assert!(BitString::empty().is_prefix_of(&a));
        assert!(!a.is_proper_prefix_of(&a));
        assert!(!BitString::from("1").comparable(&a));
    }

    #[test]
    fn rejects_garbage() {
        assert!("012".parse::<BitString>().is_err());
    }

    #[test]
    fn from_index_round_trip() {
        let all: Vec<String> = BitString::all_of_length(2).map(|b| b.to_string()).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
    }
}
