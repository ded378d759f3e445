use std::collections::BTreeMap;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::rational::{format, serde_rational_map, Rational};
use crate::space::BitString;

/// Capital values on strings of length at most `depth`.
///
/// Nodes not listed take the value of their nearest listed ancestor, so a
/// sparse table describes a martingale that is constant from some point on.
/// Strings longer than `depth` are evaluated at their depth-`depth` prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct MartingaleTable {
    depth: usize,
    values: BTreeMap<BitString, Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    depth: usize,
    #[serde(with = "serde_rational_map")]
    values: BTreeMap<BitString, Rational>,
}

impl TryFrom<RawTable> for MartingaleTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        MartingaleTable::new(raw.depth, raw.values)
    }
}

impl From<MartingaleTable> for RawTable {
    fn from(t: MartingaleTable) -> Self {
        RawTable { depth: t.depth, values: t.values }
    }
}

impl MartingaleTable {
    pub fn new(depth: usize, values: BTreeMap<BitString, Rational>) -> Result<Self> {
        if !values.contains_key(&BitString::empty()) {
            return Err(Error::InvalidTable("no value at the empty string".into()));
        }
        for (s, v) in &values {
            if s.len() > depth {
                return Err(Error::InvalidTable(format!("node {s:?} is deeper than {depth}")));
            }
            if v.is_negative() {
                return Err(Error::InvalidTable(format!("negative capital {} at {s:?}", format(v))));
            }
        }
        Ok(MartingaleTable { depth, values })
    }

    pub fn constant(value: Rational, depth: usize) -> Self {
        MartingaleTable { depth, values: BTreeMap::from([(BitString::empty(), value)]) }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<BitString, Rational> {
        &self.values
    }

    pub fn value(&self, s: &BitString) -> &Rational {
        let top = s.len().min(self.depth);
        (0..=top)
            .rev()
            .find_map(|n| self.values.get(&s.prefix(n)))
            .expect("root value is always present")
    }

    pub fn is_normed(&self) -> bool {
        self.value(&BitString::empty()).is_one()
    }

    /// Exact fairness at every node shorter than `depth`.
    pub fn check_fairness(&self) -> bool {
        self.first_unfair().is_none()
    }

    pub fn first_unfair(&self) -> Option<BitString> {
        (0..self.depth).flat_map(BitString::all_of_length).find(|s| {
            let avg = (self.value(&s.child(false)) + self.value(&s.child(true))) / Rational::from_integer(2.into());
            &avg != self.value(s)
        })
    }
}
