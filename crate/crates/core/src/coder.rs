//! Prefix-free machines, Kraft–Chaitin allocation, and the passage between
//! machines and summable dyadic functions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::de::DeserializeOwned;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::{pairing, unpair};
use crate::space::rational::{ceil_neg_log2, format, pow2, pow2_neg, serde_rational, serde_rational_map, Rational};
use crate::space::BitString;

/// A finite prefix-free machine: program ↦ output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine<T> {
    table: BTreeMap<BitString, T>,
}

impl<T: Clone + Ord> Machine<T> {
    pub fn new(table: BTreeMap<BitString, T>) -> Result<Self> {
        crate::space::PrefixFreeSet::new(table.keys().cloned())?;
        Ok(Machine { table })
    }

    pub fn empty() -> Self {
        Machine { table: BTreeMap::new() }
    }

    pub fn table(&self) -> &BTreeMap<BitString, T> {
        &self.table
    }

    pub fn run(&self, p: &BitString) -> Option<&T> {
        self.table.get(p)
    }

    pub fn domain_measure(&self) -> Rational {
        self.table.keys().map(|p| pow2_neg(p.len())).sum()
    }

    /// `K_M(σ)`: the shortest program printing σ.
    pub fn complexity(&self, target: &T) -> Option<usize> {
        self.table.iter().filter(|(_, v)| *v == target).map(|(p, _)| p.len()).min()
    }

    pub fn range(&self) -> BTreeSet<T> {
        self.table.values().cloned().collect()
    }
}

impl<T: Serialize> Serialize for Machine<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Machine", 1)?;
        st.serialize_field("table", &self.table)?;
        st.end()
    }
}

impl<'de, T: DeserializeOwned + Clone + Ord> Deserialize<'de> for Machine<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: DeserializeOwned")]
        struct Raw<T> {
            table: BTreeMap<BitString, T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        Machine::new(raw.table).map_err(serde::de::Error::custom)
    }
}

/// Requests `(k, σ)`: a program of length exactly `k` printing σ.
pub type KcRequestList<T> = Vec<(usize, T)>;

pub fn kc_weight<T>(requests: &[(usize, T)]) -> Rational {
    requests.iter().map(|(k, _)| pow2_neg(*k)).sum()
}

/// Serves requests in order. Each takes the smallest free dyadic block that
/// fits, using its leftmost piece and returning the rest to the free list.
pub fn kc_build<T: Clone + Ord>(requests: &[(usize, T)]) -> Result<Machine<T>> {
    let w = kc_weight(requests);
    if w > Rational::from_integer(1.into()) {
        return Err(Error::WeightOverflow(format(&w)));
    }
    let mut free: BTreeSet<BitString> = BTreeSet::from([BitString::empty()]);
    let mut table = BTreeMap::new();
    for (k, target) in requests {
        let block = free
            .iter()
            .filter(|b| b.len() <= *k)
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
            .cloned()
            .expect("admissible weight leaves a fitting block");
        free.remove(&block);
        let mut code = block;
        while code.len() < *k {
            free.insert(code.child(true));
            code.push(false);
        }
        table.insert(code, target.clone());
    }
    Ok(Machine { table })
}

/// A nonnegative function with finite support and exact rational values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicFunction<K> {
    values: BTreeMap<K, Rational>,
}

impl<K: Ord + Clone> DyadicFunction<K> {
    pub fn new(values: BTreeMap<K, Rational>) -> Result<Self> {
        if let Some(v) = values.values().find(|v| v.is_negative()) {
            return Err(Error::InvalidRational(format!("negative value {}", format(v))));
        }
        Ok(DyadicFunction { values })
    }

    pub fn zero() -> Self {
        DyadicFunction { values: BTreeMap::new() }
    }

    pub fn values(&self) -> &BTreeMap<K, Rational> {
        &self.values
    }

    pub fn get(&self, k: &K) -> Rational {
        self.values.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn sum(&self) -> Rational {
        self.values.values().sum()
    }

    /// Drops explicit zeros.
    pub fn support(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.values.iter().filter(|(_, v)| !v.is_zero())
    }
}

impl<K: Serialize + Ord + Clone> Serialize for DyadicFunction<K> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Values<'a, K>(&'a BTreeMap<K, Rational>);
        impl<K: Serialize> Serialize for Values<'_, K> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                serde_rational_map::serialize(self.0, s)
            }
        }
        let mut st = s.serialize_struct("DyadicFunction", 2)?;
        st.serialize_field("values", &Values(&self.values))?;
        st.serialize_field("sum", &format(&self.sum()))?;
        st.end()
    }
}

impl<'de, K: DeserializeOwned + Ord + Clone> Deserialize<'de> for DyadicFunction<K> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "K: DeserializeOwned + Ord")]
        struct Raw<K> {
            #[serde(with = "serde_rational_map")]
            values: BTreeMap<K, Rational>,
        }
        let raw = Raw::<K>::deserialize(d)?;
        DyadicFunction::new(raw.values).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MachineSeries<T: Serialize + Ord + Clone> {
    pub f: DyadicFunction<T>,
    #[serde(with = "serde_rational")]
    pub domain_measure: Rational,
    /// Σf ≤ μ(dom M), with equality when no output has two programs.
    pub sum_le_domain: bool,
}

/// `f(σ) = 2^{-K_M(σ)}` on the range of M.
pub fn machine_to_f<T: Clone + Ord + Serialize>(m: &Machine<T>) -> MachineSeries<T> {
    let values = m
        .range()
        .into_iter()
        .map(|t| {
            let k = m.complexity(&t).expect("value in range");
            (t, pow2_neg(k))
        })
        .collect();
    let f = DyadicFunction { values };
    let domain_measure = m.domain_measure();
    MachineSeries { sum_le_domain: f.sum() <= domain_measure, f, domain_measure }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplexityBound<T> {
    pub target: T,
    #[serde(with = "serde_rational")]
    pub g: Rational,
    pub complexity: usize,
    /// ⌈−log₂ g⌉ + c + 1.
    pub bound: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GMachineReport<T: Serialize> {
    pub c: usize,
    pub requests: Vec<(usize, T)>,
    #[serde(with = "serde_rational")]
    pub weight: Rational,
    pub machine: Machine<T>,
    pub bounds: Vec<ComplexityBound<T>>,
    pub pass: bool,
}

/// One request per support element, at the least `k` with `g ≥ 2^{-k+c+1}`.
pub fn g_to_machine<T: Clone + Ord + Serialize>(g: &DyadicFunction<T>, c: usize) -> Result<GMachineReport<T>> {
    let s = g.sum();
    if s > pow2(c) {
        return Err(Error::WeightOverflow(format!(
            "sum {} exceeds 2^{c}; try c = {}",
            format(&s),
            c + 1
        )));
    }
    let requests: Vec<(usize, T)> = g
        .support()
        .map(|(t, v)| {
            let k = ceil_neg_log2(v) + c as i64 + 1;
            (usize::try_from(k).expect("g <= 2^c forces k >= 1"), t.clone())
        })
        .collect();
    let weight = kc_weight(&requests);
    let machine = kc_build(&requests)?;
    let bounds: Vec<ComplexityBound<T>> = g
        .support()
        .map(|(t, v)| {
            let complexity = machine.complexity(t).expect("every request is served");
            let bound = ceil_neg_log2(v) + c as i64 + 1;
            ComplexityBound { target: t.clone(), g: v.clone(), complexity, bound, pass: complexity as i64 <= bound }
        })
        .collect();
    let pass = weight <= Rational::from_integer(1.into()) && bounds.iter().all(|b| b.pass);
    Ok(GMachineReport { c, requests, weight, machine, bounds, pass })
}

/// Splits a staged, nondecreasing function into its stagewise increments,
/// the increment of index `i` at stage `t` stored at `⟨i, t⟩`.
pub fn flatten_leftce(stages: &[BTreeMap<usize, Rational>]) -> Result<DyadicFunction<usize>> {
    let mut out = BTreeMap::new();
    let zero = Rational::zero();
    let indices: BTreeSet<usize> = stages.iter().flat_map(|s| s.keys().copied()).collect();
    for &i in &indices {
        let mut prev = &zero;
        for (t, stage) in stages.iter().enumerate() {
            let cur = stage.get(&i).unwrap_or(&zero);
            if cur < prev {
                return Err(Error::NonMonotone(format!(
                    "f({i}) drops from {} to {} at stage {t}",
                    format(prev),
                    format(cur)
                )));
            }
            if cur > prev {
                out.insert(pairing(i, t), cur - prev);
            }
            prev = cur;
        }
    }
    DyadicFunction::new(out)
}

/// `g(i) = Σ_t h(⟨i, t⟩)`.
pub fn aggregate(h: &DyadicFunction<usize>) -> DyadicFunction<usize> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (&m, v) in h.values() {
        let (i, _) = unpair(m);
        *out.entry(i).or_insert_with(Rational::zero) += v;
    }
    DyadicFunction { values: out }
}

/// Raises `f(0)` so the total becomes exactly `n`.
pub fn normalize_sum(f: &DyadicFunction<usize>, n: &Rational) -> Result<DyadicFunction<usize>> {
    let s = f.sum();
    if *n < s {
        return Err(Error::NTooSmall { target: format(n), sum: format(&s) });
    }
    let mut values = f.values.clone();
    *values.entry(0).or_insert_with(Rational::zero) += n - &s;
    Ok(DyadicFunction { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::rational::{int, ratio};

    fn req(list: &[(usize, &str)]) -> Vec<(usize, String)> {
        list.iter().map(|(k, s)| (*k, s.to_string())).collect()
    }

    fn codes(m: &Machine<String>) -> Vec<(String, String)> {
        m.table().iter().map(|(p, t)| (p.to_string(), t.clone())).collect()
    }

    #[test]
    fn kc_examples() {
        let m = kc_build(&req(&[(1, "a"), (2, "b"), (2, "c")])).unwrap();
        let want = [("0", "a"), ("10", "b"), ("11", "c")].map(|(p, t)| (p.to_string(), t.to_string()));
        assert_eq!(codes(&m), want);
        assert!(kc_build::<String>(&[]).unwrap().table().is_empty());
        assert!(matches!(kc_build(&req(&[(1, "a"), (1, "b"), (1, "c")])), Err(Error::WeightOverflow(_))));
    }

    #[test]
    fn complexity_examples() {
        let m = kc_build(&req(&[(1, "a"), (2, "b"), (2, "c")])).unwrap();
        assert_eq!(m.complexity(&"a".to_string()), Some(1));
        assert_eq!(m.complexity(&"z".to_string()), None);
        let m = kc_build(&req(&[(5, "s"), (3, "s")])).unwrap();
        assert_eq!(m.complexity(&"s".to_string()), Some(3));
    }

    #[test]
    fn machine_to_f_examples() {
        let m = Machine::new(BTreeMap::from([("0".into(), "a".to_string())])).unwrap();
        assert_eq!(machine_to_f(&m).f.get(&"a".to_string()), ratio(1, 2));
        let m = Machine::new(BTreeMap::from([("0".into(), "a".to_string()), ("10".into(), "a".to_string())])).unwrap();
        let r = machine_to_f(&m);
        assert_eq!((r.f.sum(), r.domain_measure), (ratio(1, 2), ratio(3, 4)));
        assert!(machine_to_f(&Machine::<String>::empty()).f.values().is_empty());
    }

    #[test]
    fn g_to_machine_examples() {
        let g = DyadicFunction::new(BTreeMap::from([("a".to_string(), ratio(1, 2))])).unwrap();
        let r = g_to_machine(&g, 0).unwrap();
        assert_eq!(r.requests, vec![(2, "a".to_string())]);
        assert!(r.pass);
        assert!(g_to_machine(&DyadicFunction::<String>::zero(), 0).unwrap().machine.table().is_empty());
        let g = DyadicFunction::new(BTreeMap::from([("a".to_string(), ratio(1, 4)), ("b".to_string(), ratio(1, 4))])).unwrap();
        let r = g_to_machine(&g, 0).unwrap();
        assert_eq!(r.requests.iter().map(|(k, _)| *k).collect::<Vec<_>>(), [3, 3]);
        assert_eq!(r.weight, ratio(1, 4));
        let heavy = DyadicFunction::new(BTreeMap::from([("a".to_string(), int(1)), ("b".to_string(), int(1))])).unwrap();
        assert!(matches!(g_to_machine(&heavy, 0), Err(Error::WeightOverflow(_))));
    }

    #[test]
    fn flatten_examples() {
        let stages = vec![
            BTreeMap::from([(0, int(0))]),
            BTreeMap::from([(0, ratio(1, 4))]),
            BTreeMap::from([(0, ratio(1, 2))]),
        ];
        let h = flatten_leftce(&stages).unwrap();
        assert_eq!(h.values().values().cloned().collect::<Vec<_>>(), [ratio(1, 4), ratio(1, 4)]);
        assert_eq!(aggregate(&h).get(&0), ratio(1, 2));
        let flat = vec![BTreeMap::from([(0, ratio(1, 2)), (3, ratio(1, 8))]); 3];
        assert_eq!(flatten_leftce(&flat).unwrap().values().len(), 2);
        assert!(flatten_leftce(&[]).unwrap().values().is_empty());
        let drop = vec![BTreeMap::from([(0, ratio(1, 2))]), BTreeMap::from([(0, ratio(1, 4))])];
        assert!(matches!(flatten_leftce(&drop), Err(Error::NonMonotone(_))));
    }

    #[test]
    fn normalize_examples() {
        let f = DyadicFunction::new(BTreeMap::from([(0, ratio(1, 4)), (1, ratio(1, 8))])).unwrap();
        let g = normalize_sum(&f, &int(1)).unwrap();
        assert_eq!((g.get(&0), g.get(&1)), (ratio(7, 8), ratio(1, 8)));
        assert_eq!(normalize_sum(&f, &ratio(3, 8)).unwrap(), f);
        assert_eq!(normalize_sum(&DyadicFunction::zero(), &int(1)).unwrap().get(&0), int(1));
        assert!(matches!(normalize_sum(&f, &ratio(1, 8)), Err(Error::NTooSmall { .. })));
    }

}
