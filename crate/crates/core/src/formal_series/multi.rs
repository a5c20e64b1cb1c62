use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use super::Series;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Multi-index of non-negative exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

/// Serialized as its display form `(k1,k2,…)` so it can key JSON maps.
impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Serialize a map with composite keys as a sequence of `(key, value)` pairs.
pub fn serialize_entries<K, V, S>(map: &BTreeMap<K, V>, s: S) -> std::result::Result<S::Ok, S::Error>
where
    K: Serialize,
    V: Serialize,
    S: Serializer,
{
    s.collect_seq(map.iter())
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Sum of the entries in `range`.
    pub fn partial_total(&self, range: std::ops::Range<usize>) -> u32 {
        self.0[range].iter().sum()
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        self.0
            .iter()
            .zip(&o.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Concatenate two indices (e.g. `Z`-part and `U`-part).
    pub fn concat(&self, o: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        MultiIndex(v)
    }

    pub fn split(&self, at: usize) -> (Self, Self) {
        (MultiIndex(self.0[..at].to_vec()), MultiIndex(self.0[at..].to_vec()))
    }

    /// All indices of length `n` with entry sum exactly `d`.
    pub fn with_total(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if pos + 1 == n {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for k in (0..=left).rev() {
                cur[pos] = k;
                rec(pos + 1, left - k, cur, out);
            }
        }
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(0, d, &mut cur, &mut out);
        out
    }

    /// All indices with `lo ≤ |m| ≤ hi`, grouped by increasing total degree.
    pub fn with_total_between(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        (lo..=hi).flat_map(|d| Self::with_total(n, d)).collect()
    }

    /// `Π z_j^{m_j}` for complex `z`.
    pub fn monomial<T: Real>(&self, z: &[crate::scalar::Cx<T>]) -> crate::scalar::Cx<T> {
        self.0
            .iter()
            .zip(z)
            .fold(crate::scalar::cone(), |acc, (&k, zj)| acc * zj.powu(k))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which monomials a [`MultiPoly`] keeps: the first `split` variables are
/// truncated at total degree `max_head`, the rest (if bounded) at `max_tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub split: usize,
    pub max_head: u32,
    pub max_tail: Option<u32>,
}

impl Truncation {
    /// Single total-degree bound over all variables.
    pub fn total(nvars: usize, max: u32) -> Self {
        Truncation {
            split: nvars,
            max_head: max,
            max_tail: None,
        }
    }

    /// Separate bounds for head variables and trailing variables.
    pub fn graded(split: usize, max_head: u32, max_tail: u32) -> Self {
        Truncation {
            split,
            max_head,
            max_tail: Some(max_tail),
        }
    }

    pub fn allows(&self, k: &MultiIndex) -> bool {
        let head = k.partial_total(0..self.split.min(k.len()));
        if head > self.max_head {
            return false;
        }
        match self.max_tail {
            Some(t) if self.split < k.len() => k.partial_total(self.split..k.len()) <= t,
            _ => true,
        }
    }
}

/// Coefficient ring for [`MultiPoly`].
pub trait Coefficient: Clone {
    fn c_add(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
}

impl<T: Real> Coefficient for Series<T> {
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
}

macro_rules! real_coefficient {
    ($t:ty) => {
        impl Coefficient for $t {
            fn c_add(&self, o: &Self) -> Self {
                self + o
            }
            fn c_mul(&self, o: &Self) -> Self {
                self * o
            }
            fn c_neg(&self) -> Self {
                -self
            }
        }
    };
}
real_coefficient!(f32);
real_coefficient!(f64);

impl<T: Real> Coefficient for crate::scalar::Cx<T> {
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        -self
    }
}

/// Sparse polynomial in several variables with coefficients in `C`,
/// truncated according to a [`Truncation`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiPoly<C> {
    nvars: usize,
    trunc: Truncation,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coefficient> MultiPoly<C> {
    pub fn new(nvars: usize, trunc: Truncation) -> Self {
        MultiPoly {
            nvars,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Accumulate `c·Z^k`; silently dropped when `k` is truncated away.
    pub fn add_term(&mut self, k: MultiIndex, c: C) {
        debug_assert_eq!(k.len(), self.nvars);
        if !self.trunc.allows(&k) {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(slot) => *slot = slot.c_add(&c),
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn with_term(mut self, k: MultiIndex, c: C) -> Self {
        self.add_term(k, c);
        self
    }

    pub fn get(&self, k: &MultiIndex) -> Option<&C> {
        self.terms.get(k)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.c_neg());
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = MultiPoly::new(self.nvars, self.trunc);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k = k1.add(k2);
                if out.trunc.allows(&k) {
                    out.add_term(k, c1.c_mul(c2));
                }
            }
        }
        out
    }

    /// Multiply every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        MultiPoly {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.c_mul(c))).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&MultiIndex, &C) -> C) -> Self {
        MultiPoly {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), f(k, v))).collect(),
        }
    }

    pub fn retain(&mut self, f: impl Fn(&MultiIndex, &C) -> bool) {
        self.terms.retain(|k, v| f(k, v));
    }

    pub fn zero_like(&self) -> Self {
        MultiPoly::new(self.nvars, self.trunc)
    }

    /// Same terms under a different truncation; terms it excludes are dropped.
    pub fn retruncated(&self, trunc: Truncation) -> Self {
        let mut out = MultiPoly::new(self.nvars, trunc);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

/// Minimal algebra interface needed to substitute into a polynomial with
/// coefficients of type `C`.
pub trait SubstAlgebra<C>: Clone {
    fn alg_add(&self, o: &Self) -> Self;
    fn alg_mul(&self, o: &Self) -> Self;
    fn alg_scale(&self, c: &C) -> Self;
    fn alg_zero_like(&self) -> Self;
}

impl<T: Real> SubstAlgebra<Series<T>> for Series<T> {
    fn alg_add(&self, o: &Self) -> Self {
        self + o
    }
    fn alg_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn alg_scale(&self, c: &Series<T>) -> Self {
        self * c
    }
    fn alg_zero_like(&self) -> Self {
        Series::zero(self.order())
    }
}

impl<C: Coefficient> SubstAlgebra<C> for MultiPoly<C> {
    fn alg_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn alg_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn alg_scale(&self, c: &C) -> Self {
        self.scale(c)
    }
    fn alg_zero_like(&self) -> Self {
        self.zero_like()
    }
}

/// Evaluate `Σ_m c_m · args^m` where the exponent keys have `args.len()` entries.
pub fn substitute_terms<C, A>(terms: &BTreeMap<MultiIndex, C>, args: &[A]) -> Result<A>
where
    A: SubstAlgebra<C>,
{
    let first = args
        .first()
        .ok_or_else(|| Error::Shape("substitution needs at least one argument".into()))?;
    let n = args.len();
    let mut max_pow = vec![0u32; n];
    for k in terms.keys() {
        if k.len() != n {
            return Err(Error::Shape(format!(
                "exponent {k} has {} entries, expected {n}",
                k.len()
            )));
        }
        for (slot, &e) in max_pow.iter_mut().zip(k.entries()) {
            *slot = (*slot).max(e);
        }
    }
    // powers[j][e] = args[j]^e for e ≥ 1
    let powers: Vec<Vec<A>> = args
        .iter()
        .zip(&max_pow)
        .map(|(a, &mp)| {
            let mut v: Vec<A> = Vec::with_capacity(mp as usize);
            for e in 0..mp {
                if e == 0 {
                    v.push(a.clone());
                } else {
                    let next = v[e as usize - 1].alg_mul(a);
                    v.push(next);
                }
            }
            v
        })
        .collect();
    let mut acc = first.alg_zero_like();
    for (k, c) in terms {
        let mut prod: Option<A> = None;
        for (j, &e) in k.entries().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let p = &powers[j][e as usize - 1];
            prod = Some(match prod {
                None => p.clone(),
                Some(q) => q.alg_mul(p),
            });
        }
        match prod {
            Some(p) => acc = acc.alg_add(&p.alg_scale(c)),
            None => {
                return Err(Error::Precondition(
                    "constant term in a substituted polynomial".into(),
                ))
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::with_total(2, 3).len(), 4);
        assert_eq!(MultiIndex::with_total(3, 2).len(), 6);
        assert_eq!(MultiIndex::with_total_between(2, 2, 4).len(), 3 + 4 + 5);
        assert!(MultiIndex::with_total(3, 4).iter().all(|m| m.total() == 4));
    }

    #[test]
    fn truncation_rules() {
        let t = Truncation::graded(2, 3, 1);
        assert!(t.allows(&MultiIndex::new(vec![1, 2, 1])));
        assert!(!t.allows(&MultiIndex::new(vec![2, 2, 0])));
        assert!(!t.allows(&MultiIndex::new(vec![0, 0, 2])));
    }

    #[test]
    fn real_poly_product() {
        let t = Truncation::total(2, 3);
        let a = MultiPoly::<f64>::new(2, t)
            .with_term(MultiIndex::new(vec![1, 0]), 1.0)
            .with_term(MultiIndex::new(vec![0, 1]), 2.0);
        let sq = a.mul(&a);
        assert_eq!(sq.get(&MultiIndex::new(vec![1, 1])), Some(&4.0));
        let cube = sq.mul(&a).mul(&a);
        assert!(cube.is_empty());
    }
}
