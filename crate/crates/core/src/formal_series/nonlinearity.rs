use std::collections::BTreeMap;

use serde::Serialize;

use super::multi::{substitute_terms, MultiIndex, SubstAlgebra};
use super::Series;
use crate::error::{Error, Result};
use crate::scalar::{czero, Cx, Real};

/// Polynomial nonlinearity `f_i(x, Y) = Σ_{|m| ≥ 2} f_{i,m}(x) Y^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nonlinearity<T: Real> {
    n: usize,
    components: Vec<BTreeMap<MultiIndex, Series<T>>>,
}

impl<T: Real> Nonlinearity<T> {
    pub fn zero(n: usize) -> Self {
        Nonlinearity {
            n,
            components: vec![BTreeMap::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `coeff · Y^m` to component `i`.
    pub fn add_term(&mut self, i: usize, m: MultiIndex, coeff: Series<T>) -> Result<()> {
        if i >= self.n || m.len() != self.n {
            return Err(Error::Shape(format!(
                "term {m} for component {i} in a {}-dimensional nonlinearity",
                self.n
            )));
        }
        if m.total() < 2 {
            return Err(Error::Precondition(format!(
                "nonlinear term {m} has degree below 2"
            )));
        }
        let slot = self.components[i].entry(m);
        match slot {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                e.insert(sum);
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
        Ok(())
    }

    pub fn component(&self, i: usize) -> &BTreeMap<MultiIndex, Series<T>> {
        &self.components[i]
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &MultiIndex, &Series<T>)> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |(m, s)| (i, m, s)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms().all(|(_, _, s)| s.is_zero())
    }

    pub fn max_degree(&self) -> u32 {
        self.terms().map(|(_, m, _)| m.total()).max().unwrap_or(0)
    }

    /// Smallest truncation order among the coefficient series.
    pub fn min_order(&self) -> Option<usize> {
        self.terms().map(|(_, _, s)| s.order()).min()
    }

    /// Whether `f(0, Y) ≡ 0`, i.e. every coefficient vanishes at `x = 0`.
    pub fn vanishes_at_origin(&self, tol: T) -> bool {
        self.terms().all(|(_, _, s)| s.coeff(0).norm() <= tol)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Nonlinearity {
            n: self.n,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|(m, s)| (m.clone(), s.truncate(order))).collect())
                .collect(),
        }
    }

    pub fn map_series(&self, f: impl Fn(&Series<T>) -> Result<Series<T>>) -> Result<Self> {
        let mut components = Vec::with_capacity(self.n);
        for c in &self.components {
            let mut out = BTreeMap::new();
            for (m, s) in c {
                out.insert(m.clone(), f(s)?);
            }
            components.push(out);
        }
        Ok(Nonlinearity {
            n: self.n,
            components,
        })
    }

    /// Drop terms whose coefficient series are identically zero.
    pub fn pruned(mut self) -> Self {
        for c in self.components.iter_mut() {
            c.retain(|_, s| !s.is_zero());
        }
        self
    }

    /// Numerical value at `(x, y)` treating coefficient series as polynomials.
    pub fn eval(&self, x: Cx<T>, y: &[Cx<T>]) -> Vec<Cx<T>> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(m, s)| s.eval(x) * m.monomial(y))
                    .fold(czero(), |a, b| a + b)
            })
            .collect()
    }

    /// Jacobian `∂f_i/∂y_j` at `(x, y)`.
    pub fn jacobian(&self, x: Cx<T>, y: &[Cx<T>]) -> Vec<Vec<Cx<T>>> {
        let mut jac = vec![vec![czero(); self.n]; self.n];
        for (i, m, s) in self.terms() {
            let c = s.eval(x);
            for j in 0..self.n {
                let e = m.entries()[j];
                if e == 0 {
                    continue;
                }
                let mut d = m.entries().to_vec();
                d[j] -= 1;
                let mono = MultiIndex::new(d).monomial(y);
                jac[i][j] += c * mono * T::from_u32(e).unwrap();
            }
        }
        jac
    }
}

/// Substitute series-valued arguments into every component of `f`.
pub fn substitute_nonlinearity<T, A>(f: &Nonlinearity<T>, args: &[A]) -> Result<Vec<A>>
where
    T: Real,
    A: SubstAlgebra<Series<T>>,
{
    if args.len() != f.n {
        return Err(Error::Shape(format!(
            "nonlinearity of dimension {} applied to {} arguments",
            f.n,
            args.len()
        )));
    }
    f.components
        .iter()
        .map(|c| substitute_terms(c, args))
        .collect()
}

/// Table `p ↦ (C_{1,p}(x), …, C_{n,p}(x))` for `2 ≤ |p| ≤ max_total_degree`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffTable<T: Real> {
    n: usize,
    n_sub: usize,
    max_total_degree: u32,
    entries: BTreeMap<MultiIndex, Vec<Series<T>>>,
}

impl<T: Real> CoeffTable<T> {
    pub fn new(n: usize, n_sub: usize, max_total_degree: u32) -> Self {
        CoeffTable {
            n,
            n_sub,
            max_total_degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sub_dim(&self) -> usize {
        self.n_sub
    }

    pub fn max_total_degree(&self) -> u32 {
        self.max_total_degree
    }

    pub fn insert(&mut self, p: MultiIndex, values: Vec<Series<T>>) -> Result<()> {
        if p.len() != self.n_sub || values.len() != self.n {
            return Err(Error::Shape(format!("table entry {p} has wrong shape")));
        }
        if p.total() < 2 || p.total() > self.max_total_degree {
            return Err(Error::Precondition(format!(
                "table key {p} outside 2 ≤ |p| ≤ {}",
                self.max_total_degree
            )));
        }
        self.entries.insert(p, values);
        Ok(())
    }

    pub fn get(&self, p: &MultiIndex) -> Option<&Vec<Series<T>>> {
        self.entries.get(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<Series<T>>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Keep only entries with at least one nonzero coefficient.
    pub fn pruned(mut self) -> Self {
        self.entries.retain(|_, v| v.iter().any(|s| !s.is_zero()));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_series::{MultiPoly, Truncation};
    use crate::scalar::cx;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[f64]) -> Series<f64> {
        Series::from_real(v).unwrap()
    }

    #[test]
    fn direct_square() {
        let mut f = Nonlinearity::zero(1);
        f.add_term(0, MultiIndex::new(vec![2]), Series::one(3)).unwrap();
        let out = substitute_nonlinearity(&f, &[s(&[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert_eq!(out[0], s(&[0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn zero_arguments_give_zero() {
        let mut f = Nonlinearity::zero(2);
        f.add_term(0, MultiIndex::new(vec![1, 1]), s(&[1.0, 2.0, 3.0])).unwrap();
        f.add_term(1, MultiIndex::new(vec![0, 3]), s(&[0.5, 0.0, 1.0])).unwrap();
        let out = substitute_nonlinearity(&f, &[Series::zero(2), Series::zero(2)]).unwrap();
        assert!(out.iter().all(|o| o.is_zero()));
    }

    #[test]
    fn mixed_product_term() {
        let mut f = Nonlinearity::zero(2);
        f.add_term(1, MultiIndex::new(vec![1, 1]), s(&[0.0, 1.0, 0.0])).unwrap();
        let out = substitute_nonlinearity(&f, &[Series::one(2), s(&[0.0, 1.0, 0.0])]).unwrap();
        assert!(out[0].is_zero());
        assert_eq!(out[1], s(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn shape_errors() {
        let f = Nonlinearity::<f64>::zero(2);
        assert!(matches!(
            substitute_nonlinearity(&f, &[Series::zero(2)]),
            Err(Error::Shape(_))
        ));
        let mut g = Nonlinearity::<f64>::zero(1);
        assert!(g.add_term(0, MultiIndex::new(vec![1]), Series::one(1)).is_err());
    }

    #[test]
    fn multipoly_arguments() {
        // f = y1^2 with y1 = z (coefficient 1) + x z^2
        let mut f = Nonlinearity::zero(1);
        f.add_term(0, MultiIndex::new(vec![2]), Series::one(4)).unwrap();
        let t = Truncation::total(1, 4);
        let y = MultiPoly::new(1, t)
            .with_term(MultiIndex::new(vec![1]), Series::one(4))
            .with_term(MultiIndex::new(vec![2]), s(&[0.0, 1.0, 0.0, 0.0, 0.0]));
        let out = substitute_nonlinearity(&f, &[y]).unwrap();
        let z3 = out[0].get(&MultiIndex::new(vec![3])).unwrap();
        assert_eq!(z3.coeff(1), cx(2.0, 0.0));
        let z4 = out[0].get(&MultiIndex::new(vec![4])).unwrap();
        assert_eq!(z4.coeff(2), cx(1.0, 0.0));
    }

    /// Independent expansion: multiply factors one at a time without a power cache.
    fn naive(f: &Nonlinearity<f64>, y: &[Series<f64>]) -> Vec<Series<f64>> {
        let order = y.iter().map(|s| s.order()).min().unwrap();
        (0..f.dim())
            .map(|i| {
                let mut acc = Series::zero(order);
                for (m, c) in f.component(i) {
                    let mut term = c.truncate(order);
                    for (j, &e) in m.entries().iter().enumerate() {
                        for _ in 0..e {
                            let mut next = Series::zero(order);
                            let mut v = next.clone().into_coeffs();
                            for a in 0..=order {
                                for b in 0..=order - a {
                                    v[a + b] += term.coeff(a) * y[j].coeff(b);
                                }
                            }
                            next = Series::new(v).unwrap();
                            term = next;
                        }
                    }
                    acc = &acc + &term;
                }
                acc
            })
            .collect()
    }

    proptest! {
        #[test]
        fn agrees_with_naive_expansion(seed in 0u64..1000, n in 1usize..4, ny in 2u32..5, nx in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = Nonlinearity::zero(n);
            for i in 0..n {
                for m in MultiIndex::with_total_between(n, 2, ny) {
                    if rng.gen_bool(0.5) {
                        let c: Vec<Cx<f64>> = (0..=nx).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                        f.add_term(i, m, Series::new(c).unwrap()).unwrap();
                    }
                }
            }
            let y: Vec<Series<f64>> = (0..n)
                .map(|_| Series::new((0..=nx).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap())
                .collect();
            let fast = substitute_nonlinearity(&f, &y).unwrap();
            let slow = naive(&f, &y);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!(a.approx_eq(b, 1e-12), "{a} vs {b}");
            }
        }
    }
}
