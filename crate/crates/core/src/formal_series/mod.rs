//! Truncated complex power series, multi-indexed coefficient tables and
//! substitution into polynomial nonlinearities.
//!
//! A [`Series`] stores the coefficients of `x^0 ..= x^N`; everything beyond
//! `N` is unknown. Binary operations therefore truncate at the smaller order.

mod matrix;
mod multi;
mod nonlinearity;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{czero, from_usize, is_finite_c, lit, Cx, Real};

pub use matrix::MatSeries;
pub use multi::{serialize_entries, substitute_terms, Coefficient, MultiIndex, MultiPoly, SubstAlgebra, Truncation};
pub use nonlinearity::{substitute_nonlinearity, CoeffTable, Nonlinearity};

/// Truncated power series `Σ_{m ≤ N} c_m x^m` with complex coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series<T: Real> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> Series<T> {
    /// Build from coefficients `c_0..=c_N`; rejects empty input and non-finite values.
    pub fn new(coeffs: Vec<Cx<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DegenerateOrder("series needs at least one coefficient".into()));
        }
        if let Some(m) = coeffs.iter().position(|c| !is_finite_c(*c)) {
            return Err(Error::Precondition(format!("non-finite coefficient at x^{m}")));
        }
        Ok(Series { coeffs })
    }

    pub(crate) fn from_vec(coeffs: Vec<Cx<T>>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Series { coeffs }
    }

    /// Real coefficients, convenient for tests and presets.
    pub fn from_real(coeffs: &[T]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Cx::new(c, T::zero())).collect())
    }

    /// A polynomial whose coefficients are known exactly, padded to `order`.
    pub fn polynomial(coeffs: &[Cx<T>], order: usize) -> Result<Self> {
        if coeffs.len() > order + 1 && coeffs[order + 1..].iter().any(|c| *c != czero()) {
            return Err(Error::DegenerateOrder(format!(
                "polynomial of degree {} does not fit order {order}",
                coeffs.len() - 1
            )));
        }
        let mut v = vec![czero(); order + 1];
        for (slot, c) in v.iter_mut().zip(coeffs) {
            *slot = *c;
        }
        Self::new(v)
    }

    pub fn zero(order: usize) -> Self {
        Series {
            coeffs: vec![czero(); order + 1],
        }
    }

    pub fn constant(c: Cx<T>, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Cx::new(T::one(), T::zero()), order)
    }

    /// `c·x^power` known through `order`.
    pub fn monomial(c: Cx<T>, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Cx<T>> {
        self.coeffs
    }

    /// Coefficient of `x^m`; panics beyond the truncation order.
    pub fn coeff(&self, m: usize) -> Cx<T> {
        self.coeffs[m]
    }

    pub fn get(&self, m: usize) -> Option<Cx<T>> {
        self.coeffs.get(m).copied()
    }

    /// Drop information beyond `order` (no-op if already shorter).
    pub fn truncate(&self, order: usize) -> Self {
        let k = order.min(self.order());
        Series {
            coeffs: self.coeffs[..=k].to_vec(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == czero())
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != czero())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Cx<T>) -> Cx<T>) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|c| f(*c)).collect(),
        }
    }

    /// Multiply by `x^k`; the result is known `k` orders further.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut v = vec![czero(); k];
        v.extend_from_slice(&self.coeffs);
        Series { coeffs: v }
    }

    /// Divide by `x^k`; the first `k` coefficients must vanish up to
    /// `tol` relative to the largest coefficient.
    pub fn shift_down(&self, k: usize, tol: T) -> Result<Self> {
        if k > self.order() {
            return Err(Error::DegenerateOrder(format!(
                "cannot divide order-{} series by x^{k}",
                self.order()
            )));
        }
        let scale = self.max_abs().max(T::one());
        if let Some(m) = self.coeffs[..k].iter().position(|c| c.norm() > tol * scale) {
            return Err(Error::Precondition(format!(
                "division by x^{k} of a series with nonzero x^{m} coefficient"
            )));
        }
        Ok(Series {
            coeffs: self.coeffs[k..].to_vec(),
        })
    }

    /// `x^{1+γ} f′`: the coefficient of `x^m` is `(m−γ)·f_{m−γ}`. The
    /// truncation order is kept.
    pub fn euler_apply(&self, gamma: u32) -> Result<Self> {
        let g = gamma as usize;
        if self.order() < g {
            return Err(Error::DegenerateOrder(format!(
                "euler operator of rank {gamma} needs order ≥ {gamma}, got {}",
                self.order()
            )));
        }
        let mut out = vec![czero(); self.coeffs.len()];
        for m in g + 1..out.len() {
            out[m] = self.coeffs[m - g] * from_usize::<T>(m - g);
        }
        Ok(Series { coeffs: out })
    }

    /// Formal derivative; the order drops by one (order-0 input gives the zero constant).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Series::zero(0);
        }
        Series {
            coeffs: (1..self.coeffs.len())
                .map(|m| self.coeffs[m] * from_usize::<T>(m))
                .collect(),
        }
    }

    /// Evaluate the truncated polynomial.
    pub fn eval(&self, x: Cx<T>) -> Cx<T> {
        self.coeffs.iter().rev().fold(czero(), |acc, c| acc * x + c)
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() <= T::epsilon() * self.max_abs() || c0 == czero() {
            return Err(Error::Singular("series inverse with vanishing constant term".into()));
        }
        let n = self.coeffs.len();
        let mut inv = vec![czero(); n];
        inv[0] = c0.inv();
        for m in 1..n {
            let mut acc: Cx<T> = czero();
            for k in 1..=m {
                acc += self.coeffs[k] * inv[m - k];
            }
            inv[m] = -acc * inv[0];
        }
        Ok(Series { coeffs: inv })
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Series::one(self.order());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Largest coefficient difference, relative to `max(1, |·|)` of the operands.
    pub fn rel_diff(&self, other: &Self) -> T {
        let n = self.order().min(other.order());
        let scale = self.max_abs().max(other.max_abs()).max(T::one());
        (0..=n)
            .map(|m| (self.coeffs[m] - other.coeffs[m]).norm())
            .fold(T::zero(), T::max)
            / scale
    }

    /// Approximate equality on the common orders, relative tolerance.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.rel_diff(other) <= tol
    }
}

impl<T: Real> fmt::Display for Series<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate() {
            if *c == czero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)x^{m}", c.re, c.im)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

impl<'a, T: Real> Add<&'a Series<T>> for &'a Series<T> {
    type Output = Series<T>;
    fn add(self, o: &Series<T>) -> Series<T> {
        Series {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a, T: Real> Sub<&'a Series<T>> for &'a Series<T> {
    type Output = Series<T>;
    fn sub(self, o: &Series<T>) -> Series<T> {
        Series {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a, T: Real> Mul<&'a Series<T>> for &'a Series<T> {
    type Output = Series<T>;
    fn mul(self, o: &Series<T>) -> Series<T> {
        let n = self.coeffs.len().min(o.coeffs.len());
        let mut out = vec![czero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if *a == czero() {
                continue;
            }
            for (j, b) in o.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Series { coeffs: out }
    }
}

impl<T: Real> Neg for &Series<T> {
    type Output = Series<T>;
    fn neg(self) -> Series<T> {
        self.map(|c| -c)
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl<T: Real> $tr<Series<T>> for Series<T> {
            type Output = Series<T>;
            fn $m(self, o: Series<T>) -> Series<T> {
                (&self).$m(&o)
            }
        }
        impl<'a, T: Real> $tr<&'a Series<T>> for Series<T> {
            type Output = Series<T>;
            fn $m(self, o: &Series<T>) -> Series<T> {
                (&self).$m(o)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<T: Real> Neg for Series<T> {
    type Output = Series<T>;
    fn neg(self) -> Series<T> {
        -&self
    }
}

/// Sum of a non-empty list of series.
pub fn sum_series<'a, T: Real>(items: impl IntoIterator<Item = &'a Series<T>>, order: usize) -> Series<T> {
    items
        .into_iter()
        .fold(Series::zero(order), |acc, s| &acc + s)
}

/// Relative tolerance used when checking that leading coefficients vanish.
pub fn vanishing_tol<T: Real>() -> T {
    lit(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Series<f64> {
        Series::from_real(v).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!((&s(&[1.0, 1.0]) + &s(&[1.0, -1.0])).coeffs(), s(&[2.0, 0.0]).coeffs());
        let f = s(&[0.3, -1.0, 2.0]);
        assert_eq!(&Series::zero(2) + &f, f);
        assert_eq!(&s(&[0.0, 1.0, 2.0]) + &s(&[0.0, 0.0, 3.0]), s(&[0.0, 1.0, 5.0]));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&s(&[1.0, 1.0, 0.0]) * &s(&[1.0, -1.0, 0.0]), s(&[1.0, 0.0, -1.0]));
        let f = s(&[0.5, 2.0, -1.0]);
        assert_eq!(&f * &Series::one(2), f);
        assert!((&s(&[0.0, 1.0]) * &s(&[0.0, 1.0])).is_zero());
    }

    #[test]
    fn truncation_is_min_order() {
        let a = s(&[1.0, 2.0, 3.0, 4.0]);
        let b = s(&[1.0, 1.0]);
        assert_eq!((&a + &b).order(), 1);
        assert_eq!((&a * &b).order(), 1);
    }

    #[test]
    fn euler_examples() {
        assert_eq!(s(&[0.0, 1.0, 0.0]).euler_apply(1).unwrap(), s(&[0.0, 0.0, 1.0]));
        assert!(s(&[1.0, 0.0, 0.0, 0.0]).euler_apply(3).unwrap().is_zero());
        let f = Series::monomial(cx(1.0, 0.0), 2, 6);
        assert_eq!(f.euler_apply(3).unwrap(), Series::monomial(cx(2.0, 0.0), 5, 6));
        assert!(matches!(s(&[1.0, 2.0]).euler_apply(3), Err(Error::DegenerateOrder(_))));
    }

    #[test]
    fn recip_and_shift() {
        let f = s(&[1.0, -1.0, 0.0, 0.0]);
        let g = f.recip().unwrap();
        assert_eq!(g, s(&[1.0, 1.0, 1.0, 1.0]));
        let h = s(&[0.0, 0.0, 3.0, 4.0]).shift_down(2, 1e-12).unwrap();
        assert_eq!(h, s(&[3.0, 4.0]));
        assert!(s(&[1.0, 0.0]).shift_down(1, 1e-12).is_err());
        assert!(Series::new(vec![cx(f64::NAN, 0.0)]).is_err());
    }

    fn arb_series(n: usize) -> impl Strategy<Value = Series<f64>> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
            .prop_map(|v| Series::new(v.into_iter().map(|(a, b)| cx(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_series(8), b in arb_series(8), c in arb_series(8)) {
            let tol = 1e-13;
            prop_assert!(((&a * &b) * &c).approx_eq(&(&a * &(&b * &c)), tol * 50.0));
            prop_assert!((&a * &b).approx_eq(&(&b * &a), tol));
            prop_assert!((&a * &(&b + &c)).approx_eq(&(&(&a * &b) + &(&a * &c)), tol * 10.0));
            prop_assert!((&a + &b).approx_eq(&(&b + &a), 0.0));
        }

        #[test]
        fn euler_is_linear(a in arb_series(8), b in arb_series(8), g in 1u32..4, al in -3.0f64..3.0, be in -3.0f64..3.0) {
            let lhs = (&a.scale(cx(al, 0.0)) + &b.scale(cx(be, 0.0))).euler_apply(g).unwrap();
            let rhs = &a.euler_apply(g).unwrap().scale(cx(al, 0.0)) + &b.euler_apply(g).unwrap().scale(cx(be, 0.0));
            prop_assert!(lhs.approx_eq(&rhs, 1e-14));
        }
    }
}
