use serde::Serialize;

use super::Series;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{czero, from_usize, Cx, Real};

/// Matrix-valued truncated power series `Σ_m M_m x^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatSeries<T: Real> {
    rows: usize,
    cols: usize,
    coeffs: Vec<CMat<T>>,
}

impl<T: Real> MatSeries<T> {
    pub fn zero(rows: usize, cols: usize, order: usize) -> Self {
        MatSeries {
            rows,
            cols,
            coeffs: vec![CMat::zeros(rows, cols); order + 1],
        }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        Self::constant(CMat::identity(n), order)
    }

    pub fn constant(m: CMat<T>, order: usize) -> Self {
        let mut s = Self::zero(m.rows(), m.cols(), order);
        s.coeffs[0] = m;
        s
    }

    /// Build from matrix coefficients `M_0..=M_N`.
    pub fn from_coeffs(coeffs: Vec<CMat<T>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::DegenerateOrder("empty matrix series".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if coeffs.iter().any(|c| c.rows() != rows || c.cols() != cols) {
            return Err(Error::Shape("matrix series coefficients disagree in shape".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("non-finite matrix series coefficient".into()));
        }
        Ok(MatSeries { rows, cols, coeffs })
    }

    /// Build from entry series; the order is the smallest entry order.
    pub fn from_entries(entries: &[Vec<Series<T>>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("matrix series entries are ragged or empty".into()));
        }
        let order = entries.iter().flatten().map(|s| s.order()).min().unwrap_or(0);
        let coeffs = (0..=order)
            .map(|m| CMat::from_fn(rows, cols, |i, j| entries[i][j].coeff(m)))
            .collect();
        Ok(MatSeries { rows, cols, coeffs })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, m: usize) -> &CMat<T> {
        &self.coeffs[m]
    }

    pub fn coeffs(&self) -> &[CMat<T>] {
        &self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> Series<T> {
        Series::from_vec(self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    pub fn entries(&self) -> Vec<Vec<Series<T>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.max_abs()).fold(T::zero(), T::max)
    }

    pub fn add(&self, o: &Self) -> Self {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len().min(o.coeffs.len());
        let mut out = vec![CMat::zeros(self.rows, o.cols); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.max_abs() == T::zero() {
                continue;
            }
            for (j, b) in o.coeffs[..n - i].iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        MatSeries {
            rows: self.rows,
            cols: o.cols,
            coeffs: out,
        }
    }

    /// Matrix series times a vector of series.
    pub fn mul_vec(&self, v: &[Series<T>]) -> Result<Vec<Series<T>>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix series times {}-vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let order = v.iter().map(|s| s.order()).min().unwrap_or(0).min(self.order());
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Series::zero(order);
                for (j, vj) in v.iter().enumerate() {
                    acc = &acc + &(&self.entry(i, j) * vj);
                }
                acc
            })
            .collect())
    }

    /// Inverse of a square matrix series with invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("inverse of non-square matrix series".into()));
        }
        let inv0 = self.coeffs[0].inverse()?;
        let mut out = vec![inv0.clone()];
        for m in 1..self.coeffs.len() {
            let mut acc = CMat::zeros(self.rows, self.cols);
            for k in 1..=m {
                acc = acc.add(&self.coeffs[k].mul(&out[m - k]));
            }
            out.push(inv0.mul(&acc).scale(-crate::scalar::cone::<T>()));
        }
        Ok(MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: out,
        })
    }

    /// `x^{1+γ} M′`, keeping the truncation order.
    pub fn euler_apply(&self, gamma: u32) -> Result<Self> {
        let g = gamma as usize;
        if self.order() < g {
            return Err(Error::DegenerateOrder(format!(
                "matrix euler operator of rank {gamma} on order {}",
                self.order()
            )));
        }
        let mut out = vec![CMat::zeros(self.rows, self.cols); self.coeffs.len()];
        for m in g + 1..out.len() {
            out[m] = self.coeffs[m - g].scale(Cx::new(from_usize::<T>(m - g), T::zero()));
        }
        Ok(MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: out,
        })
    }

    /// Multiply by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![CMat::zeros(self.rows, self.cols); k];
        coeffs.extend(self.coeffs.iter().cloned());
        MatSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    /// Numerical value of the truncated polynomial at `x`.
    pub fn eval(&self, x: Cx<T>) -> CMat<T> {
        let mut acc = CMat::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(x).add(c);
        }
        acc
    }

    /// Conjugate by constant matrices: `left · self · right`.
    pub fn sandwich(&self, left: &CMat<T>, right: &CMat<T>) -> Self {
        MatSeries {
            rows: left.rows(),
            cols: right.cols(),
            coeffs: self.coeffs.iter().map(|c| left.mul(c).mul(right)).collect(),
        }
    }

    /// Largest off-diagonal magnitude of the coefficient at `x^m`.
    pub fn offdiag_max(&self, m: usize) -> T {
        let c = &self.coeffs[m];
        let mut best = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    best = best.max(c[(i, j)].norm());
                }
            }
        }
        best
    }

    pub fn set_coeff(&mut self, m: usize, value: CMat<T>) {
        self.coeffs[m] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.max_abs() == T::zero())
    }

    pub fn diag_entries(&self) -> Vec<Series<T>> {
        (0..self.rows.min(self.cols)).map(|i| self.entry(i, i)).collect()
    }

    pub fn zero_entry(&mut self, i: usize, j: usize) {
        for c in self.coeffs.iter_mut() {
            c[(i, j)] = czero();
        }
    }
}
