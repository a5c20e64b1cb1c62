//! Small dense complex matrices: LU solves, complete-pivoting rank and
//! nullspace, characteristic polynomials, polynomial roots and eigenpairs.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, from_usize, lit, Cx, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CMat<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Cx<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(CMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diag(entries: &[Cx<T>]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = *e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn diagonal(&self) -> Vec<Cx<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.cols, o.rows);
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..o.cols {
                    out[(i, j)] += a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        debug_assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Solve `self · x = b` by partial-pivoting Gaussian elimination.
    pub fn solve(&self, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        let sol = self.solve_mat(&CMat {
            rows: b.len(),
            cols: 1,
            data: b.to_vec(),
        })?;
        Ok(sol.data)
    }

    /// Solve `self · X = B` for a matrix right-hand side.
    pub fn solve_mat(&self, b: &Self) -> Result<Self> {
        if !self.is_square() || b.rows != self.rows {
            return Err(Error::Shape(format!(
                "solve with {}x{} matrix and {} rows",
                self.rows, self.cols, b.rows
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        let scale = a.max_abs();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap())
                .unwrap_or(col);
            if a[(piv, col)].norm() <= T::epsilon() * scale * from_usize(n) || scale == T::zero() {
                return Err(Error::Singular(format!("pivot {col} vanishes")));
            }
            a.swap_rows(col, piv);
            x.swap_rows(col, piv);
            let d = a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] / d;
                if f == czero() {
                    continue;
                }
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= f * v;
                }
                for c in 0..x.cols {
                    let v = x[(col, c)];
                    x[(r, c)] -= f * v;
                }
            }
        }
        for c in 0..x.cols {
            for r in (0..n).rev() {
                let mut acc = x[(r, c)];
                for k in r + 1..n {
                    acc -= a[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = acc / a[(r, r)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve_mat(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// Complete-pivoting elimination; returns the numerical rank at relative
    /// tolerance `tol` together with the reduced factors.
    fn complete_pivot(&self, tol: T) -> (usize, CMat<T>, Vec<usize>) {
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let mut rank = 0;
        for k in 0..m.min(n) {
            let mut best = (k, k);
            let mut bv = T::zero();
            for i in k..m {
                for j in k..n {
                    let v = a[(i, j)].norm();
                    if v > bv {
                        bv = v;
                        best = (i, j);
                    }
                }
            }
            if bv <= tol * scale || bv == T::zero() {
                break;
            }
            a.swap_rows(k, best.0);
            a.swap_cols(k, best.1);
            perm.swap(k, best.1);
            let d = a[(k, k)];
            for r in k + 1..m {
                let f = a[(r, k)] / d;
                a[(r, k)] = czero();
                if f == czero() {
                    continue;
                }
                for c in k + 1..n {
                    let v = a[(k, c)];
                    a[(r, c)] -= f * v;
                }
            }
            rank += 1;
        }
        (rank, a, perm)
    }

    /// Numerical rank at relative tolerance `tol`.
    pub fn rank(&self, tol: T) -> usize {
        self.complete_pivot(tol).0
    }

    /// A unit-norm vector spanning (part of) the numerical nullspace.
    pub fn null_vector(&self, tol: T) -> Result<Vec<Cx<T>>> {
        let n = self.cols;
        let (rank, u, perm) = self.complete_pivot(tol);
        let r = if rank >= n { n - 1 } else { rank };
        if rank >= n {
            // Treat the smallest trailing pivot as zero.
            log::debug!("null_vector: matrix numerically nonsingular, using last pivot");
        }
        let mut y = vec![czero(); n];
        y[r] = cone();
        for i in (0..r).rev() {
            let mut acc: Cx<T> = czero();
            for k in i + 1..=r {
                acc -= u[(i, k)] * y[k];
            }
            y[i] = acc / u[(i, i)];
        }
        let mut x = vec![czero(); n];
        for (k, &p) in perm.iter().enumerate() {
            x[p] = y[k];
        }
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Singular("nullspace vector degenerate".into()));
        }
        Ok(x.into_iter().map(|z| z / norm).collect())
    }

    /// Characteristic polynomial coefficients `det(λI − A)`, lowest degree first.
    pub fn char_poly(&self) -> Vec<Cx<T>> {
        let n = self.rows;
        let mut coeffs = vec![czero(); n + 1];
        coeffs[n] = cone();
        let mut m = Self::zeros(n, n);
        let id = Self::identity(n);
        for k in 1..=n {
            m = self.mul(&m).add(&id.scale(coeffs[n + 1 - k]));
            let am = self.mul(&m);
            let tr: Cx<T> = am.diagonal().into_iter().sum();
            coeffs[n - k] = -tr / from_usize::<T>(k);
        }
        coeffs
    }

    /// Eigenvalues and unit eigenvectors (columns of the returned matrix).
    pub fn eigen(&self) -> Result<(Vec<Cx<T>>, CMat<T>)> {
        if !self.is_square() {
            return Err(Error::Shape("eigen of non-square matrix".into()));
        }
        let n = self.rows;
        let values = match n {
            0 => return Err(Error::Shape("empty matrix".into())),
            1 => vec![self[(0, 0)]],
            2 => {
                let (a, b, c, d) = (self[(0, 0)], self[(0, 1)], self[(1, 0)], self[(1, 1)]);
                let half = lit::<T>(0.5);
                let mean = (a + d) * half;
                let disc = ((a - d) * (a - d) * lit::<T>(0.25) + b * c).sqrt();
                let (l1, l2) = (mean + disc, mean - disc);
                // Recover the small root accurately from the determinant.
                let det = a * d - b * c;
                if l1.norm() >= l2.norm() && l1 != czero() {
                    vec![l1, det / l1]
                } else if l2 != czero() {
                    vec![det / l2, l2]
                } else {
                    vec![l1, l2]
                }
            }
            _ => {
                let roots = poly_roots(&self.char_poly())?;
                roots
                    .into_iter()
                    .map(|l| refine_eigenvalue(self, l))
                    .collect()
            }
        };
        let mut vecs = Self::zeros(n, n);
        let tol = lit::<T>(1e-10);
        for (j, &l) in values.iter().enumerate() {
            let shifted = self.sub(&Self::identity(n).scale(l));
            let v = shifted.null_vector(tol)?;
            for (i, vi) in v.into_iter().enumerate() {
                vecs[(i, j)] = vi;
            }
        }
        Ok((values, vecs))
    }
}

/// Newton polish of an eigenvalue on `det(A − λI)` using LU-based derivative.
fn refine_eigenvalue<T: Real>(a: &CMat<T>, mut l: Cx<T>) -> Cx<T> {
    let n = a.rows;
    for _ in 0..3 {
        let shifted = a.sub(&CMat::identity(n).scale(l));
        // d/dλ log det(A − λI) = −tr((A − λI)^{-1})
        match shifted.inverse() {
            Ok(inv) => {
                let tr: Cx<T> = inv.diagonal().into_iter().sum();
                if tr == czero() || !(tr.re.is_finite() && tr.im.is_finite()) {
                    break;
                }
                let step = cone::<T>() / tr;
                if step.norm() > lit::<T>(1e-6) * (l.norm() + T::one()) {
                    break;
                }
                l += step;
            }
            Err(_) => break,
        }
    }
    l
}

impl<T: Real> Index<(usize, usize)> for CMat<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

fn horner<T: Real>(coeffs: &[Cx<T>], z: Cx<T>) -> (Cx<T>, Cx<T>) {
    let mut p = czero();
    let mut dp = czero();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the polynomial with coefficients `coeffs` (lowest degree
/// first), by Aberth–Ehrlich simultaneous iteration with Newton polish.
pub fn poly_roots<T: Real>(coeffs: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|z| *z == czero()) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Precondition("non-finite polynomial coefficient".into()));
    }
    let lead = c[deg];
    let monic: Vec<Cx<T>> = c.iter().map(|z| z / lead).collect();
    if deg == 1 {
        return Ok(vec![-monic[0]]);
    }
    // Zero roots factor out exactly.
    let zeros = monic.iter().take_while(|z| **z == czero()).count();
    let reduced: Vec<Cx<T>> = monic[zeros..].to_vec();
    let d = reduced.len() - 1;
    let mut roots = vec![czero::<T>(); zeros];
    if d == 0 {
        return Ok(roots);
    }
    let radius = reduced[..d]
        .iter()
        .enumerate()
        .map(|(k, z)| z.norm().powf(T::one() / from_usize::<T>(d - k)))
        .fold(T::zero(), T::max)
        .max(lit(1e-3));
    let mut z: Vec<Cx<T>> = (0..d)
        .map(|k| {
            let ang = T::TAU() * from_usize::<T>(k) / from_usize::<T>(d) + lit(0.4);
            Cx::from_polar(radius, ang)
        })
        .collect();
    let tiny = T::epsilon() * lit(4.0);
    for _ in 0..800 {
        let mut moved = T::zero();
        for i in 0..d {
            let (p, dp) = horner(&reduced, z[i]);
            if p == czero() {
                continue;
            }
            let ratio = p / dp;
            let mut s = czero();
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff != czero() {
                        s += cone::<T>() / diff;
                    }
                }
            }
            let denom = cone::<T>() - ratio * s;
            let w = if denom == czero() { ratio } else { ratio / denom };
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (z[i].norm() + T::min_positive_value().sqrt()));
            }
        }
        if moved < tiny {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = horner(&reduced, *zi);
            if dp == czero() {
                break;
            }
            let step = p / dp;
            if step.norm() < lit::<T>(1e-3) * (zi.norm() + T::one()) {
                *zi -= step;
            }
        }
    }
    roots.extend(z);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn c(re: f64, im: f64) -> Cx<f64> {
        cx(re, im)
    }

    #[test]
    fn solve_and_inverse() {
        let a = CMat::from_rows(&[vec![c(2.0, 0.0), c(1.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]])
            .unwrap();
        let inv = a.inverse().unwrap();
        let id = a.mul(&inv);
        assert!(id.sub(&CMat::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_solve_fails() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]])
            .unwrap();
        assert!(matches!(a.inverse(), Err(Error::Singular(_))));
        assert_eq!(a.rank(1e-12), 1);
    }

    #[test]
    fn roots_of_cubic() {
        // (z−1)(z+2)(z−i)
        let r = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0)];
        let coeffs = vec![
            -(r[0] * r[1] * r[2]),
            r[0] * r[1] + r[0] * r[2] + r[1] * r[2],
            -(r[0] + r[1] + r[2]),
            c(1.0, 0.0),
        ];
        let roots = poly_roots(&coeffs).unwrap();
        for target in r {
            assert!(roots.iter().any(|z| (z - target).norm() < 1e-13));
        }
    }

    #[test]
    fn eigen_small_and_general() {
        let a = CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(4.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let (vals, vecs) = a.eigen().unwrap();
        assert!((vals[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((vals[1] + c(2.0, 0.0)).norm() < 1e-15);
        for j in 0..2 {
            let v = vecs.column(j);
            let av = a.mul_vec(&v);
            for i in 0..2 {
                assert!((av[i] - vals[j] * v[i]).norm() < 1e-14);
            }
        }
        let b = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 * 0.37 - 1.0, (i + 2 * j) as f64 * 0.11));
        let (vals, vecs) = b.eigen().unwrap();
        for j in 0..3 {
            let v = vecs.column(j);
            let bv = b.mul_vec(&v);
            for i in 0..3 {
                assert!((bv[i] - vals[j] * v[i]).norm() < 1e-11, "{:?}", vals);
            }
        }
    }

    #[test]
    fn char_poly_matches_trace_det() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]])
            .unwrap();
        let p = a.char_poly();
        assert!((p[1] - c(-5.0, 0.0)).norm() < 1e-14);
        assert!((p[0] - c(-2.0, 0.0)).norm() < 1e-14);
    }
}
