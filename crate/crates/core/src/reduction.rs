//! Preprocessing of `x^{1+γ}Y′ = F0(x) + A(x)Y + F(x,Y)`: removal of the
//! constant-in-`Y` part of `F`, the formal particular solution `K(x)` and
//! the recentred system in `W` where `Y = xW + K(x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_series::{substitute_nonlinearity, MatSeries, MultiIndex, Nonlinearity, Series};
use crate::linalg::CMat;
use crate::scalar::{czero, from_usize, Cx, Real};

/// Polynomial-in-`Y` system with truncated series coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct NonlinearSystem<T: Real> {
    gamma: u32,
    f0: Vec<Series<T>>,
    a: MatSeries<T>,
    f: Nonlinearity<T>,
    radius: T,
}

impl<T: Real> NonlinearSystem<T> {
    pub fn new(gamma: u32, f0: Vec<Series<T>>, a: MatSeries<T>, f: Nonlinearity<T>) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Precondition("Poincaré rank must be positive".into()));
        }
        let n = a.rows();
        if a.cols() != n || f0.len() != n || f.dim() != n {
            return Err(Error::Shape(format!(
                "A is {}x{}, F0 has {} entries, F has dimension {}",
                a.rows(),
                a.cols(),
                f0.len(),
                f.dim()
            )));
        }
        Ok(NonlinearSystem {
            gamma,
            f0,
            a,
            f,
            radius: T::infinity(),
        })
    }

    /// Radius of the `Y`-domain on which `F` is trusted.
    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = radius;
        self
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn f0(&self) -> &[Series<T>] {
        &self.f0
    }

    pub fn a(&self) -> &MatSeries<T> {
        &self.a
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.f
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Truncation order shared by `A` and `F`.
    pub fn order(&self) -> usize {
        self.f.min_order().map_or(self.a.order(), |o| o.min(self.a.order()))
    }

    pub fn f0_is_zero(&self) -> bool {
        self.f0.iter().all(Series::is_zero)
    }

    /// Whether `F(0, Y) ≡ 0`.
    pub fn nonlinearity_vanishes_at_origin(&self) -> bool {
        self.f.vanishes_at_origin(T::zero())
    }

    /// `F0(x) + A(x)y + F(x, y)` with every series read as a polynomial.
    pub fn rhs(&self, x: Cx<T>, y: &[Cx<T>]) -> Vec<Cx<T>> {
        let ay = self.a.eval(x).mul_vec(y);
        let fy = self.f.eval(x, y);
        self.f0
            .iter()
            .zip(ay)
            .zip(fy)
            .map(|((f0, l), nl)| f0.eval(x) + l + nl)
            .collect()
    }

    /// `x^{1+γ}Y′ − F0 − AY − F(x,Y)` for a formal vector `Y`.
    pub fn formal_residual(&self, y: &[Series<T>]) -> Result<Vec<Series<T>>> {
        if y.len() != self.dim() {
            return Err(Error::Shape(format!("expected {} components", self.dim())));
        }
        let ay = self.a.mul_vec(y)?;
        let fy = substitute_nonlinearity(&self.f, y)?;
        y.iter()
            .zip(&self.f0)
            .zip(ay.iter().zip(&fy))
            .map(|((yi, f0), (l, nl))| Ok(yi.euler_apply(self.gamma)? - f0 - l - nl))
            .collect()
    }
}

/// `Y = xZ`: `A ← A − x^γ I`, `F0 ← x⁻¹F0`, `F ← x⁻¹F(x, xZ)`. Requires `F0(0) = 0`.
pub fn normalize_constant_in_y<T: Real>(sys: &NonlinearSystem<T>) -> Result<NonlinearSystem<T>> {
    let n = sys.dim();
    let order = sys.order();
    let g = sys.gamma as usize;
    let mut a = sys.a.clone();
    if g <= a.order() {
        let mut c = a.coeff(g).clone();
        for i in 0..n {
            c[(i, i)] -= T::one();
        }
        a.set_coeff(g, c);
    }
    let tol = crate::formal_series::vanishing_tol::<T>();
    let f0 = sys
        .f0
        .iter()
        .map(|s| s.shift_down(1, tol))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| Error::Precondition("normalization requires F0(0) = 0".into()))?;
    let mut f = Nonlinearity::zero(n);
    for (i, m, s) in sys.f.terms() {
        f.add_term(i, m.clone(), s.shift_up(m.total() as usize - 1).truncate(order))?;
    }
    Ok(NonlinearSystem {
        gamma: sys.gamma,
        f0,
        a,
        f,
        radius: sys.radius,
    })
}

/// Unique formal solution `K` with `K(0) = 0` through `x^{n_x}`.
pub fn formal_particular_solution<T: Real>(sys: &NonlinearSystem<T>, n_x: usize) -> Result<Vec<Series<T>>> {
    let n = sys.dim();
    let avail = sys.order().min(sys.f0.iter().map(Series::order).min().unwrap_or(usize::MAX));
    if n_x > avail {
        return Err(Error::DegenerateOrder(format!(
            "requested order {n_x} exceeds system order {avail}"
        )));
    }
    let scale = sys.f0.iter().map(Series::max_abs).fold(T::one(), T::max);
    if let Some(i) = sys.f0.iter().position(|s| s.coeff(0).norm() > crate::formal_series::vanishing_tol::<T>() * scale) {
        return Err(Error::Precondition(format!("F0 component {i} does not vanish at x = 0")));
    }
    let a0 = sys.a.coeff(0);
    let mut k: Vec<Vec<Cx<T>>> = vec![vec![czero(); n_x + 1]; n];
    if sys.f0_is_zero() {
        return Ok(k.into_iter().map(Series::from_vec).collect());
    }
    a0.inverse().map_err(|_| Error::Precondition("A(0) is singular".into()))?;
    let g = sys.gamma as usize;
    for m in 1..=n_x {
        // nonlinear contribution depends only on K_1..K_{m-1}
        let nl = if sys.f.is_zero() {
            vec![czero(); n]
        } else {
            let partial: Vec<Series<T>> = k.iter().map(|c| Series::from_vec(c[..=m].to_vec())).collect();
            substitute_nonlinearity(&sys.f.truncate(m), &partial)?
                .iter()
                .map(|s| s.coeff(m))
                .collect()
        };
        let mut rhs: Vec<Cx<T>> = (0..n).map(|i| -sys.f0[i].coeff(m) - nl[i]).collect();
        if m > g {
            for i in 0..n {
                rhs[i] += k[i][m - g] * from_usize::<T>(m - g);
            }
        }
        for j in 1..m {
            let aj = sys.a.coeff(j).mul_vec(&k.iter().map(|c| c[m - j]).collect::<Vec<_>>());
            for i in 0..n {
                rhs[i] -= aj[i];
            }
        }
        let km = a0.solve(&rhs)?;
        for i in 0..n {
            k[i][m] = km[i];
        }
    }
    Ok(k.into_iter().map(Series::from_vec).collect())
}

fn binomial<T: Real>(n: u32, k: u32) -> T {
    (0..k).fold(T::one(), |acc, j| acc * from_usize::<T>((n - j) as usize) / from_usize::<T>((j + 1) as usize))
}

/// Sub-indices `k ≤ m` componentwise.
fn sub_indices(m: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &e in m.entries() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=e).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(MultiIndex::new).collect()
}

/// System solved by the transseries stage, with `K` and whether `Y = K + xW`
/// was needed. Systems with `F0 = 0` and `F(x, 0) = 0` pass through.
pub fn prepare<T: Real>(sys: &NonlinearSystem<T>) -> Result<(NonlinearSystem<T>, Vec<Series<T>>, bool)> {
    if sys.f0_is_zero() && sys.nonlinearity_vanishes_at_origin() {
        return Ok((sys.clone(), vec![Series::zero(sys.order()); sys.dim()], false));
    }
    let k = formal_particular_solution(sys, sys.order())?;
    Ok((recentre(sys, &k)?, k, true))
}

/// `Y = xW + K(x)`: returns the `W` system with `A′ = A − x^γ I + ∂F(x,K)`,
/// nonlinearity `G = x⁻¹[F(x,xW+K) − F(x,K) − ∂F(x,K)xW]` and
/// `F0′ = x⁻¹·(residual of K)`.
pub fn recentre<T: Real>(sys: &NonlinearSystem<T>, k: &[Series<T>]) -> Result<NonlinearSystem<T>> {
    let n = sys.dim();
    if k.len() != n {
        return Err(Error::Shape(format!("K has {} entries, expected {n}", k.len())));
    }
    let order = sys.order();
    if k.iter().any(|s| s.order() < order) {
        return Err(Error::DegenerateOrder(format!(
            "K truncated below the system order {order}"
        )));
    }
    let k: Vec<Series<T>> = k.iter().map(|s| s.truncate(order)).collect();
    let tol = crate::formal_series::vanishing_tol::<T>();
    if k.iter().any(|s| s.coeff(0).norm() > tol) {
        return Err(Error::Precondition("K(0) must vanish".into()));
    }
    let g = sys.gamma as usize;
    let mut a_entries = sys.a.entries();
    if g <= order {
        for (i, row) in a_entries.iter_mut().enumerate() {
            row[i] = &row[i] - &Series::monomial(T::one().into(), g, order);
        }
    }
    let max_pow = sys.f.max_degree() as usize;
    let powers: Vec<Vec<Series<T>>> = k
        .iter()
        .map(|kj| {
            let mut v = vec![Series::one(order)];
            for e in 1..=max_pow {
                let next = &v[e - 1] * kj;
                v.push(next);
            }
            v
        })
        .collect();
    let mut g_nl = Nonlinearity::zero(n);
    for (i, m, f) in sys.f.terms() {
        for sub in sub_indices(m) {
            let d = sub.total();
            if d == 0 {
                continue;
            }
            let mut coeff = f.truncate(order);
            for j in 0..n {
                let (mj, kj) = (m.entries()[j], sub.entries()[j]);
                coeff = coeff.scale(binomial::<T>(mj, kj).into());
                if mj > kj {
                    coeff = &coeff * &powers[j][(mj - kj) as usize];
                }
            }
            let coeff = coeff.shift_up(d as usize - 1).truncate(order);
            if d == 1 {
                let j = sub.entries().iter().position(|&e| e == 1).expect("unit index");
                a_entries[i][j] = &a_entries[i][j] + &coeff;
            } else {
                g_nl.add_term(i, sub, coeff)?;
            }
        }
    }
    let residual: Vec<Series<T>> = sys.formal_residual(&k)?.into_iter().map(|r| -r).collect();
    let rscale = residual.iter().map(Series::max_abs).fold(T::one(), T::max);
    if residual.iter().any(|r| r.coeff(0).norm() > tol * rscale) {
        return Err(Error::Precondition("F0(0) must vanish before recentring".into()));
    }
    let f0 = residual
        .iter()
        .map(|r| r.shift_down(1, T::infinity()))
        .collect::<Result<Vec<_>>>()?;
    Ok(NonlinearSystem {
        gamma: sys.gamma,
        f0,
        a: MatSeries::from_entries(&a_entries)?,
        f: g_nl.pruned(),
        radius: sys.radius,
    })
}

/// `A(0)` as a constant matrix.
pub fn leading_matrix<T: Real>(sys: &NonlinearSystem<T>) -> CMat<T> {
    sys.a.coeff(0).clone()
}
