//! Normalisation of the linear part: eigen-conjugation, a polynomial
//! pre-gauge `P(x)` of degree `≤ γ`, and the diagonalising factor `I + C(x)`
//! so that `Y = V·P·(I + C)·Z` turns `x^{1+γ}Y′ = A(x)Y` into
//! `x^{1+γ}Z′ = Λ(x)Z` with `Λ` diagonal and polynomial.

use serde::Serialize;

use crate::borel_laplace::{borel_transform, convolve, laplace_formal, BorelSeries};
use crate::error::{Error, Result};
use crate::formal_series::{MatSeries, Series};
use crate::linalg::CMat;
use crate::scalar::{angle_diff, cis, czero, from_usize, gamma as gamma_fn, lit, to_f64, wrap_angle, Cx, Real};
use crate::spectral::SpectralData;

/// Relative size below which a Sylvester divisor counts as zero.
pub const ZERO_DIVISOR_TOL: f64 = 1e-12;

/// Composite gauge `V · P(x) · (I + C(x))`.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeTransform<T: Real> {
    /// Eigenvector matrix with `V⁻¹A(0)V` diagonal.
    pub v: CMat<T>,
    pub v_inv: CMat<T>,
    /// Polynomial pre-gauge, `P(0) = I`.
    pub p_poly: MatSeries<T>,
    /// Diagonal polynomials `λ_i(x)` of degree `≤ γ`.
    pub lambda: Vec<Series<T>>,
    /// Diagonalising correction, `C(0) = 0`.
    pub c: MatSeries<T>,
    /// Neumann-constructed Borel transforms of `C`, when requested.
    pub borel_c: Option<Vec<Vec<BorelSeries<T>>>>,
    pub gamma: u32,
}

impl<T: Real> GaugeTransform<T> {
    pub fn order(&self) -> usize {
        self.c.order().min(self.p_poly.order())
    }

    /// `T(x) = V·P(x)·(I + C(x))`.
    pub fn matrix(&self) -> MatSeries<T> {
        let n = self.v.rows();
        let id = MatSeries::identity(n, self.order());
        let pt = self.p_poly.mul(&id.add(&self.c));
        pt.sandwich(&self.v, &CMat::identity(n))
    }

    /// `T(x)⁻¹` as a formal series.
    pub fn inverse_matrix(&self) -> Result<MatSeries<T>> {
        self.matrix().inverse()
    }

    /// `Λ(x)` as a diagonal matrix series.
    pub fn lambda_matrix(&self) -> MatSeries<T> {
        diag_series(&self.lambda, self.order())
    }

    /// Leading eigenvalues `λ_i(0)`.
    pub fn eigenvalues(&self) -> Vec<Cx<T>> {
        self.lambda.iter().map(|l| l.coeff(0)).collect()
    }
}

fn diag_series<T: Real>(lambda: &[Series<T>], order: usize) -> MatSeries<T> {
    let n = lambda.len();
    let coeffs = (0..=order)
        .map(|m| CMat::diag(&lambda.iter().map(|l| l.coeff(m)).collect::<Vec<_>>()))
        .collect();
    MatSeries::from_coeffs(coeffs).expect("diagonal coefficients are well formed")
        .truncate(order)
        .sandwich(&CMat::identity(n), &CMat::identity(n))
}

fn zero_divisor_check<T: Real>(d: Cx<T>, scale: T, row: usize, col: usize, order: usize) -> Result<()> {
    if d.norm() <= lit::<T>(ZERO_DIVISOR_TOL) * scale.max(T::min_positive_value()) {
        return Err(Error::ZeroDivisor { row, col, order });
    }
    Ok(())
}

/// `V⁻¹ A V` with the off-diagonal part of the constant term cleared.
pub fn conjugate_to_diagonal<T: Real>(a: &MatSeries<T>, spec: &SpectralData<T>) -> Result<(CMat<T>, CMat<T>, MatSeries<T>)> {
    let v = spec.eigenvectors.clone();
    let v_inv = v.inverse()?;
    let mut d = a.sandwich(&v_inv, &v);
    d.set_coeff(0, CMat::diag(&spec.eigenvalues));
    Ok((v, v_inv, d))
}

/// Polynomial gauge: returns `(P, Λ, B)` with
/// `x^{1+γ}P′ + P(Λ + B) = AP`, `P` of degree `≤ γ`, `Λ` diagonal of degree
/// `≤ γ` and `B = O(x^{1+γ})`. `A(0)` must be diagonal with distinct entries.
pub fn polynomial_gauge<T: Real>(a: &MatSeries<T>, gamma: u32) -> Result<(MatSeries<T>, Vec<Series<T>>, MatSeries<T>)> {
    let n = a.rows();
    let g = gamma as usize;
    let order = a.order();
    if a.cols() != n {
        return Err(Error::Shape("gauge needs a square matrix".into()));
    }
    if order < 2 * g + 1 {
        return Err(Error::DegenerateOrder(format!(
            "polynomial gauge of rank {gamma} needs order ≥ {}, got {order}",
            2 * g + 1
        )));
    }
    let a0 = a.coeff(0);
    let lam0 = a0.diagonal();
    let scale = a0.max_abs();
    for i in 0..n {
        for j in 0..n {
            if i != j && a0[(i, j)].norm() > lit::<T>(ZERO_DIVISOR_TOL) * scale.max(T::one()) {
                return Err(Error::Precondition("A(0) must be diagonal".into()));
            }
            if i < j {
                let gap = (lam0[i] - lam0[j]).norm();
                if gap <= lit::<T>(ZERO_DIVISOR_TOL) * scale.max(T::min_positive_value()) {
                    return Err(Error::EigenvaluesNotSeparated { i, j, gap: to_f64(gap) });
                }
            }
        }
    }
    let mut p: Vec<CMat<T>> = vec![CMat::identity(n)];
    let mut bt: Vec<CMat<T>> = vec![CMat::diag(&lam0)];
    for m in 1..=order {
        let kmax = m.min(g);
        // R = Σ_{k<m, k≤γ} A_{m−k} P_k − Σ_{1≤k≤γ, k<m} P_k B̃_{m−k} − (m−γ)P_{m−γ}
        let mut r = CMat::zeros(n, n);
        for k in 0..=kmax.min(m - 1) {
            r = r.add(&a.coeff(m - k).mul(&p[k]));
        }
        for k in 1..=kmax.min(m - 1) {
            r = r.sub(&p[k].mul(&bt[m - k]));
        }
        if m > g && m - g <= g {
            r = r.sub(&p[m - g].scale(from_usize::<T>(m - g).into()));
        }
        if m <= g {
            // P_m Λ₀ − Λ₀ P_m + B̃_m = R
            let mut pm = CMat::zeros(n, n);
            let mut bm = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        bm[(i, i)] = r[(i, i)];
                    } else {
                        let d = lam0[j] - lam0[i];
                        zero_divisor_check(d, scale, i, j, m)?;
                        pm[(i, j)] = r[(i, j)] / d;
                    }
                }
            }
            p.push(pm);
            bt.push(bm);
        } else {
            bt.push(r);
        }
    }
    let lambda: Vec<Series<T>> = (0..n)
        .map(|i| {
            let mut c = vec![czero(); order + 1];
            for (m, b) in bt.iter().enumerate().take(g + 1) {
                c[m] = b[(i, i)];
            }
            Series::new(c)
        })
        .collect::<Result<_>>()?;
    let mut b_coeffs = vec![CMat::zeros(n, n); g + 1];
    b_coeffs.extend(bt.into_iter().skip(g + 1));
    let mut p_coeffs = p;
    p_coeffs.resize(order + 1, CMat::zeros(n, n));
    Ok((MatSeries::from_coeffs(p_coeffs)?, lambda, MatSeries::from_coeffs(b_coeffs)?))
}

/// Solve `x^{1+γ}C′ = ΛC − CΛ + B(I + C)` with `C(0) = 0` through `x^{n_x}`.
/// `B` must vanish to order `γ` and be known through `x^{n_x + γ}`.
pub fn diagonalize_formal<T: Real>(
    lambda: &[Series<T>],
    b: &MatSeries<T>,
    gamma: u32,
    n_x: usize,
) -> Result<MatSeries<T>> {
    let n = lambda.len();
    let g = gamma as usize;
    if b.rows() != n || b.cols() != n {
        return Err(Error::Shape("Λ and B disagree in dimension".into()));
    }
    if b.order() < n_x + g {
        return Err(Error::DegenerateOrder(format!(
            "diagonalisation through x^{n_x} needs B through x^{}, got {}",
            n_x + g,
            b.order()
        )));
    }
    let bscale = b.max_abs().max(T::one());
    for m in 0..=g {
        if b.coeff(m).max_abs() > crate::formal_series::vanishing_tol::<T>() * bscale {
            return Err(Error::Precondition(format!(
                "remainder has a nonzero x^{m} coefficient; it must be O(x^{})",
                g + 1
            )));
        }
    }
    let lam0: Vec<Cx<T>> = lambda.iter().map(|l| l.coeff(0)).collect();
    let scale = lam0.iter().map(|l| l.norm()).fold(T::zero(), T::max);
    let mut c: Vec<CMat<T>> = vec![CMat::zeros(n, n); n_x + 1];
    // (B(I + C))_m using the currently known C coefficients
    let bc = |c: &[CMat<T>], m: usize| -> CMat<T> {
        let mut acc = b.coeff(m).clone();
        for j in g + 1..m {
            if m - j < c.len() {
                acc = acc.add(&b.coeff(j).mul(&c[m - j]));
            }
        }
        acc
    };
    for m in 1..=n_x {
        let r = bc(&c, m);
        for i in 0..n {
            for k in 0..n {
                if i == k {
                    continue;
                }
                let mut rhs = -r[(i, k)];
                if m > g {
                    rhs += c[m - g][(i, k)] * from_usize::<T>(m - g);
                }
                for l in 1..=g.min(m - 1) {
                    let dl = lambda[i].coeff(l) - lambda[k].coeff(l);
                    rhs -= dl * c[m - l][(i, k)];
                }
                let d = lam0[i] - lam0[k];
                zero_divisor_check(d, scale, i, k, m)?;
                c[m][(i, k)] = rhs / d;
            }
        }
        // diagonal: m·c_m = (B(I+C))_{m+γ}, which only involves C_{<m}
        let rd = bc(&c, m + g);
        for k in 0..n {
            c[m][(k, k)] = rd[(k, k)] / from_usize::<T>(m);
        }
    }
    MatSeries::from_coeffs(c)
}

/// Coefficientwise relative size of `x^{1+γ}T′ + TΛ − AT`: the `x^m`
/// coefficient is divided by the largest term that enters it, so factorially
/// growing gauges are judged at their own scale.
pub fn gauge_residual<T: Real>(a: &MatSeries<T>, gauge: &GaugeTransform<T>) -> Result<T> {
    let order = gauge.order().min(a.order());
    let t = gauge.matrix().truncate(order);
    let lam = gauge.lambda_matrix().truncate(order);
    let a = a.truncate(order);
    let res = t.euler_apply(gauge.gamma)?.add(&t.mul(&lam)).sub(&a.mul(&t));
    let amax = a.max_abs().max(lam.max_abs()).max(T::one());
    let mut tmax = T::zero();
    let mut worst = T::zero();
    for m in 0..=order {
        tmax = tmax.max(t.coeff(m).max_abs());
        let scale = (tmax * amax.max(from_usize::<T>(m))).max(T::one());
        worst = worst.max(res.coeff(m).max_abs() / scale);
    }
    Ok(worst)
}

/// Full linear normalisation of `A` through `x^{n_x}`; `A` must be known
/// through `x^{n_x + γ}`.
pub fn build_gauge<T: Real>(a: &MatSeries<T>, spec: &SpectralData<T>, n_x: usize) -> Result<GaugeTransform<T>> {
    let gamma = spec.gamma;
    let (v, v_inv, d) = conjugate_to_diagonal(a, spec)?;
    let (p_poly, lambda, b) = polynomial_gauge(&d, gamma)?;
    let c = diagonalize_formal(&lambda, &b, gamma, n_x)?;
    Ok(GaugeTransform {
        v,
        v_inv,
        p_poly: p_poly.truncate(n_x),
        lambda: lambda.iter().map(|l| l.truncate(n_x)).collect(),
        c,
        borel_c: None,
        gamma,
    })
}

/// Outcome of the Borel-plane Neumann construction.
#[derive(Clone, Debug, Serialize)]
pub struct NeumannReport<T: Real> {
    /// `Σ_{m ≤ m_max} Ĉ^m` entrywise.
    pub sum: Vec<Vec<BorelSeries<T>>>,
    /// Per-term constants `A_m` with `sup_{|ξ|=r} |Ĉ^m| ≤ A_m^m r^{m−γ}/Γ(m/γ)`.
    pub term_constants: Vec<T>,
    /// Slope of `log A_m^m` against `m`; finite means geometric growth.
    pub growth_slope: T,
}

/// Divide a Borel transform by `γξ^γ − d`.
fn borel_divide<T: Real>(f: &BorelSeries<T>, d: Cx<T>, gamma: u32) -> Result<BorelSeries<T>> {
    let g = gamma as usize;
    let reg = f.regular();
    let gm = from_usize::<T>(g);
    let out = if d == czero() {
        reg.shift_down(g, crate::formal_series::vanishing_tol::<T>())
            .map_err(|_| Error::Precondition("diagonal remainder is not O(x^{1+γ})".into()))?
            .scale(Cx::new(T::one() / gm, T::zero()))
    } else {
        let mut q = vec![czero(); reg.order() + 1];
        q[0] = -d;
        if g <= reg.order() {
            q[g] = gm.into();
        }
        reg * &Series::new(q)?.recip()?
    };
    BorelSeries::new(gamma, out)
}

/// Neumann construction of `Ĉ` in the Borel plane:
/// `(γξ^γ − λ_{ik})Ĉ_{ik} = λ*_{ik} ∗ Ĉ_{ik} + Σ_j b̂_{ij} ∗ Ĉ_{jk} + b̂_{ik}`.
/// `theta` is the ray used for the term-size estimates.
pub fn diagonalize_neumann<T: Real>(
    lambda: &[Series<T>],
    b: &MatSeries<T>,
    spec: &SpectralData<T>,
    theta: T,
    m_max: usize,
) -> Result<NeumannReport<T>> {
    let n = lambda.len();
    let gamma = spec.gamma;
    let g = gamma as usize;
    for d in &spec.theta1_dirs {
        if angle_diff(wrap_angle(theta), *d).abs() < lit(1e-9) {
            return Err(Error::SingularDirection(format!("θ = {} lies on a Θ₁ direction", to_f64(theta))));
        }
    }
    let lam0: Vec<Cx<T>> = lambda.iter().map(|l| l.coeff(0)).collect();
    let order = b.order();
    let bhat: Vec<Vec<BorelSeries<T>>> = (0..n)
        .map(|i| (0..n).map(|k| borel_transform(&b.entry(i, k), gamma)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    // λ*_{ik}(x) = λ_i(x) − λ_k(x) − (λ_i − λ_k)
    let lstar: Vec<Vec<Option<BorelSeries<T>>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut s = &lambda[i] - &lambda[k];
                    let mut cs = s.coeffs().to_vec();
                    cs[0] = czero();
                    s = Series::new(cs)?.truncate(order);
                    if s.is_zero() {
                        Ok(None)
                    } else {
                        borel_transform(&s, gamma).map(Some)
                    }
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let step = |prev: &Vec<Vec<BorelSeries<T>>>, with_source: bool| -> Result<Vec<Vec<BorelSeries<T>>>> {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                let mut acc = if with_source {
                    bhat[i][k].regular().clone()
                } else {
                    Series::zero(order)
                };
                if !with_source {
                    if let Some(ls) = &lstar[i][k] {
                        acc = add_trunc(&acc, convolve(ls, &prev[i][k])?.regular());
                    }
                    for j in 0..n {
                        acc = add_trunc(&acc, convolve(&bhat[i][j], &prev[j][k])?.regular());
                    }
                }
                row.push(borel_divide(&BorelSeries::new(gamma, acc)?, lam0[i] - lam0[k], gamma)?);
            }
            next.push(row);
        }
        Ok(next)
    };
    let mut term = step(&Vec::new(), true)?;
    let mut sum = term.clone();
    let mut constants = Vec::new();
    let radii: Vec<T> = [0.1, 0.2, 0.3].iter().map(|&r| lit(r)).collect();
    for m in 1..=m_max {
        if m > 1 {
            term = step(&term, false)?;
            for i in 0..n {
                for k in 0..n {
                    let s = add_trunc(sum[i][k].regular(), term[i][k].regular());
                    sum[i][k] = BorelSeries::new(gamma, s)?;
                }
            }
        }
        // size of the m-th term on the ray relative to r^{m−γ}/Γ(m/γ)
        let mf = from_usize::<T>(m);
        let mut worst = T::zero();
        for &r in &radii {
            let xi = cis(theta) * r;
            let norm = r.powf(mf - from_usize::<T>(g)) / gamma_fn(mf / from_usize::<T>(g));
            for row in &term {
                for e in row {
                    worst = worst.max(e.eval_taylor(xi).norm() / norm);
                }
            }
        }
        constants.push(worst.max(T::min_positive_value()).powf(T::one() / mf));
    }
    let slope = log_linear_slope(&constants);
    Ok(NeumannReport {
        sum,
        term_constants: constants,
        growth_slope: slope,
    })
}

fn add_trunc<T: Real>(a: &Series<T>, b: &Series<T>) -> Series<T> {
    let o = a.order().min(b.order());
    &a.truncate(o) + &b.truncate(o)
}

/// Least-squares slope of `m·log A_m` against `m`.
fn log_linear_slope<T: Real>(constants: &[T]) -> T {
    let pts: Vec<(T, T)> = constants
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let m = from_usize::<T>(i + 1);
            (m, m * a.ln())
        })
        .collect();
    let k = from_usize::<T>(pts.len().max(1));
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}

/// Formal `C` recovered from a Neumann sum.
pub fn neumann_to_formal<T: Real>(sum: &[Vec<BorelSeries<T>>]) -> Result<MatSeries<T>> {
    let entries: Vec<Vec<Series<T>>> = sum
        .iter()
        .map(|row| row.iter().map(laplace_formal).collect())
        .collect();
    MatSeries::from_entries(&entries)
}
