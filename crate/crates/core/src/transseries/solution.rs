//! End-to-end transseries solutions `Y = K + x·T·Φ(x, Z(x))` and their
//! numerical evaluation and verification.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{majorant_certificate, phi_coefficients, status_error, DiagonalSystem, MajorantCertificate};
use crate::borel_laplace::{SectorSpec, SeriesSum, SummationOptions};
use crate::error::{Error, Result};
use crate::formal_series::{substitute_nonlinearity, substitute_terms, CoeffTable, MultiIndex, MultiPoly, Series, Truncation};
use crate::gauge::{build_gauge, GaugeTransform};
use crate::reduction::{leading_matrix, prepare, NonlinearSystem};
use crate::scalar::{angle_diff, czero, from_usize, lit, to_f64, Cx, Real};
use crate::spectral::{
    check_conditions, choose_direction, decay_region_near, eigen_data, ConditionCertificate, DirectionChoice,
    SpectralData, DEFAULT_M_MAX,
};

/// Knobs of [`solve`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolveOptions<T: Real> {
    /// x-order of the gauge, the coefficient table and the summed layers.
    pub n_x: usize,
    /// Largest `|p|` kept in `Φ`.
    pub n_z: u32,
    /// ε-depth of the majorant certificate (raised to at least `n_z`).
    pub n_q: u32,
    /// Preferred summation direction; the widest admissible gap otherwise.
    pub theta: Option<T>,
    pub m_max: u32,
    /// Margin `ε` of the decay region.
    pub decay_eps: T,
    pub summation: SummationOptions<T>,
    /// Build the majorant certificate (and with it `r_ε`).
    pub majorant: bool,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            n_x: 30,
            n_z: 4,
            n_q: 4,
            theta: None,
            m_max: DEFAULT_M_MAX,
            decay_eps: lit(0.05),
            summation: SummationOptions::default(),
            majorant: true,
        }
    }
}

/// A constructed family of solutions parameterised by `A ∈ ℂ^{n′}`.
#[derive(Clone, Debug, Serialize)]
pub struct TransseriesSolution<T: Real> {
    pub original: NonlinearSystem<T>,
    pub options: SolveOptions<T>,
    /// System for `W` after removing `K` (the original when no shift was needed).
    pub reduced: NonlinearSystem<T>,
    /// Whether `Y = K + xW` (true) or `Y = W`.
    pub scaled: bool,
    /// `eigen_order[k]` is the index (in [`eigen_data`] order) of the k-th diagonal entry.
    pub eigen_order: Vec<usize>,
    /// Subset in [`eigen_data`] order.
    pub subset: Vec<usize>,
    pub spectral: SpectralData<T>,
    pub certificate: ConditionCertificate<T>,
    pub direction: DirectionChoice<T>,
    pub theta_star: T,
    pub k: Vec<Series<T>>,
    pub gauge: GaugeTransform<T>,
    pub system: DiagonalSystem<T>,
    pub c_table: CoeffTable<T>,
    pub decay_region: SectorSpec<T>,
    pub r_eps: T,
    pub majorant: Option<MajorantCertificate>,
    /// `Y_p(x)` with `Y = Σ_p Y_p Z^p`, `|p| ≤ N_Z`; `p = 0` is `K`.
    pub layers: BTreeMap<MultiIndex, Vec<Series<T>>>,
    #[serde(skip)]
    sums: BTreeMap<MultiIndex, Vec<SeriesSum<T>>>,
}

/// Run reduction, spectral checks, gauge, coefficient recursion and summation set-up.
/// `subset` indexes the eigenvalues of `A(0)` in [`eigen_data`] order.
pub fn solve<T: Real>(sys: &NonlinearSystem<T>, subset: &[usize], opts: &SolveOptions<T>) -> Result<TransseriesSolution<T>> {
    let n = sys.dim();
    let gm = sys.gamma();
    let (reduced, k, scaled) = prepare(sys)?;
    if reduced.order() < opts.n_x + gm as usize {
        return Err(Error::DegenerateOrder(format!(
            "the gauge to order {} needs the system through x^{}, have {}",
            opts.n_x,
            opts.n_x + gm as usize,
            reduced.order()
        )));
    }

    let mut seen = vec![false; n];
    if subset.is_empty() || subset.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
        return Err(Error::Precondition(format!("invalid eigenvalue subset {subset:?}")));
    }
    let eigen_order: Vec<usize> = subset.iter().copied().chain((0..n).filter(|j| !seen[*j])).collect();
    let spectral = eigen_data(&leading_matrix(&reduced), gm)?.permuted(&eigen_order)?;
    let lead: Vec<usize> = (0..subset.len()).collect();
    let certificate = check_conditions(&spectral, &lead, opts.m_max)?;
    if let Some(e) = status_error(&certificate) {
        return Err(e);
    }
    let direction = choose_direction(&spectral, Some(&certificate), opts.theta)?;
    let theta_star = direction.theta_star;

    let gauge = build_gauge(reduced.a(), &spectral, opts.n_x)?;
    let system = DiagonalSystem::from_gauge(&reduced, &gauge)?;
    let c_table = phi_coefficients(&system, &certificate, opts.n_z, opts.n_x)?;
    let majorant = if opts.majorant {
        // layer |p| first appears at ε-depth |p| − 1
        let n_q = opts.n_q.max(opts.n_z);
        Some(majorant_certificate(&system, &certificate, theta_star, opts.n_z, n_q, opts.n_x)?)
    } else {
        None
    };
    let r_eps = majorant.as_ref().map_or(T::one(), |m| lit(m.r_eps));
    let decay_region = decay_region_near(&spectral, &lead, opts.decay_eps, theta_star)?;

    let t = gauge.matrix().truncate(opts.n_x);
    let lift = |v: Vec<Series<T>>| -> Vec<Series<T>> {
        if scaled {
            v.iter().map(|s| s.shift_up(1).truncate(opts.n_x)).collect()
        } else {
            v
        }
    };
    let mut layers = BTreeMap::new();
    layers.insert(MultiIndex::zeros(subset.len()), k.clone());
    for j in 0..subset.len() {
        layers.insert(MultiIndex::unit(subset.len(), j), lift((0..n).map(|i| t.entry(i, j)).collect()));
    }
    for (p, phi) in c_table.iter() {
        layers.insert(p.clone(), lift(t.mul_vec(phi)?));
    }
    let sums = layers
        .iter()
        .map(|(p, ys)| {
            let s = ys
                .iter()
                .map(|y| SeriesSum::new(y, gm, theta_star, &opts.summation))
                .collect::<Result<Vec<_>>>()?;
            Ok((p.clone(), s))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(TransseriesSolution {
        original: sys.clone(),
        options: *opts,
        reduced,
        scaled,
        eigen_order,
        subset: subset.to_vec(),
        spectral,
        certificate,
        direction,
        theta_star,
        k,
        gauge,
        system,
        c_table,
        decay_region,
        r_eps,
        majorant,
        layers,
        sums,
    })
}

impl<T: Real> TransseriesSolution<T> {
    pub fn n_sub(&self) -> usize {
        self.subset.len()
    }

    pub fn n_z(&self) -> u32 {
        self.options.n_z
    }

    /// `h_j(x) = Σ_{l<γ} λ_{j,l} x^{l−γ}/(l−γ) + λ_{j,γ} log x`.
    pub fn exponent(&self, j: usize, x: Cx<T>) -> Cx<T> {
        let gm = self.system.gamma() as i32;
        let lam = &self.system.lambda()[j];
        let mut h = lam.coeff(gm as usize) * x.ln();
        for l in 0..gm {
            let e = l - gm;
            h += lam.coeff(l as usize) * x.powi(e) / T::from_i32(e).expect("small integer");
        }
        h
    }

    /// `z_j = A_j e^{h_j(x)}`.
    pub fn z(&self, x: Cx<T>, a_consts: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if a_consts.len() != self.n_sub() {
            return Err(Error::Shape(format!(
                "{} integration constants for a {}-dimensional family",
                a_consts.len(),
                self.n_sub()
            )));
        }
        Ok(a_consts
            .iter()
            .enumerate()
            .map(|(j, &a)| if a == czero() { czero() } else { a * self.exponent(j, x).exp() })
            .collect())
    }

    /// Arguments `(lo, hi)` where both the decay region and the Laplace
    /// window `|arg x − θ*| < π/(2γ)` hold, or `None` if they do not meet.
    pub fn evaluation_arc(&self) -> Option<(T, T)> {
        let half = T::FRAC_PI_2() / from_usize::<T>(self.system.gamma() as usize);
        let centre = angle_diff(self.decay_region.theta, self.theta_star);
        let lo = (centre - self.decay_region.half_width).max(-half);
        let hi = (centre + self.decay_region.half_width).min(half);
        (lo < hi).then(|| (self.theta_star + lo, self.theta_star + hi))
    }

    /// Summed `Y_p(x)` for every layer.
    pub fn layer_values(&self, x: Cx<T>) -> Result<BTreeMap<MultiIndex, Vec<Cx<T>>>> {
        self.sums
            .iter()
            .map(|(p, s)| Ok((p.clone(), s.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?)))
            .collect()
    }

    fn admissible_z(&self, x: Cx<T>, a_consts: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if !self.decay_region.contains_direction(x.arg()) {
            return Err(Error::OutsideRegion(format!(
                "arg x = {} is outside the decay region ({}, {})",
                to_f64(x.arg()),
                to_f64(self.decay_region.lower()),
                to_f64(self.decay_region.upper())
            )));
        }
        let z = self.z(x, a_consts)?;
        if let Some(big) = z.iter().find(|v| v.norm() >= self.r_eps) {
            return Err(Error::Radius(format!(
                "|Z| = {:e} is not below r_eps = {:e}",
                to_f64(big.norm()),
                to_f64(self.r_eps)
            )));
        }
        Ok(z)
    }

    /// `Y(x)` keeping layers with `|p| ≤ max_degree`.
    pub fn evaluate_truncated(&self, x: Cx<T>, a_consts: &[Cx<T>], max_degree: u32) -> Result<Vec<Cx<T>>> {
        let z = self.admissible_z(x, a_consts)?;
        let mut y = vec![czero(); self.original.dim()];
        for (p, s) in &self.sums {
            if p.total() > max_degree {
                continue;
            }
            let zp = p.monomial(&z);
            if zp == czero() && p.total() > 0 {
                continue;
            }
            for (acc, f) in y.iter_mut().zip(s) {
                *acc += f.eval(x)? * zp;
            }
        }
        Ok(y)
    }

    /// Part of `F(x, Y)` beyond the kept Z-degree: the exact residual of the
    /// truncated transseries, free of summation noise. Scaled by `1/(1+|Y|)`.
    pub fn truncation_residual(&self, x: Cx<T>, a_consts: &[Cx<T>]) -> Result<T> {
        let z = self.admissible_z(x, a_consts)?;
        let values = self.layer_values(x)?;
        let ns = self.n_sub();
        let n = self.original.dim();
        let f = self.original.nonlinearity();
        let trunc = Truncation::total(ns, self.n_z() * f.max_degree().max(1));
        let args: Vec<MultiPoly<Cx<T>>> = (0..n)
            .map(|i| {
                let mut poly = MultiPoly::new(ns, trunc);
                for (p, v) in &values {
                    poly.add_term(p.clone(), v[i]);
                }
                poly
            })
            .collect();
        let y: Vec<Cx<T>> = (0..n)
            .map(|i| args[i].terms().map(|(p, c)| *c * p.monomial(&z)).fold(czero::<T>(), |a, b| a + b))
            .collect();
        let scale = T::one() + y.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let kept = self.n_z();
        let mut worst = T::zero();
        for i in 0..n {
            let comp: BTreeMap<MultiIndex, Cx<T>> =
                f.component(i).iter().map(|(m, s)| (m.clone(), s.eval(x))).collect();
            if comp.is_empty() {
                continue;
            }
            let fy = substitute_terms(&comp, &args)?;
            let tail = fy
                .terms()
                .filter(|(p, _)| p.total() > kept)
                .map(|(p, c)| *c * p.monomial(&z))
                .fold(czero::<T>(), |a, b| a + b);
            worst = worst.max(tail.norm() / scale);
        }
        Ok(worst)
    }

    /// Coefficientwise residual of the transseries ansatz substituted into the
    /// original system: for every `|p| ≤ N_Z`,
    /// `x^{1+γ}Y_p′ + (p·λ)Y_p − δ_{p,0}F0 − AY_p − [F(x, Y)]_p`.
    pub fn ansatz_residual(&self) -> Result<T> {
        let order = self.layers.values().flatten().map(Series::order).min().unwrap_or(0);
        let ns = self.n_sub();
        let n = self.original.dim();
        let gm = self.original.gamma();
        let trunc = Truncation::total(ns, self.n_z().max(1));
        let ypoly: Vec<MultiPoly<Series<T>>> = (0..n)
            .map(|i| {
                let mut poly = MultiPoly::new(ns, trunc);
                for (p, v) in &self.layers {
                    poly.add_term(p.clone(), v[i].truncate(order));
                }
                poly
            })
            .collect();
        let f = self.original.nonlinearity().truncate(order);
        let fy = if f.is_zero() {
            vec![MultiPoly::new(ns, trunc); n]
        } else {
            substitute_nonlinearity(&f, &ypoly)?
        };
        let a = self.original.a().truncate(order);
        let lam: Vec<Series<T>> = self.system.lambda()[..ns].iter().map(|l| l.truncate(order)).collect();
        let zero = Series::zero(order);
        let mut worst = T::zero();
        for (p, yp) in &self.layers {
            let yp: Vec<Series<T>> = yp.iter().map(|s| s.truncate(order)).collect();
            let ay = a.mul_vec(&yp)?;
            let weight = p
                .entries()
                .iter()
                .zip(&lam)
                .fold(Series::zero(order), |acc, (&e, l)| &acc + &l.scale(from_usize::<T>(e as usize).into()));
            for i in 0..n {
                let euler = yp[i].euler_apply(gm)?;
                let lin = &weight * &yp[i];
                let f0 = if p.total() == 0 { self.original.f0()[i].truncate(order) } else { zero.clone() };
                let nl = fy[i].get(p).unwrap_or(&zero);
                let r = &(&(&(&euler + &lin) - &f0) - &ay[i]) - nl;
                let mut running = T::zero();
                for m in 0..=order {
                    // products are measured by their inputs so that exact
                    // cancellations leave rounding, not unit, residuals
                    let ay_size = (0..n)
                        .map(|j| (0..=m).map(|k| a.coeff(k)[(i, j)].norm() * yp[j].coeff(m - k).norm()).fold(T::zero(), |s, v| s + v))
                        .fold(T::zero(), |s, v| s + v);
                    let lin_size = (0..=m).map(|k| weight.coeff(k).norm() * yp[i].coeff(m - k).norm()).fold(T::zero(), |s, v| s + v);
                    running = running.max(
                        euler.coeff(m).norm() + lin_size + f0.coeff(m).norm() + ay_size + nl.coeff(m).norm(),
                    );
                    if running > T::zero() {
                        worst = worst.max(r.coeff(m).norm() / running);
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// `Y(x) = Σ_p Y_p(x) Z(x)^p` for `arg x` in the decay region and `|Z| < r_ε`.
pub fn evaluate_transseries<T: Real>(sol: &TransseriesSolution<T>, x: Cx<T>, a_consts: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    sol.evaluate_truncated(x, a_consts, u32::MAX)
}

/// Finite-difference residuals of a candidate solution.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport<T: Real> {
    pub max: T,
    /// Per-sample residual; `None` where the stencil could not be evaluated.
    pub values: Vec<Option<T>>,
    pub skipped: usize,
}

/// Relative step of the finite-difference stencil.
pub const FD_STEP: f64 = 1e-4;

/// `max |x^{1+γ}Y′ − F0 − AY − F(x,Y)| / (1 + |Y|)` with a fourth-order
/// central difference along the ray through each sample.
pub fn residual<T: Real, F>(sys: &NonlinearSystem<T>, solution_fn: F, samples: &[Cx<T>]) -> Result<ResidualReport<T>>
where
    F: Fn(Cx<T>) -> Result<Vec<Cx<T>>>,
{
    let gm = sys.gamma() as i32;
    let mut values = Vec::with_capacity(samples.len());
    let mut skipped = 0;
    let mut max = T::zero();
    for &x in samples {
        let h = x * lit::<T>(FD_STEP);
        let stencil = [-2i32, -1, 1, 2].map(|k| x + h * T::from_i32(k).expect("small integer"));
        let evals: Result<Vec<Vec<Cx<T>>>> = std::iter::once(x).chain(stencil).map(&solution_fn).collect();
        let evals = match evals {
            Ok(v) => v,
            Err(e) => {
                log::warn!("residual sample at {x} skipped: {e}");
                skipped += 1;
                values.push(None);
                continue;
            }
        };
        let y = &evals[0];
        let rhs = sys.rhs(x, y);
        let xg = x.powi(gm + 1);
        let denom = h * lit::<T>(12.0);
        let size = T::one() + y.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        let r = (0..y.len())
            .map(|i| {
                let d = (evals[1][i] - evals[2][i] * lit::<T>(8.0) + evals[3][i] * lit::<T>(8.0) - evals[4][i]) / denom;
                (xg * d - rhs[i]).norm() / size
            })
            .fold(T::zero(), T::max);
        max = max.max(r);
        values.push(Some(r));
    }
    if skipped == samples.len() && !samples.is_empty() {
        return Err(Error::NoSignal);
    }
    Ok(ResidualReport { max, values, skipped })
}
