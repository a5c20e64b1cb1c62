//! The conjugating map `Φ(x, Z)` of a diagonal system
//! `x^{1+γ}Y′ = Λ(x)Y + f(x, Y)`, its ε-graded construction, majorant
//! certificates, and summed transseries solutions.

mod majorant;
mod solution;

pub use majorant::{
    domination_check, estimate_bounds, majorant_certificate, BoundConstants, DominationReport, MajorantCertificate,
    RadiusCheck,
};
pub use solution::{evaluate_transseries, residual, solve, ResidualReport, SolveOptions, TransseriesSolution, FD_STEP};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_series::{
    serialize_entries, substitute_nonlinearity, CoeffTable, MatSeries, MultiIndex, MultiPoly, Nonlinearity, Series, Truncation,
};
use crate::gauge::GaugeTransform;
use crate::reduction::NonlinearSystem;
use crate::scalar::{czero, from_usize, lit, to_f64, Cx, Real};
use crate::spectral::{check_conditions, CertificateStatus, ConditionCertificate, SpectralData};

/// Divisors `Σp_jλ_j − λ_i` below this (relative to `max|λ|`) count as resonant.
pub const RESONANCE_TOL: f64 = 1e-10;

/// `x^{1+γ}Y′ = Λ(x)Y + f(x, Y)` with `Λ` diagonal polynomial and `f(0, Y) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct DiagonalSystem<T: Real> {
    gamma: u32,
    lambda: Vec<Series<T>>,
    f: Nonlinearity<T>,
}

impl<T: Real> DiagonalSystem<T> {
    pub fn new(gamma: u32, lambda: Vec<Series<T>>, f: Nonlinearity<T>) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Precondition("Poincaré rank must be positive".into()));
        }
        if lambda.len() != f.dim() {
            return Err(Error::Shape(format!(
                "{} eigenvalue polynomials for a {}-dimensional nonlinearity",
                lambda.len(),
                f.dim()
            )));
        }
        if lambda
            .iter()
            .any(|l| l.coeffs().iter().skip(gamma as usize + 1).any(|c| *c != czero()))
        {
            return Err(Error::Precondition(format!("λ_i(x) must have degree ≤ {gamma}")));
        }
        let scale = f.terms().map(|(_, _, s)| s.max_abs()).fold(T::one(), T::max);
        if !f.vanishes_at_origin(crate::formal_series::vanishing_tol::<T>() * scale) {
            return Err(Error::Precondition("nonlinearity must vanish at x = 0".into()));
        }
        Ok(DiagonalSystem { gamma, lambda, f })
    }

    /// Conjugate the recentred system by the gauge: `f̃ = T⁻¹G(x, TZ)`.
    pub fn from_gauge(sys: &NonlinearSystem<T>, gauge: &GaugeTransform<T>) -> Result<Self> {
        let order = gauge.order().min(sys.order());
        let t = gauge.matrix().truncate(order);
        let t_inv = t.inverse()?;
        let f = conjugate_nonlinearity(sys.nonlinearity(), &t, &t_inv)?;
        let lambda = gauge.lambda.iter().map(|l| l.truncate(order)).collect();
        Self::new(sys.gamma(), lambda, f)
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[Series<T>] {
        &self.lambda
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.f
    }

    pub fn order(&self) -> usize {
        let lo = self.lambda.iter().map(Series::order).min().unwrap_or(0);
        self.f.min_order().map_or(lo, |o| o.min(lo))
    }

    pub fn eigenvalues(&self) -> Vec<Cx<T>> {
        self.lambda.iter().map(|l| l.coeff(0)).collect()
    }

    /// Coefficients `μ_0..μ_γ` of `Σ_j p_jλ_j(x) − λ_i(x)`.
    pub fn divisor_poly(&self, i: usize, p: &MultiIndex) -> Vec<Cx<T>> {
        (0..=self.gamma as usize)
            .map(|l| {
                let s: Cx<T> = p
                    .entries()
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| self.lambda[j].coeff(l) * from_usize::<T>(e as usize))
                    .fold(czero(), |a, b| a + b);
                s - self.lambda[i].coeff(l)
            })
            .collect()
    }

    /// Spectral data of `Λ(0)` with the identity as eigenvector matrix.
    pub fn spectral(&self) -> Result<SpectralData<T>> {
        SpectralData::from_eigenvalues(self.eigenvalues(), self.gamma, lit(crate::spectral::DEFAULT_SEP_TOL))
    }

    /// Run the condition checks for the leading `n_sub` components.
    pub fn certify(&self, n_sub: usize, m_max: u32) -> Result<ConditionCertificate<T>> {
        let spec = self.spectral()?;
        check_conditions(&spec, &(0..n_sub).collect::<Vec<_>>(), m_max)
    }
}

/// `T⁻¹ G(x, T Z)` as a polynomial nonlinearity in `Z`.
pub fn conjugate_nonlinearity<T: Real>(g: &Nonlinearity<T>, t: &MatSeries<T>, t_inv: &MatSeries<T>) -> Result<Nonlinearity<T>> {
    let n = g.dim();
    if g.is_zero() {
        return Ok(Nonlinearity::zero(n));
    }
    let order = t.order();
    let trunc = Truncation::total(n, g.max_degree());
    let args: Vec<MultiPoly<Series<T>>> = (0..n)
        .map(|k| {
            let mut p = MultiPoly::new(n, trunc);
            for j in 0..n {
                p.add_term(MultiIndex::unit(n, j), t.entry(k, j));
            }
            p
        })
        .collect();
    let g = g.truncate(order);
    let gz = substitute_nonlinearity(&g, &args)?;
    let mut out = Nonlinearity::zero(n);
    for i in 0..n {
        let mut acc: BTreeMap<MultiIndex, Series<T>> = BTreeMap::new();
        for (k, gk) in gz.iter().enumerate() {
            let tik = t_inv.entry(i, k);
            if tik.is_zero() {
                continue;
            }
            for (m, c) in gk.terms() {
                let v = &tik * c;
                acc.entry(m.clone())
                    .and_modify(|s| *s = &*s + &v)
                    .or_insert(v);
            }
        }
        for (m, c) in acc {
            if !c.is_zero() {
                out.add_term(i, m, c)?;
            }
        }
    }
    Ok(out)
}

/// The error a failed certificate maps to, if any.
pub(crate) fn status_error<T: Real>(cert: &ConditionCertificate<T>) -> Option<Error> {
    match &cert.status {
        CertificateStatus::Passed => None,
        CertificateStatus::SectorTooWide { half_angle } => {
            Some(Error::NoHalfPlane(format!("half-angle {}", to_f64(*half_angle))))
        }
        CertificateStatus::Resonant { component, index, value } => Some(Error::Resonance {
            component: *component,
            index: index.entries().to_vec(),
            divisor: to_f64(*value),
        }),
        CertificateStatus::NoAdmissibleSector => {
            Some(Error::Precondition("certificate has no admissible sector".into()))
        }
    }
}

fn require_certificate<T: Real>(sys: &DiagonalSystem<T>, cert: &ConditionCertificate<T>) -> Result<usize> {
    if let Some(e) = status_error(cert) {
        return Err(e);
    }
    let n_sub = cert.subset.len();
    if cert.subset != (0..n_sub).collect::<Vec<_>>() || n_sub > sys.dim() {
        return Err(Error::Precondition(
            "the certified subset must be the leading components of the diagonal system".into(),
        ));
    }
    Ok(n_sub)
}

fn check_divisor<T: Real>(sys: &DiagonalSystem<T>, i: usize, p: &MultiIndex, mu0: Cx<T>) -> Result<()> {
    let scale = sys.eigenvalues().iter().map(|l| l.norm()).fold(T::zero(), T::max);
    if mu0.norm() <= lit::<T>(RESONANCE_TOL) * scale.max(T::min_positive_value()) {
        return Err(Error::Resonance {
            component: i,
            index: p.entries().to_vec(),
            divisor: to_f64(mu0.norm()),
        });
    }
    Ok(())
}

/// Solve `(x^{1+γ}d/dx + μ(x))c = r` order by order; `μ` holds `μ_0..μ_γ`.
fn solve_layer<T: Real>(mu: &[Cx<T>], r: &Series<T>, gamma: u32, order: usize) -> Result<Series<T>> {
    let g = gamma as usize;
    let mut c = vec![czero(); order + 1];
    for m in 0..=order {
        let mut acc = r.coeff(m);
        if m > g {
            acc -= c[m - g] * from_usize::<T>(m - g);
        }
        for (l, mul) in mu.iter().enumerate().skip(1) {
            if l <= m {
                acc -= *mul * c[m - l];
            }
        }
        c[m] = acc / mu[0];
    }
    Series::new(c)
}

fn identity_layer<T: Real>(n: usize, n_sub: usize, nvars: usize, trunc: Truncation, order: usize) -> Vec<MultiPoly<Series<T>>> {
    (0..n)
        .map(|i| {
            let mut p = MultiPoly::new(nvars, trunc);
            if i < n_sub {
                p.add_term(MultiIndex::unit(nvars, i), Series::one(order));
            }
            p
        })
        .collect()
}

/// Collapsed recursion for `C_{i,p}(x)`, `2 ≤ |p| ≤ n_z`, through `x^{n_x}`.
pub fn phi_coefficients<T: Real>(
    sys: &DiagonalSystem<T>,
    cert: &ConditionCertificate<T>,
    n_z: u32,
    n_x: usize,
) -> Result<CoeffTable<T>> {
    let n_sub = require_certificate(sys, cert)?;
    let n = sys.dim();
    if n_x > sys.order() {
        return Err(Error::DegenerateOrder(format!(
            "requested order {n_x} exceeds system order {}",
            sys.order()
        )));
    }
    let f = sys.f.truncate(n_x);
    let mut table = CoeffTable::new(n, n_sub, n_z);
    if f.is_zero() {
        return Ok(table);
    }
    let mut phi = identity_layer(n, n_sub, n_sub, Truncation::total(n_sub, n_z), n_x);
    for d in 2..=n_z {
        let trunc = Truncation::total(n_sub, d);
        let args: Vec<_> = phi.iter().map(|p| p.retruncated(trunc)).collect();
        let rhs = substitute_nonlinearity(&f, &args)?;
        for p in MultiIndex::with_total(n_sub, d) {
            let mut values = Vec::with_capacity(n);
            for (i, r) in rhs.iter().enumerate() {
                let mu = sys.divisor_poly(i, &p);
                check_divisor(sys, i, &p, mu[0])?;
                let zero = Series::zero(n_x);
                values.push(solve_layer(&mu, r.get(&p).unwrap_or(&zero), sys.gamma, n_x)?);
            }
            for (i, v) in values.iter().enumerate() {
                phi[i].add_term(p.clone(), v.clone());
            }
            table.insert(p, values)?;
        }
    }
    Ok(table)
}

/// ε-graded coefficients `C_{i,p,q}(x)`, `1 ≤ q ≤ n_q`.
#[derive(Clone, Debug, Serialize)]
pub struct GradedTable<T: Real> {
    pub n: usize,
    pub n_sub: usize,
    pub n_z: u32,
    pub n_q: u32,
    /// `(p, q) ↦ (C_{1,p,q}, …, C_{n,p,q})`.
    #[serde(serialize_with = "serialize_entries")]
    pub layers: BTreeMap<(MultiIndex, u32), Vec<Series<T>>>,
}

impl<T: Real> GradedTable<T> {
    pub fn get(&self, p: &MultiIndex, q: u32) -> Option<&Vec<Series<T>>> {
        self.layers.get(&(p.clone(), q))
    }

    /// `Σ_q C_{i,p,q}` (the value at `ε = 1`).
    pub fn collapsed(&self, order: usize) -> CoeffTable<T> {
        let mut table = CoeffTable::new(self.n, self.n_sub, self.n_z);
        for p in MultiIndex::with_total_between(self.n_sub, 2, self.n_z) {
            let mut acc = vec![Series::zero(order); self.n];
            for q in 1..=self.n_q {
                if let Some(v) = self.get(&p, q) {
                    for (a, s) in acc.iter_mut().zip(v) {
                        *a = &*a + s;
                    }
                }
            }
            table.insert(p, acc).expect("indices in range");
        }
        table
    }
}

/// Graded recursion: `(x^{1+γ}d/dx + μ_0)C_{i,p,q} = −μ*(x)C_{i,p,q−1} + [f(x, Ψ + U)]_{Z^p ε^{q−1}}`.
pub fn phi_coefficients_graded<T: Real>(
    sys: &DiagonalSystem<T>,
    cert: &ConditionCertificate<T>,
    n_z: u32,
    n_q: u32,
    n_x: usize,
) -> Result<GradedTable<T>> {
    let n_sub = require_certificate(sys, cert)?;
    let n = sys.dim();
    if n_x > sys.order() {
        return Err(Error::DegenerateOrder(format!(
            "requested order {n_x} exceeds system order {}",
            sys.order()
        )));
    }
    let f = sys.f.truncate(n_x);
    let nv = n_sub + 1;
    let lift = |p: &MultiIndex, q: u32| p.concat(&MultiIndex::new(vec![q]));
    let mut out = GradedTable {
        n,
        n_sub,
        n_z,
        n_q,
        layers: BTreeMap::new(),
    };
    let mut phi = identity_layer(n, n_sub, nv, Truncation::graded(n_sub, n_z, n_q), n_x);
    let keys = MultiIndex::with_total_between(n_sub, 2, n_z);
    for q in 1..=n_q {
        let trunc = Truncation::graded(n_sub, n_z, q - 1);
        let args: Vec<_> = phi.iter().map(|p| p.retruncated(trunc)).collect();
        let rhs = if f.is_zero() {
            vec![MultiPoly::new(nv, trunc); n]
        } else {
            substitute_nonlinearity(&f, &args)?
        };
        let mut new_terms = Vec::new();
        for p in &keys {
            let mut values = Vec::with_capacity(n);
            for (i, r) in rhs.iter().enumerate() {
                let mu = sys.divisor_poly(i, p);
                check_divisor(sys, i, p, mu[0])?;
                let mut rr = r.get(&lift(p, q - 1)).cloned().unwrap_or_else(|| Series::zero(n_x));
                if q > 1 {
                    if let Some(prev) = out.get(p, q - 1) {
                        // −μ*(x)·C_{i,p,q−1}, μ* = μ − μ_0
                        let mut star = mu.clone();
                        star[0] = czero();
                        let mstar = Series::polynomial(&star, n_x)?;
                        rr = &rr - &(&mstar * &prev[i]);
                    }
                }
                values.push(solve_layer(&mu[..1], &rr, sys.gamma, n_x)?);
            }
            new_terms.push((p.clone(), values));
        }
        for (p, values) in new_terms {
            for (i, v) in values.iter().enumerate() {
                if !v.is_zero() {
                    phi[i].add_term(lift(&p, q), v.clone());
                }
            }
            out.layers.insert((p, q), values);
        }
    }
    Ok(out)
}

/// Per-coefficient size of the functional-equation residual.
#[derive(Clone, Debug, Serialize)]
pub struct PhiResidual<T: Real> {
    /// Largest `|R_{i,p,m}|` divided by the size of the terms entering it.
    pub max_relative: T,
    pub max_absolute: T,
    /// Component, index and x-order of the worst coefficient.
    pub worst: Option<(usize, MultiIndex, usize)>,
}

/// `Φ = Ψ + Σ C_p Z^p` as polynomials in `Z`.
pub fn phi_polynomials<T: Real>(table: &CoeffTable<T>, order: usize) -> Vec<MultiPoly<Series<T>>> {
    let (n, n_sub) = (table.dim(), table.sub_dim());
    let mut phi = identity_layer(n, n_sub, n_sub, Truncation::total(n_sub, table.max_total_degree().max(1)), order);
    for (p, values) in table.iter() {
        for (i, v) in values.iter().enumerate() {
            phi[i].add_term(p.clone(), v.truncate(order));
        }
    }
    phi
}

/// Residual of `x^{1+γ}∂_xφ_i + Σ_j λ_j(x)z_j∂_jφ_i − λ_i(x)φ_i − f_i(x, Φ)`
/// through `Z`-degree `n_z` and `x`-order `n_x`.
pub fn phi_residual<T: Real>(sys: &DiagonalSystem<T>, table: &CoeffTable<T>, n_x: usize) -> Result<PhiResidual<T>> {
    let (n, n_sub) = (table.dim(), table.sub_dim());
    let n_z = table.max_total_degree().max(1);
    let phi = phi_polynomials(table, n_x);
    let f = sys.f.truncate(n_x);
    let fphi = if f.is_zero() {
        vec![MultiPoly::new(n_sub, Truncation::total(n_sub, n_z)); n]
    } else {
        substitute_nonlinearity(&f, &phi)?
    };
    let lam: Vec<Series<T>> = sys.lambda.iter().map(|l| l.truncate(n_x)).collect();
    let mut report = PhiResidual {
        max_relative: T::zero(),
        max_absolute: T::zero(),
        worst: None,
    };
    for i in 0..n {
        let mut keys: Vec<MultiIndex> = phi[i].terms().map(|(k, _)| k.clone()).collect();
        keys.extend(fphi[i].terms().map(|(k, _)| k.clone()));
        keys.sort();
        keys.dedup();
        for p in keys {
            let zero = Series::zero(n_x);
            let c = phi[i].get(&p).unwrap_or(&zero);
            let euler = c.euler_apply(sys.gamma)?;
            let mut weight = Series::zero(n_x);
            for (j, &e) in p.entries().iter().enumerate() {
                if e > 0 {
                    weight = &weight + &lam[j].scale(from_usize::<T>(e as usize).into());
                }
            }
            let weight = &weight - &lam[i];
            let linear = &weight * c;
            let fp = fphi[i].get(&p).unwrap_or(&zero);
            let r = &(&euler + &linear) - fp;
            let mut running = T::zero();
            for m in 0..=n_x {
                running = running
                    .max(euler.coeff(m).norm() + linear.coeff(m).norm() + fp.coeff(m).norm());
                let abs = r.coeff(m).norm();
                let rel = abs / running.max(T::min_positive_value());
                report.max_absolute = report.max_absolute.max(abs);
                if abs > T::zero() && rel > report.max_relative {
                    report.max_relative = rel;
                    report.worst = Some((i, p.clone(), m));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn c(re: f64) -> Cx<f64> {
        cx(re, 0.0)
    }

    fn scalar_model(lambda: f64, order: usize) -> DiagonalSystem<f64> {
        let mut f = Nonlinearity::zero(1);
        f.add_term(0, MultiIndex::new(vec![2]), Series::monomial(c(1.0), 1, order)).unwrap();
        DiagonalSystem::new(1, vec![Series::constant(c(lambda), order)], f).unwrap()
    }

    #[test]
    fn scalar_model_leading_coefficient() {
        let sys = scalar_model(2.0, 10);
        let cert = sys.certify(1, 20).unwrap();
        let table = phi_coefficients(&sys, &cert, 4, 10).unwrap();
        let c2 = &table.get(&MultiIndex::new(vec![2])).unwrap()[0];
        assert_eq!(c2.coeff(0), c(0.0));
        assert!((c2.coeff(1) - c(0.5)).norm() < 1e-15);
        let res = phi_residual(&sys, &table, 10).unwrap();
        assert!(res.max_relative < 1e-13, "{:?}", res);
    }

    #[test]
    fn zero_nonlinearity_gives_empty_table() {
        let sys = DiagonalSystem::new(2, vec![Series::constant(c(1.0), 6)], Nonlinearity::zero(1)).unwrap();
        let cert = sys.certify(1, 10).unwrap();
        assert!(phi_coefficients(&sys, &cert, 4, 6).unwrap().is_empty());
        let g = phi_coefficients_graded(&sys, &cert, 4, 3, 6).unwrap();
        assert!(g.layers.values().flatten().all(Series::is_zero));
    }

    #[test]
    fn graded_first_layer_and_collapse() {
        let order = 10;
        let mut f = Nonlinearity::zero(2);
        f.add_term(0, MultiIndex::new(vec![2, 0]), Series::polynomial(&[c(0.0), c(1.0), c(0.5)], order).unwrap()).unwrap();
        f.add_term(0, MultiIndex::new(vec![1, 1]), Series::monomial(c(-0.7), 1, order)).unwrap();
        f.add_term(1, MultiIndex::new(vec![3, 0]), Series::monomial(c(0.3), 2, order)).unwrap();
        f.add_term(1, MultiIndex::new(vec![0, 2]), Series::monomial(c(1.1), 1, order)).unwrap();
        let lam = vec![
            Series::polynomial(&[c(1.0), c(0.25)], order).unwrap(),
            Series::polynomial(&[c(-1.5), c(0.5)], order).unwrap(),
        ];
        let sys = DiagonalSystem::new(1, lam, f).unwrap();
        let cert = sys.certify(1, 20).unwrap();
        assert!(cert.passed());
        let g = phi_coefficients_graded(&sys, &cert, 5, order as u32, order).unwrap();
        // q = 1: only h_{i,p} drives the layer, with the constant divisor
        let p = MultiIndex::new(vec![2]);
        let h = &Series::polynomial(&[c(0.0), c(1.0), c(0.5)], order).unwrap();
        let mu = vec![c(2.0 - 1.0)];
        let expect = solve_layer(&mu, h, 1, order).unwrap();
        assert!(g.get(&p, 1).unwrap()[0].approx_eq(&expect, 1e-15));
        let collapsed = phi_coefficients(&sys, &cert, 5, order).unwrap();
        for (p, v) in collapsed.iter() {
            let sum = &g.collapsed(order);
            for (a, b) in v.iter().zip(sum.get(p).unwrap()) {
                assert!(a.rel_diff(b) < 1e-12, "{p}: {}", a.rel_diff(b));
            }
        }
        assert!(phi_residual(&sys, &collapsed, order).unwrap().max_relative < 1e-12);
    }

    #[test]
    fn missing_certificate_and_resonance() {
        let sys = scalar_model(2.0, 6);
        let spec = SpectralData::from_eigenvalues(vec![c(2.0)], 1, 1e-10).unwrap();
        let mut cert = check_conditions(&spec, &[0], 10).unwrap();
        cert.status = CertificateStatus::SectorTooWide { half_angle: 2.0 };
        assert!(phi_coefficients(&sys, &cert, 3, 6).is_err());
        // λ = (1, 2): 2·λ₁ = λ₂
        let mut f = Nonlinearity::zero(2);
        f.add_term(1, MultiIndex::new(vec![2, 0]), Series::monomial(c(1.0), 1, 6)).unwrap();
        let sys = DiagonalSystem::new(1, vec![Series::constant(c(1.0), 6), Series::constant(c(2.0), 6)], f).unwrap();
        let cert = sys.certify(1, 10).unwrap();
        assert!(matches!(cert.status, CertificateStatus::Resonant { .. }));
        assert!(matches!(phi_coefficients(&sys, &cert, 3, 6), Err(Error::Resonance { .. })));
    }
}
