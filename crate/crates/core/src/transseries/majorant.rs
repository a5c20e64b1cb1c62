//! Majorant series for the ε-graded Borel coefficients.
//!
//! `M_{i,p,q}` is computed twice: by the explicit recursion over factor
//! compositions, and as the Taylor coefficients `u_{i,p,q}` of the solution
//! of `u_i = sAu_i + sCG_i(Z, U) + sCH_i(Z)`. The two must agree.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{DiagonalSystem, GradedTable};
use crate::borel_laplace::{borel_transform, check_growth_bound, GrowthBound};
use crate::error::{Error, Result};
use crate::formal_series::{serialize_entries, substitute_nonlinearity, substitute_terms, MultiIndex, MultiPoly, Series, Truncation};
use crate::scalar::{cis, from_usize, gamma, lit, to_f64, Cx, Real};
use crate::spectral::ConditionCertificate;

/// Exponential rate `c` in the bounds `|ĝ(ξ)| ≤ G|ξ|^{1−γ}e^{c|ξ|^γ}/Γ(1/γ)`.
pub const DEFAULT_EXP_RATE: f64 = 1.0;
/// Outer radius of the ξ-samples used for the sup estimates.
pub const DEFAULT_SAMPLE_RADIUS: f64 = 1.0;
const RAY_SAMPLES: usize = 40;
/// Tail budget defining `r_ε`.
pub const TAIL_BUDGET: f64 = 1e-9;
/// Route agreement tolerance (relative).
pub const ROUTE_TOL: f64 = 1e-12;

/// `(component, k ∈ ℕ^{n′}, ℓ ∈ ℕ^n) ↦ G`.
pub type GTable = BTreeMap<(usize, MultiIndex, MultiIndex), f64>;
/// `(component, p) ↦ H`.
pub type HTable = BTreeMap<(usize, MultiIndex), f64>;
/// `(component, p, q) ↦ M`.
pub type MTable = BTreeMap<(usize, MultiIndex, u32), f64>;

/// Constants entering the majorant recursion.
#[derive(Clone, Debug, Serialize)]
pub struct BoundConstants {
    pub n: usize,
    pub n_sub: usize,
    pub gamma: u32,
    #[serde(serialize_with = "serialize_entries")]
    pub g: GTable,
    #[serde(serialize_with = "serialize_entries")]
    pub h: HTable,
    /// Coefficient of `M_{i,p,q−1}`.
    pub a: f64,
    /// Multiplier of the `G` and `H` contributions.
    pub c: f64,
    /// Sampled lower bound in `|γξ^γ + Σp_jλ_j − λ_i| ≥ C_inv(|ξ|^γ + |p|)`.
    pub c_inv: f64,
    pub exp_rate: f64,
    pub sample_radius: f64,
}

/// Root-test estimates of the convergence radii of `Σ M Z^p s^q`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RadiusCheck {
    pub z: f64,
    pub s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorantCertificate {
    pub bounds: BoundConstants,
    pub n_z: u32,
    pub n_q: u32,
    /// Route (a): explicit recursion.
    #[serde(serialize_with = "serialize_entries")]
    pub m_table: MTable,
    /// Route (b): coefficients of the implicit-system solution.
    #[serde(serialize_with = "serialize_entries")]
    pub u_table: MTable,
    pub max_route_discrepancy: f64,
    pub routes_agree: bool,
    pub radius_check: RadiusCheck,
    /// Largest `|Z|` whose last-layer majorant mass stays below [`TAIL_BUDGET`].
    pub r_eps: f64,
}

impl MajorantCertificate {
    pub fn a_const(&self) -> f64 {
        self.bounds.a
    }

    pub fn c_const(&self) -> f64 {
        self.bounds.c
    }

    pub fn m(&self, i: usize, p: &MultiIndex, q: u32) -> f64 {
        self.m_table.get(&(i, p.clone(), q)).copied().unwrap_or(0.0)
    }

    /// Both routes from given constants.
    pub fn from_constants(bounds: BoundConstants, n_z: u32, n_q: u32) -> Result<Self> {
        let m_table = recursion_route(&bounds, n_z, n_q);
        let u_table = implicit_route(&bounds, n_z, n_q)?;
        let mut worst = 0.0f64;
        for key in m_table.keys().chain(u_table.keys()) {
            let m = m_table.get(key).copied().unwrap_or(0.0);
            let u = u_table.get(key).copied().unwrap_or(0.0);
            let d = (m - u).abs() / m.abs().max(u.abs()).max(f64::MIN_POSITIVE);
            if d.is_nan() {
                worst = f64::INFINITY;
            } else if m != u {
                worst = worst.max(d);
            }
        }
        if m_table.values().any(|v| !v.is_finite()) {
            return Err(Error::Radius(format!(
                "majorant recursion overflowed at (N_Z, N_q) = ({n_z}, {n_q})"
            )));
        }
        let radius_check = radius_estimates(&bounds, &m_table, n_z, n_q);
        let r_eps = tail_radius(&bounds, &m_table, n_z, n_q);
        Ok(MajorantCertificate {
            bounds,
            n_z,
            n_q,
            m_table,
            u_table,
            max_route_discrepancy: worst,
            routes_agree: worst <= ROUTE_TOL,
            radius_check,
            r_eps,
        })
    }
}

fn ray_points<T: Real>(theta: T, radius: f64) -> Vec<Cx<T>> {
    (1..=RAY_SAMPLES)
        .map(|k| cis(theta) * lit::<T>(radius * k as f64 / RAY_SAMPLES as f64))
        .collect()
}

/// `sup |regular(ξ)| Γ(1/γ) e^{−c|ξ|^γ}` over the ray samples.
fn borel_sup<T: Real>(s: &Series<T>, gamma_rank: u32, pts: &[Cx<T>], rate: f64) -> Result<f64> {
    if s.is_zero() {
        return Ok(0.0);
    }
    let b = borel_transform(s, gamma_rank)?;
    let pade = b.pade(None).ok();
    let g1 = gamma(1.0 / gamma_rank as f64);
    Ok(pts
        .iter()
        .map(|&xi| {
            let v = match &pade {
                Some(p) => p.eval(xi),
                None => b.regular().eval(xi),
            };
            let r = to_f64(xi.norm());
            to_f64(v.norm()) * g1 * (-rate * r.powi(gamma_rank as i32)).exp()
        })
        .fold(0.0, f64::max))
}

/// Sample `G`, `H`, `A` and `C` for the leading `n_sub` components along `theta`.
pub fn estimate_bounds<T: Real>(
    sys: &DiagonalSystem<T>,
    n_sub: usize,
    theta: T,
    n_z: u32,
    n_q: u32,
    n_x: usize,
) -> Result<BoundConstants> {
    let n = sys.dim();
    let gm = sys.gamma();
    let pts = ray_points(theta, DEFAULT_SAMPLE_RADIUS);
    let rate = DEFAULT_EXP_RATE;

    let mut g = GTable::new();
    let mut h = HTable::new();
    let f = sys.nonlinearity().truncate(n_x.min(sys.order()));
    if !f.is_zero() {
        let nv = n_sub + n;
        let trunc = Truncation::total(nv, f.max_degree());
        let order = f.min_order().unwrap_or(n_x);
        let args: Vec<MultiPoly<Series<T>>> = (0..n)
            .map(|j| {
                let mut p = MultiPoly::new(nv, trunc);
                if j < n_sub {
                    p.add_term(MultiIndex::unit(nv, j), Series::one(order));
                }
                p.add_term(MultiIndex::unit(nv, n_sub + j), Series::one(order));
                p
            })
            .collect();
        for (i, comp) in substitute_nonlinearity(&f, &args)?.iter().enumerate() {
            for (m, s) in comp.terms() {
                let (k, l) = m.split(n_sub);
                if k.total() > n_z {
                    continue;
                }
                let bound = borel_sup(s, gm, &pts, rate)?;
                if bound == 0.0 {
                    continue;
                }
                if l.total() == 0 {
                    h.insert((i, k), bound);
                } else {
                    g.insert((i, k, l), bound);
                }
            }
        }
    }

    // divisor lower bound over the sampled ray, every component and 2 ≤ |p| ≤ N_Z
    let mut c_inv = f64::INFINITY;
    for p in MultiIndex::with_total_between(n_sub, 2, n_z) {
        for i in 0..n {
            let mu0 = sys.divisor_poly(i, &p)[0];
            let size = from_usize::<T>(p.total() as usize);
            let ratio = |xi: Cx<T>| {
                let xg = xi.powu(gm);
                to_f64((xg * from_usize::<T>(gm as usize) + mu0).norm() / (xg.norm() + size))
            };
            let at_origin = to_f64(mu0.norm()) / p.total() as f64;
            c_inv = pts.iter().map(|&xi| ratio(xi)).fold(c_inv.min(at_origin), f64::min);
        }
    }
    if !(c_inv > 0.0) || !c_inv.is_finite() {
        return Err(Error::Resonance {
            component: 0,
            index: vec![],
            divisor: c_inv,
        });
    }

    // Σ_l max_j|λ_{j,l}| · r^{l−1} · max_q Γ(q/γ)/Γ((q+l−1)/γ)
    let gf = gm as f64;
    let lam_bound: f64 = (1..=gm as usize)
        .map(|l| {
            let top = sys.lambda().iter().map(|s| to_f64(s.coeff(l).norm())).fold(0.0, f64::max);
            let growth = (2..=n_q.max(2))
                .map(|q| gamma(q as f64 / gf) / gamma((q as f64 + l as f64 - 1.0) / gf))
                .fold(0.0, f64::max);
            top * DEFAULT_SAMPLE_RADIUS.powi(l as i32 - 1) * growth
        })
        .sum();
    Ok(BoundConstants {
        n,
        n_sub,
        gamma: gm,
        g,
        h,
        a: 1.5 * lam_bound / c_inv,
        c: 1.0 / (2.0 * c_inv),
        c_inv,
        exp_rate: rate,
        sample_radius: DEFAULT_SAMPLE_RADIUS,
    })
}

/// Full certificate for a certified diagonal system along `theta`.
pub fn majorant_certificate<T: Real>(
    sys: &DiagonalSystem<T>,
    cert: &ConditionCertificate<T>,
    theta: T,
    n_z: u32,
    n_q: u32,
    n_x: usize,
) -> Result<MajorantCertificate> {
    let n_sub = super::require_certificate(sys, cert)?;
    let bounds = estimate_bounds(sys, n_sub, theta, n_z, n_q, n_x)?;
    MajorantCertificate::from_constants(bounds, n_z, n_q)
}

/// Route (a): `M_{i,p,1} = CH_{i,p}`,
/// `M_{i,p,q} = AM_{i,p,q−1} + C Σ G_{i,k,ℓ} Σ Π M` over ordered factor compositions.
fn recursion_route(b: &BoundConstants, n_z: u32, n_q: u32) -> MTable {
    let keys = MultiIndex::with_total_between(b.n_sub, 2, n_z);
    let mut m = MTable::new();
    for q in 1..=n_q {
        for p in &keys {
            for i in 0..b.n {
                let value = if q == 1 {
                    b.c * b.h.get(&(i, p.clone())).copied().unwrap_or(0.0)
                } else {
                    let prev = m.get(&(i, p.clone(), q - 1)).copied().unwrap_or(0.0);
                    let mut coupled = 0.0;
                    for ((gi, k, l), gv) in b.g.range((i, MultiIndex::zeros(0), MultiIndex::zeros(0))..) {
                        if *gi != i {
                            break;
                        }
                        let Some(rest) = p.checked_sub(k) else { continue };
                        let factors: Vec<usize> = l
                            .entries()
                            .iter()
                            .enumerate()
                            .flat_map(|(s, &e)| std::iter::repeat_n(s, e as usize))
                            .collect();
                        coupled += gv * compositions(&m, &keys, &factors, &rest, q - 1);
                    }
                    b.a * prev + b.c * coupled
                };
                if value != 0.0 {
                    m.insert((i, p.clone(), q), value);
                }
            }
        }
    }
    m
}

/// `Σ Π_j M_{s_j, p_j, q_j}` over ordered tuples with `Σp_j = p`, `Σq_j = q`,
/// `|p_j| ≥ 2`, `q_j ≥ 1`.
fn compositions(m: &MTable, keys: &[MultiIndex], factors: &[usize], p: &MultiIndex, q: u32) -> f64 {
    let Some((&s, rest)) = factors.split_first() else {
        return if p.total() == 0 && q == 0 { 1.0 } else { 0.0 };
    };
    let left = rest.len() as u32;
    if p.total() < 2 * (left + 1) || q < left + 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for pk in keys {
        let Some(p_rem) = p.checked_sub(pk) else { continue };
        for qk in 1..=q - left {
            let v = m.get(&(s, pk.clone(), qk)).copied().unwrap_or(0.0);
            if v != 0.0 {
                acc += v * compositions(m, keys, rest, &p_rem, q - qk);
            }
        }
    }
    acc
}

/// Route (b): iterate `U ← s(AU + CG(Z, U) + CH(Z))` on truncated series in `(Z, s)`.
fn implicit_route(b: &BoundConstants, n_z: u32, n_q: u32) -> Result<MTable> {
    let ns = b.n_sub;
    let nv = ns + 1;
    let trunc = Truncation::graded(ns, n_z, n_q);
    let z_vars: Vec<MultiPoly<f64>> = (0..ns)
        .map(|j| MultiPoly::new(nv, trunc).with_term(MultiIndex::unit(nv, j), 1.0))
        .collect();
    let s_var = MultiPoly::new(nv, trunc).with_term(MultiIndex::unit(nv, ns), 1.0);
    let lift = |k: &MultiIndex| k.concat(&MultiIndex::zeros(1));

    let mut g_maps: Vec<BTreeMap<MultiIndex, f64>> = vec![BTreeMap::new(); b.n];
    for ((i, k, l), v) in &b.g {
        g_maps[*i].insert(k.concat(l), *v);
    }
    let h_polys: Vec<MultiPoly<f64>> = (0..b.n)
        .map(|i| {
            let mut p = MultiPoly::new(nv, trunc);
            for ((hi, k), v) in &b.h {
                if *hi == i {
                    p.add_term(lift(k), *v);
                }
            }
            p
        })
        .collect();

    let mut u: Vec<MultiPoly<f64>> = vec![MultiPoly::new(nv, trunc); b.n];
    // each sweep fixes one more power of s
    for _ in 0..n_q {
        let mut args = z_vars.clone();
        args.extend(u.iter().cloned());
        let next: Result<Vec<_>> = (0..b.n)
            .map(|i| {
                let mut inner = u[i].scale(&b.a).add(&h_polys[i].scale(&b.c));
                if !g_maps[i].is_empty() {
                    inner = inner.add(&substitute_terms(&g_maps[i], &args)?.scale(&b.c));
                }
                Ok(s_var.mul(&inner))
            })
            .collect();
        u = next?;
    }

    let mut out = MTable::new();
    for (i, poly) in u.iter().enumerate() {
        for (k, v) in poly.terms() {
            if !v.is_finite() {
                return Err(Error::Radius(format!(
                    "implicit-system iteration diverged at coefficient {k}"
                )));
            }
            let (p, q) = k.split(ns);
            if *v != 0.0 {
                out.insert((i, p, q.total()), *v);
            }
        }
    }
    Ok(out)
}

fn radius_estimates(b: &BoundConstants, m: &MTable, n_z: u32, n_q: u32) -> RadiusCheck {
    let root = |mass: &dyn Fn(u32) -> f64, range: std::ops::RangeInclusive<u32>| {
        range
            .filter_map(|d| {
                let v = mass(d);
                (v > 0.0).then(|| v.powf(1.0 / d as f64))
            })
            .fold(0.0, f64::max)
    };
    let by_s = |q: u32| {
        (0..b.n)
            .map(|i| m.iter().filter(|((mi, _, mq), _)| *mi == i && *mq == q).map(|(_, v)| v).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let by_z = |d: u32| {
        (0..b.n)
            .map(|i| {
                m.iter()
                    .filter(|((mi, p, _), _)| *mi == i && p.total() == d)
                    .map(|(_, v)| v)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let inv = |r: f64| if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    RadiusCheck {
        z: inv(root(&by_z, 2..=n_z)),
        s: inv(root(&by_s, 1..=n_q)),
    }
}

/// `(budget / w)^{1/d}` with `w` the `Γ(q/γ)`-weighted mass of the highest
/// nonzero layer `d ≤ N_Z`, standing in for the first omitted one; capped at 1.
fn tail_radius(b: &BoundConstants, m: &MTable, n_z: u32, n_q: u32) -> f64 {
    let gf = b.gamma as f64;
    let mass = |d: u32| {
        (0..b.n)
            .map(|i| {
                m.iter()
                    .filter(|((mi, p, q), _)| *mi == i && p.total() == d && *q <= n_q)
                    .map(|((_, _, q), v)| v / gamma(*q as f64 / gf))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    (2..=n_z)
        .rev()
        .map(|d| (d, mass(d)))
        .find(|(_, w)| *w > 0.0)
        .map_or(1.0, |(d, w)| (TAIL_BUDGET / w).powf(1.0 / d as f64).min(1.0))
}

/// Per-coefficient outcome of the sampled domination check.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub radii: Vec<f64>,
    /// Largest `|Ĉ_{i,p,q}(ξ)| / bound` over all samples and coefficients.
    pub max_ratio: f64,
    pub worst: Option<(usize, MultiIndex, u32)>,
    pub checked: usize,
    pub passed: bool,
}

/// Compare Padé-continued `Ĉ_{i,p,q}` with `M_{i,p,q}|ξ|^{q−γ}e^{c|ξ|^γ}/Γ(q/γ)`
/// at `|ξ| ∈ radii` on the ray `theta`.
pub fn domination_check<T: Real>(
    cert: &MajorantCertificate,
    graded: &GradedTable<T>,
    theta: T,
    radii: &[f64],
) -> Result<DominationReport> {
    let gm = cert.bounds.gamma;
    let samples: Vec<Cx<T>> = radii.iter().map(|&r| cis(theta) * lit::<T>(r)).collect();
    let mut report = DominationReport {
        radii: radii.to_vec(),
        max_ratio: 0.0,
        worst: None,
        checked: 0,
        passed: true,
    };
    for ((p, q), values) in &graded.layers {
        if *q > cert.n_q || p.total() > cert.n_z {
            continue;
        }
        for (i, c) in values.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let b = borel_transform(c, gm)?;
            let bound = GrowthBound {
                m: lit::<T>(cert.m(i, p, *q)),
                c: lit::<T>(cert.bounds.exp_rate),
                s: from_usize::<T>(*q as usize),
            };
            let r = check_growth_bound(&b, &bound, &samples)?;
            report.checked += 1;
            let ratio = to_f64(r.max_ratio);
            if ratio > report.max_ratio || ratio.is_nan() {
                report.max_ratio = ratio;
                report.worst = Some((i, p.clone(), *q));
            }
            report.passed &= r.passed;
        }
    }
    Ok(report)
}
