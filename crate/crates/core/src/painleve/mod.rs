//! Painlevé II and IV at `t = ∞` as ready-made first-order systems.
//!
//! Each branch fixes a substitution `t = x^{−ρ}`, `y = c·x^{e} + x^{f}·u`
//! and `v = σ·x^{1+γ}u′`. With `D = x^{1+γ}d/dx` the shifted unknown obeys
//! a second-order equation `D²u = R(x, u, Du)`; the branch builders write
//! `R` in terms of `w = c + u`, `1/w` and `Du`, and the polynomial algebra
//! expands it into the series coefficients of `F0`, `A` and `F`.
//!
//! | branch | ρ | γ | shift | linear block at 0 |
//! |---|---|---|---|---|
//! | P2.1 | 2 | 3 | `y = −a x² + u` | `[[0,2],[2,0]]` |
//! | P2.2 | 2 | 3 | `y = (c+u)/x`, `2c²+1 = 0` | `[[0,2],[−4,0]]` |
//! | P4.1a/b | 1 | 2 | `y = (c+u)/x`, `3c²+8c+4 = 0` | `[[0,1],[−4(c+1),0]]` |
//! | P4.2 | 1 | 2 | `y = x(c+u)`, `2c²+β = 0` | `[[0,1],[4,0]]` |

mod family;
mod rk;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal_series::{MatSeries, MultiIndex, MultiPoly, Nonlinearity, Series, Truncation};
use crate::reduction::{leading_matrix, NonlinearSystem};
use crate::scalar::{angle_diff, cone, creal, czero, from_usize, lit, wrap_angle, Cx, Real};
use crate::spectral::eigen_data;

pub use family::{family_setup, solve_family, FamilyPoint, FamilySetup, FamilySolution, Side};
pub use rk::{integrate, RkOptions};

/// Painlevé equation the preset comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    P2,
    P4,
}

/// Normalisation of the solution near `t = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// P2 around the series `−a/t + …`.
    P21,
    /// P2 around `c·t^{1/2}`, `2c² + 1 = 0`.
    P22,
    /// P4 around `c·t`, `c = −2/3`.
    P41a,
    /// P4 around `c·t`, `c = −2`.
    P41b,
    /// P4 around `c/t`, `2c² + β = 0`.
    P42,
}

impl Branch {
    pub fn family(self) -> Family {
        match self {
            Branch::P21 | Branch::P22 => Family::P2,
            _ => Family::P4,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::P21 => "P2.1",
            Branch::P22 => "P2.2",
            Branch::P41a => "P4.1a",
            Branch::P41b => "P4.1b",
            Branch::P42 => "P4.2",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_prefix('p').unwrap_or(&key);
        match key {
            "2.1" => Ok(Branch::P21),
            "2.2" => Ok(Branch::P22),
            "4.1a" => Ok(Branch::P41a),
            "4.1b" => Ok(Branch::P41b),
            "4.2" => Ok(Branch::P42),
            _ => Err(Error::Precondition(format!(
                "unknown branch {s:?}; expected one of P2.1, P2.2, P4.1a, P4.1b, P4.2"
            ))),
        }
    }
}

/// Which square root a two-valued branch constant takes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum RootSign {
    #[default]
    Plus,
    Minus,
}

/// Assembly knobs shared by all branches.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PresetConfig {
    /// x-order of every assembled series.
    pub order: usize,
    /// Degree cap in `(u, v)` of the expanded `1/(c+u)` factor (P4 only).
    pub n_y: u32,
    /// Root used for P2.2 and P4.2.
    pub root: RootSign,
}

impl Default for PresetConfig {
    fn default() -> Self {
        PresetConfig {
            order: 40,
            n_y: 8,
            root: RootSign::Plus,
        }
    }
}

/// Equation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Params<T: Real> {
    /// `y″ = 2y³ + ty + a`.
    P2 { a: Cx<T> },
    /// `y″ = y′²/(2y) + (3/2)y³ + 4ty² + 2(t² − α)y + β/y`.
    P4 { alpha: Cx<T>, beta: Cx<T> },
}

impl<T: Real> Params<T> {
    /// Individual terms of the right-hand side at `(t, y, y′)`.
    pub fn rhs_terms(&self, t: Cx<T>, y: Cx<T>, yp: Cx<T>) -> Vec<Cx<T>> {
        match *self {
            Params::P2 { a } => vec![y * y * y * lit::<T>(2.0), t * y, a],
            Params::P4 { alpha, beta } => vec![
                yp * yp / (y * lit::<T>(2.0)),
                y * y * y * lit::<T>(1.5),
                t * y * y * lit::<T>(4.0),
                (t * t - alpha) * y * lit::<T>(2.0),
                beta / y,
            ],
        }
    }

    /// `y″` prescribed by the equation.
    pub fn rhs(&self, t: Cx<T>, y: Cx<T>, yp: Cx<T>) -> Cx<T> {
        self.rhs_terms(t, y, yp).into_iter().sum()
    }

    /// `|y″ − rhs| / (1 + |y″| + Σ|terms|)`.
    pub fn scaled_residual(&self, t: Cx<T>, y: Cx<T>, yp: Cx<T>, ypp: Cx<T>) -> T {
        let terms = self.rhs_terms(t, y, yp);
        let scale = T::one() + ypp.norm() + terms.iter().map(|v| v.norm()).sum::<T>();
        let rhs: Cx<T> = terms.into_iter().sum();
        (ypp - rhs).norm() / scale
    }
}

/// Change of variables between `(t, y, dy/dt)` and `(x, u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarMap<T: Real> {
    /// `t = x^{−ρ}`.
    pub rho: u32,
    pub gamma: u32,
    /// `y = shift·x^{shift_pow} + x^{scale_pow}·u`.
    pub shift: Cx<T>,
    pub shift_pow: i32,
    pub scale_pow: i32,
    /// `v = σ·x^{1+γ}·du/dx`.
    pub sigma: T,
}

/// `D x^e = e·x^{e+γ}` for `D = x^{1+γ}d/dx`.
fn d_monomial<T: Real>(x: Cx<T>, e: i32, gamma: u32) -> Cx<T> {
    x.powi(e + gamma as i32) * T::from_i32(e).expect("small integer")
}

impl<T: Real> VarMap<T> {
    pub fn t_of_x(&self, x: Cx<T>) -> Cx<T> {
        x.powi(-(self.rho as i32))
    }

    /// Inverse of [`Self::t_of_x`]; the root nearest `near`, else the principal one.
    pub fn x_of_t(&self, t: Cx<T>, near: Option<Cx<T>>) -> Cx<T> {
        let principal = t.powf(-T::one() / from_usize::<T>(self.rho as usize));
        let Some(hint) = near else { return principal };
        (0..self.rho)
            .map(|k| principal * Cx::from_polar(T::one(), T::TAU() * from_usize::<T>(k as usize) / from_usize(self.rho as usize)))
            .min_by(|a, b| (a - hint).norm().partial_cmp(&(b - hint).norm()).expect("finite roots"))
            .unwrap_or(principal)
    }

    /// `d/dt = −(x^{ρ−γ}/ρ)·D`.
    fn dt_factor(&self, x: Cx<T>) -> Cx<T> {
        -x.powi(self.rho as i32 - self.gamma as i32) / from_usize::<T>(self.rho as usize)
    }

    /// `(x, u, v) ↦ (t, y, dy/dt)`.
    pub fn to_original(&self, x: Cx<T>, u: Cx<T>, v: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>) {
        let y = self.shift * x.powi(self.shift_pow) + x.powi(self.scale_pow) * u;
        let dy = self.shift * d_monomial(x, self.shift_pow, self.gamma)
            + d_monomial(x, self.scale_pow, self.gamma) * u
            + x.powi(self.scale_pow) * v / self.sigma;
        (self.t_of_x(x), y, self.dt_factor(x) * dy)
    }

    /// `(t, y, dy/dt) ↦ (x, u, v)`, with `x` the root nearest `near`.
    pub fn from_original(&self, t: Cx<T>, y: Cx<T>, yp: Cx<T>, near: Option<Cx<T>>) -> (Cx<T>, Cx<T>, Cx<T>) {
        let x = self.x_of_t(t, near);
        let mu = x.powi(self.scale_pow);
        let u = (y - self.shift * x.powi(self.shift_pow)) / mu;
        let dy = yp / self.dt_factor(x);
        let du = (dy - self.shift * d_monomial(x, self.shift_pow, self.gamma) - d_monomial(x, self.scale_pow, self.gamma) * u) / mu;
        (x, u, du * self.sigma)
    }
}

/// A Painlevé branch assembled as `x^{1+γ}(u,v)′ = F0 + A(u,v) + F`.
#[derive(Clone, Debug, Serialize)]
pub struct PainlevePreset<T: Real> {
    pub family: Family,
    pub branch: Branch,
    pub params: Params<T>,
    pub c_root: Cx<T>,
    pub gamma: u32,
    pub system: NonlinearSystem<T>,
    pub var_map: VarMap<T>,
    pub config: PresetConfig,
}

impl<T: Real> PainlevePreset<T> {
    /// `y″` of the original equation.
    pub fn ode_rhs(&self, t: Cx<T>, y: Cx<T>, yp: Cx<T>) -> Cx<T> {
        self.params.rhs(t, y, yp)
    }

    /// The defining polynomial of the branch constant evaluated at `c_root`.
    pub fn branch_defect(&self) -> Cx<T> {
        let c = self.c_root;
        match (self.branch, self.params) {
            (Branch::P21, _) => czero(),
            (Branch::P22, _) => c * c * lit::<T>(2.0) + cone(),
            (Branch::P41a | Branch::P41b, _) => c * c * lit::<T>(3.0) + c * lit::<T>(8.0) + lit::<T>(4.0),
            (Branch::P42, Params::P4 { beta, .. }) => c * c * lit::<T>(2.0) + beta,
            (Branch::P42, Params::P2 { .. }) => unreachable!("P4.2 always carries P4 parameters"),
        }
    }
}

/// Polynomials in `(u, p = Du)` with x-series coefficients.
struct Algebra<T: Real> {
    order: usize,
    trunc: Truncation,
    _scalar: std::marker::PhantomData<T>,
}

type Poly<T> = MultiPoly<Series<T>>;

impl<T: Real> Algebra<T> {
    fn new(order: usize, max_degree: u32) -> Self {
        Algebra {
            order,
            trunc: Truncation::total(2, max_degree),
            _scalar: std::marker::PhantomData,
        }
    }

    fn term(&self, i: u32, j: u32, s: Series<T>) -> Poly<T> {
        MultiPoly::new(2, self.trunc).with_term(MultiIndex::new(vec![i, j]), s)
    }

    /// `c·x^k`.
    fn xk(&self, c: Cx<T>, k: usize) -> Poly<T> {
        self.term(0, 0, Series::monomial(c, k, self.order))
    }

    fn num(&self, c: f64) -> Poly<T> {
        self.xk(creal(lit(c)), 0)
    }

    fn u(&self) -> Poly<T> {
        self.term(1, 0, Series::one(self.order))
    }

    fn p(&self) -> Poly<T> {
        self.term(0, 1, Series::one(self.order))
    }

    /// `1/(c + u) = c⁻¹ Σ_n (−u/c)^n`, cut by the truncation.
    fn recip_shifted(&self, c: Cx<T>) -> Poly<T> {
        let ratio = self.u().scale(&Series::constant(-c.inv(), self.order));
        let mut acc = self.num(1.0);
        let mut power = self.num(1.0);
        for _ in 0..self.trunc.max_head {
            power = power.mul(&ratio);
            acc = acc.add(&power);
        }
        acc.scale(&Series::constant(c.inv(), self.order))
    }
}

fn cube<T: Real>(w: &Poly<T>) -> Poly<T> {
    w.mul(w).mul(w)
}

/// Residue of an exact cancellation allowed before it is reported.
const CANCEL_TOL: f64 = 1e-12;

/// Turn `D²u = R(x, u, Du)` into the first-order system in `(u, v = σDu)`.
fn assemble<T: Real>(gamma: u32, sigma: T, r: &Poly<T>, order: usize) -> Result<NonlinearSystem<T>> {
    let coeff = |i: u32, j: u32| r.get(&MultiIndex::new(vec![i, j])).cloned().unwrap_or_else(|| Series::zero(order));
    let s = creal(sigma);
    let mut f0 = coeff(0, 0).scale(s);
    // the branch constant is a root of the x⁰ part, so it cancels up to rounding
    let c0 = f0.coeff(0);
    let size = r.terms().map(|(_, v)| v.coeff(0).norm()).fold(T::one(), T::max);
    if c0.norm() > lit::<T>(CANCEL_TOL) * size {
        return Err(Error::Precondition(format!("F0(0) = {c0} does not cancel")));
    }
    let mut c = f0.clone().into_coeffs();
    c[0] = czero();
    f0 = Series::new(c)?;

    let a = MatSeries::from_entries(&[
        vec![Series::zero(order), Series::constant(s.inv(), order)],
        vec![coeff(1, 0).scale(s), coeff(0, 1)],
    ])?;
    let mut f = Nonlinearity::zero(2);
    for (k, v) in r.terms() {
        let (i, j) = (k.entries()[0], k.entries()[1]);
        if i + j < 2 || v.is_zero() {
            continue;
        }
        // R_{ij} u^i (v/σ)^j, times σ
        f.add_term(1, MultiIndex::new(vec![i, j]), v.scale(s * s.inv().powi(j as i32)))?;
    }
    NonlinearSystem::new(gamma, vec![Series::zero(order), f0], a, f.pruned())
}

fn two_valued<T: Real>(square: Cx<T>, root: RootSign) -> Cx<T> {
    let c = square.sqrt();
    match root {
        RootSign::Plus => c,
        RootSign::Minus => -c,
    }
}

/// Painlevé II, `y″ = 2y³ + ty + a`, at `t = ∞` in `x = t^{−1/2}`.
pub fn p2_system<T: Real>(a: Cx<T>, branch: Branch, cfg: &PresetConfig) -> Result<PainlevePreset<T>> {
    let n = cfg.order;
    let alg = Algebra::<T>::new(n, 3);
    let (u, p) = (alg.u(), alg.p());
    let (r, c_root, var_map) = match branch {
        Branch::P21 => {
            // y = u − a x²:  D²u = x³Du + 4u + 8x²(u − a x²)³ + 8a x⁸
            let y = u.sub(&alg.xk(a, 2));
            let r = alg
                .xk(cone(), 3)
                .mul(&p)
                .add(&u.scale(&Series::constant(creal(lit(4.0)), n)))
                .add(&alg.xk(creal(lit(8.0)), 2).mul(&cube(&y)))
                .add(&alg.xk(a * lit::<T>(8.0), 8));
            let map = VarMap { rho: 2, gamma: 3, shift: -a, shift_pow: 2, scale_pow: 0, sigma: lit(0.5) };
            (r, czero(), map)
        }
        Branch::P22 => {
            // y = (c + u)/x:  D²u = 3x³Du + x⁶w + 8w³ + 4w + 4a x³
            let c = two_valued(creal(lit(-0.5)), cfg.root);
            let w = alg.xk(c, 0).add(&u);
            let r = alg
                .xk(creal(lit(3.0)), 3)
                .mul(&p)
                .add(&alg.xk(cone(), 6).mul(&w))
                .add(&cube(&w).scale(&Series::constant(creal(lit(8.0)), n)))
                .add(&w.scale(&Series::constant(creal(lit(4.0)), n)))
                .add(&alg.xk(a * lit::<T>(4.0), 3));
            let map = VarMap { rho: 2, gamma: 3, shift: c, shift_pow: -1, scale_pow: -1, sigma: lit(0.5) };
            (r, c, map)
        }
        other => {
            return Err(Error::Precondition(format!("{other} is not a Painlevé II branch")));
        }
    };
    let system = assemble(3, lit(0.5), &r, n)?;
    Ok(PainlevePreset {
        family: Family::P2,
        branch,
        params: Params::P2 { a },
        c_root,
        gamma: 3,
        system,
        var_map,
        config: *cfg,
    })
}

/// Painlevé IV at `t = ∞` in `x = 1/t`.
pub fn p4_system<T: Real>(alpha: Cx<T>, beta: Cx<T>, branch: Branch, cfg: &PresetConfig) -> Result<PainlevePreset<T>> {
    let n = cfg.order;
    let alg = Algebra::<T>::new(n, cfg.n_y.max(3));
    let (u, p) = (alg.u(), alg.p());
    let k = |v: f64| Series::constant(creal(lit::<T>(v)), n);
    let (r, c, var_map) = match branch {
        Branch::P41a | Branch::P41b => {
            let c = creal(lit(if branch == Branch::P41a { -2.0 / 3.0 } else { -2.0 }));
            let w = alg.xk(c, 0).add(&u);
            let inv_w = alg.recip_shifted(c);
            // y = (c + u)/x:
            // D²u = 3x²Du + (Du − x²w)²/(2w) + (3/2)w³ + 4w² + 2(1 − αx²)w + βx⁴/w
            let q = p.sub(&alg.xk(cone(), 2).mul(&w));
            let r = alg
                .xk(creal(lit(3.0)), 2)
                .mul(&p)
                .add(&q.mul(&q).mul(&inv_w).scale(&k(0.5)))
                .add(&cube(&w).scale(&k(1.5)))
                .add(&w.mul(&w).scale(&k(4.0)))
                .add(&alg.num(2.0).sub(&alg.xk(alpha * lit::<T>(2.0), 2)).mul(&w))
                .add(&alg.xk(beta, 4).mul(&inv_w));
            let map = VarMap { rho: 1, gamma: 2, shift: c, shift_pow: -1, scale_pow: -1, sigma: T::one() };
            (r, c, map)
        }
        Branch::P42 => {
            if beta.norm() == T::zero() {
                return Err(Error::Precondition("P4.2 needs β ≠ 0".into()));
            }
            let c = two_valued(-beta / lit::<T>(2.0), cfg.root);
            let w = alg.xk(c, 0).add(&u);
            let inv_w = alg.recip_shifted(c);
            // y = x(c + u):
            // D²u = −x²Du − 2x⁴w + (x²w + Du)²/(2w) + (3/2)x⁴w³ + 4x²w² + 2w − 2αx²w + β/w
            let q = p.add(&alg.xk(cone(), 2).mul(&w));
            let r = alg
                .xk(creal(lit(-1.0)), 2)
                .mul(&p)
                .sub(&alg.xk(creal(lit(2.0)), 4).mul(&w))
                .add(&q.mul(&q).mul(&inv_w).scale(&k(0.5)))
                .add(&alg.xk(creal(lit(1.5)), 4).mul(&cube(&w)))
                .add(&alg.xk(creal(lit(4.0)), 2).mul(&w.mul(&w)))
                .add(&w.scale(&k(2.0)))
                .sub(&alg.xk(alpha * lit::<T>(2.0), 2).mul(&w))
                .add(&inv_w.scale(&Series::constant(beta, n)));
            let map = VarMap { rho: 1, gamma: 2, shift: c, shift_pow: 1, scale_pow: 1, sigma: T::one() };
            (r, c, map)
        }
        other => {
            return Err(Error::Precondition(format!("{other} is not a Painlevé IV branch")));
        }
    };
    // the 1/(c+u) expansion converges for |u| < |c|
    let system = assemble(2, T::one(), &r, n)?.with_radius(c.norm());
    Ok(PainlevePreset {
        family: Family::P4,
        branch,
        params: Params::P4 { alpha, beta },
        c_root: c,
        gamma: 2,
        system,
        var_map,
        config: *cfg,
    })
}

/// Antipodal-eigenvalue check for a 2×2 system and its singular directions.
#[derive(Clone, Debug, Serialize)]
pub struct AntipodalReport<T: Real> {
    pub passed: bool,
    pub eigenvalues: Vec<Cx<T>>,
    pub gamma: u32,
    /// `arg λ₁ ∈ (−π/2, π/2]`.
    pub omega: T,
    /// `{(ω + ℓπ)/γ}` in `[0, 2π)`.
    pub directions: Vec<T>,
    pub reason: Option<String>,
}

/// Angular slack when testing `arg λ₂ = arg λ₁ + π`.
const ANTIPODAL_TOL: f64 = 1e-10;

/// Both eigenvalues nonzero and `arg λ₂ = arg λ₁ + π`.
pub fn check_antipodal<T: Real>(eigenvalues: &[Cx<T>], gamma: u32) -> AntipodalReport<T> {
    let fail = |reason: String| AntipodalReport {
        passed: false,
        eigenvalues: eigenvalues.to_vec(),
        gamma,
        omega: T::zero(),
        directions: Vec::new(),
        reason: Some(reason),
    };
    if eigenvalues.len() != 2 {
        return fail(format!("expected two eigenvalues, got {}", eigenvalues.len()));
    }
    if eigenvalues.iter().any(|l| l.norm() == T::zero()) {
        return fail("zero eigenvalue".into());
    }
    let mut l1 = eigenvalues[0];
    if angle_diff(l1.arg(), T::zero()).abs() > T::FRAC_PI_2() + lit(ANTIPODAL_TOL) {
        l1 = eigenvalues[1];
    }
    let omega = angle_diff(l1.arg(), T::zero());
    let gap = angle_diff(eigenvalues[1].arg(), eigenvalues[0].arg()).abs();
    if (gap - T::PI()).abs() > lit(ANTIPODAL_TOL) {
        return fail(format!("eigenvalue arguments differ by {gap}, not π"));
    }
    let g = from_usize::<T>(gamma as usize);
    let mut directions: Vec<T> = (0..2 * gamma)
        .map(|l| wrap_angle((omega + T::PI() * from_usize::<T>(l as usize)) / g))
        .collect();
    directions.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    AntipodalReport {
        passed: true,
        eigenvalues: eigenvalues.to_vec(),
        gamma,
        omega,
        directions,
        reason: None,
    }
}

/// [`check_antipodal`] on the preset's `A(0)`.
pub fn preset_antipodal_report<T: Real>(preset: &PainlevePreset<T>) -> Result<AntipodalReport<T>> {
    let spec = eigen_data(&leading_matrix(&preset.system), preset.gamma)?;
    Ok(check_antipodal(&spec.eigenvalues, preset.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::formal_particular_solution;
    use crate::scalar::cx;

    fn c(v: f64) -> Cx<f64> {
        cx(v, 0.0)
    }

    fn p2(a: Cx<f64>) -> PainlevePreset<f64> {
        p2_system(a, Branch::P21, &PresetConfig::default()).unwrap()
    }

    #[test]
    fn p21_leading_blocks() {
        let pre = p2(c(1.5));
        let a = pre.system.a();
        let a0 = a.coeff(0);
        assert_eq!(a0[(0, 1)], c(2.0));
        assert_eq!(a0[(1, 0)], c(2.0));
        assert_eq!(a.coeff(3)[(1, 1)], c(1.0));
        // 2·6a²s³ in x
        assert!((a.coeff(6)[(1, 0)] - c(12.0 * 1.5 * 1.5)).norm() < 1e-12);
        assert!((pre.system.f0()[1].coeff(8) - c(4.0 * (1.5 - 1.5f64.powi(3)))).norm() < 1e-12);
    }

    #[test]
    fn p2_formal_series_fourth_coefficient() {
        for a in [c(0.0), c(1.0), c(2.0), cx(1.0, 1.0)] {
            let pre = p2(a);
            let k = formal_particular_solution(&pre.system, 20).unwrap();
            // y = −a s + u with s = x²
            let expected = (a * a * a - a) * 2.0;
            assert!((k[0].coeff(8) - expected).norm() < 1e-12, "a = {a}");
            for m in 0..8 {
                assert!(k[0].coeff(m).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn branch_constants_and_blocks() {
        let cfg = PresetConfig::default();
        for root in [RootSign::Plus, RootSign::Minus] {
            let pre = p2_system(c(0.3), Branch::P22, &PresetConfig { root, ..cfg }).unwrap();
            assert!(pre.branch_defect().norm() < 1e-14);
            let a0 = pre.system.a().coeff(0).clone();
            assert_eq!(a0[(0, 1)], c(2.0));
            assert!((a0[(1, 0)] + c(4.0)).norm() < 1e-14);
        }
        for (branch, lin) in [(Branch::P41a, -4.0 / 3.0), (Branch::P41b, 4.0)] {
            let pre = p4_system(c(0.7), c(0.2), branch, &cfg).unwrap();
            assert!(pre.branch_defect().norm() < 1e-14);
            let a = pre.system.a();
            assert!((a.coeff(0)[(1, 0)] - c(lin)).norm() < 1e-14);
            assert!((a.coeff(2)[(1, 0)] + c(1.4)).norm() < 1e-14);
            assert!((a.coeff(2)[(1, 1)] - c(2.0)).norm() < 1e-14);
            let h = &pre.system.f0()[1];
            assert_eq!(h.coeff(0), c(0.0));
            assert_eq!(h.coeff(1), c(0.0));
            assert!((h.coeff(2) + pre.c_root * 1.4).norm() < 1e-14);
        }
        let pre = p4_system(c(0.7), c(0.5), Branch::P42, &cfg).unwrap();
        assert!(pre.branch_defect().norm() < 1e-14);
        let a = pre.system.a();
        assert_eq!(a.coeff(0)[(1, 0)], c(4.0));
        assert!((a.coeff(2)[(1, 0)] - (pre.c_root * 8.0 - 1.4)).norm() < 1e-14);
        assert_eq!(a.coeff(2)[(1, 1)], c(0.0));
        assert_eq!(
            p4_system(c(0.7), c(0.0), Branch::P42, &cfg).unwrap_err(),
            Error::Precondition("P4.2 needs β ≠ 0".into())
        );
        assert!(p2_system(c(1.0), Branch::P42, &cfg).is_err());
    }

    #[test]
    fn eigenvalues_and_directions() {
        let r = preset_antipodal_report(&p2(c(1.0))).unwrap();
        assert!(r.passed);
        assert_eq!(r.directions.len(), 6);
        for (l, d) in r.directions.iter().enumerate() {
            assert!((d - std::f64::consts::PI * l as f64 / 3.0).abs() < 1e-12);
        }
        let p4 = p4_system(c(0.0), c(1.0), Branch::P41b, &PresetConfig::default()).unwrap();
        let r = preset_antipodal_report(&p4).unwrap();
        assert!(r.passed);
        let mut mods: Vec<f64> = r.eigenvalues.iter().map(|l| l.re).collect();
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mods[0] + 2.0).abs() < 1e-12 && (mods[1] - 2.0).abs() < 1e-12);
        assert_eq!(r.directions.len(), 4);
        assert!((r.directions[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(!check_antipodal(&[c(1.0), c(2.0)], 1).passed);
        assert!(!check_antipodal(&[c(0.0), c(2.0)], 1).passed);
    }

    #[test]
    fn var_map_round_trip() {
        let cfg = PresetConfig::default();
        let presets = [
            p2_system(cx(0.4, -0.1), Branch::P21, &cfg).unwrap(),
            p2_system(c(0.4), Branch::P22, &cfg).unwrap(),
            p4_system(c(0.3), c(0.5), Branch::P41a, &cfg).unwrap(),
            p4_system(c(0.3), c(0.5), Branch::P42, &cfg).unwrap(),
        ];
        for pre in &presets {
            let m = pre.var_map;
            for (x, u, v) in [(cx(0.12, 0.05), cx(0.3, -0.2), cx(-0.1, 0.4)), (cx(0.2, -0.02), c(1e-3), c(2.0))] {
                let (t, y, yp) = m.to_original(x, u, v);
                let (x2, u2, v2) = m.from_original(t, y, yp, Some(x));
                let err = (x2 - x).norm() + (u2 - u).norm() + (v2 - v).norm();
                assert!(err < 1e-12, "{}: {err}", pre.branch);
            }
        }
    }
}
