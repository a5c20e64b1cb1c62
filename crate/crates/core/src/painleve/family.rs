//! One-parameter solution families `y = k(x) + Σ_n ψ_n(x)(C e^{h(x)})^n`
//! of a Painlevé preset, mapped back to `(t, y)`.

use serde::Serialize;

use super::rk::{integrate, RkOptions};
use super::{check_antipodal, AntipodalReport, PainlevePreset};
use crate::error::{Error, Result};
use crate::reduction::leading_matrix;
use crate::scalar::{angle_diff, from_usize, lit, Cx, Real};
use crate::spectral::eigen_data;
use crate::transseries::{evaluate_transseries, solve, SolveOptions, TransseriesSolution};

/// Which exponential the family carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// The eigenvalue with argument `ω ∈ (−π/2, π/2]`.
    Omega,
    /// Its antipode, argument `ω + π`.
    OmegaPlusPi,
}

/// A sample of the family in both coordinate systems.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FamilyPoint<T: Real> {
    pub x: Cx<T>,
    pub u: Cx<T>,
    pub v: Cx<T>,
    pub t: Cx<T>,
    pub y: Cx<T>,
    pub yp: Cx<T>,
    /// Scaled residual of the original second-order equation.
    pub residual: T,
}

/// Output of [`solve_family`].
#[derive(Clone, Debug, Serialize)]
pub struct FamilySolution<T: Real> {
    pub side: Side,
    /// Index of the carried eigenvalue in `eigen_data` order.
    pub index: usize,
    pub eigenvalue: Cx<T>,
    pub c_const: Cx<T>,
    pub solution: TransseriesSolution<T>,
    pub points: Vec<FamilyPoint<T>>,
    pub max_residual: T,
}

/// Relative step of the derivative stencil in `x`.
const STENCIL_STEP: f64 = 1e-3;

impl<T: Real> FamilySolution<T> {
    /// `(t, y, dy/dt)` at `x`.
    pub fn original_at(&self, preset: &PainlevePreset<T>, x: Cx<T>) -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
        let uv = evaluate_transseries(&self.solution, x, &[self.c_const])?;
        Ok(preset.var_map.to_original(x, uv[0], uv[1]))
    }

    /// Evaluate at `x` and measure the original equation with a fourth-order
    /// difference of `dy/dt` along the ray.
    pub fn point(&self, preset: &PainlevePreset<T>, x: Cx<T>) -> Result<FamilyPoint<T>> {
        let uv = evaluate_transseries(&self.solution, x, &[self.c_const])?;
        let (t, y, yp) = preset.var_map.to_original(x, uv[0], uv[1]);
        let h = x * lit::<T>(STENCIL_STEP);
        let mut d = [Cx::new(T::zero(), T::zero()); 4];
        for (slot, k) in d.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            *slot = self.original_at(preset, x + h * lit::<T>(k))?.2;
        }
        let dyp_dx = (d[0] - d[1] * lit::<T>(8.0) + d[2] * lit::<T>(8.0) - d[3]) / (h * lit::<T>(12.0));
        // d/dt = −(x^{ρ+1}/ρ) d/dx
        let rho = preset.var_map.rho;
        let ypp = -x.powi(rho as i32 + 1) / from_usize::<T>(rho as usize) * dyp_dx;
        Ok(FamilyPoint {
            x,
            u: uv[0],
            v: uv[1],
            t,
            y,
            yp,
            residual: preset.params.scaled_residual(t, y, yp, ypp),
        })
    }

    /// Integrate the original equation from the family value at `x0` to
    /// `t(x1)` and return `(RK value, family value)` of `y` there.
    pub fn rk_compare(&self, preset: &PainlevePreset<T>, x0: Cx<T>, x1: Cx<T>, opts: &RkOptions) -> Result<(Cx<T>, Cx<T>)> {
        let (t0, y0, yp0) = self.original_at(preset, x0)?;
        let (t1, y1, _) = self.original_at(preset, x1)?;
        let params = preset.params;
        let out = integrate(|t, y, yp| params.rhs(t, y, yp), t0, [y0, yp0], t1, opts)?;
        Ok((out[0], y1))
    }
}

/// Which eigenvalue a family carries and its default Borel direction.
#[derive(Clone, Debug, Serialize)]
pub struct FamilySetup<T: Real> {
    pub side: Side,
    /// Index in `eigen_data` order.
    pub index: usize,
    pub eigenvalue: Cx<T>,
    /// `(ω + π/2)/γ`, between the two decay sectors.
    pub theta: T,
    pub report: AntipodalReport<T>,
}

/// Locate the eigenvalue of `side`; fails when the eigenvalues are not antipodal.
pub fn family_setup<T: Real>(preset: &PainlevePreset<T>, side: Side) -> Result<FamilySetup<T>> {
    let spec = eigen_data(&leading_matrix(&preset.system), preset.gamma)?;
    let report = check_antipodal(&spec.eigenvalues, preset.gamma);
    if !report.passed {
        return Err(Error::NoHalfPlane(report.reason.clone().unwrap_or_default()));
    }
    let target = match side {
        Side::Omega => report.omega,
        Side::OmegaPlusPi => report.omega + T::PI(),
    };
    let index = (0..spec.n())
        .min_by(|&i, &j| {
            let di = angle_diff(spec.eigenvalues[i].arg(), target).abs();
            let dj = angle_diff(spec.eigenvalues[j].arg(), target).abs();
            di.partial_cmp(&dj).expect("finite angles")
        })
        .expect("two eigenvalues");
    Ok(FamilySetup {
        side,
        index,
        eigenvalue: spec.eigenvalues[index],
        theta: (report.omega + T::FRAC_PI_2()) / from_usize::<T>(preset.gamma as usize),
        report,
    })
}

/// Build the family of `preset` carrying the exponential of `side` and
/// evaluate it at `x_samples`. Without an explicit `opts.theta` the Borel
/// direction is `(ω + π/2)/γ`, between the two decay sectors.
pub fn solve_family<T: Real>(
    preset: &PainlevePreset<T>,
    side: Side,
    c_const: Cx<T>,
    x_samples: &[Cx<T>],
    opts: &SolveOptions<T>,
) -> Result<FamilySolution<T>> {
    let setup = family_setup(preset, side)?;
    let mut opts = *opts;
    opts.theta = opts.theta.or(Some(setup.theta));
    let index = setup.index;
    let solution = solve(&preset.system, &[index], &opts)?;
    let mut fam = FamilySolution {
        side,
        index,
        eigenvalue: setup.eigenvalue,
        c_const,
        solution,
        points: Vec::with_capacity(x_samples.len()),
        max_residual: T::zero(),
    };
    for &x in x_samples {
        let p = fam.point(preset, x)?;
        fam.max_residual = fam.max_residual.max(p.residual);
        fam.points.push(p);
    }
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::super::{p2_system, Branch, PresetConfig};
    use super::*;
    use crate::scalar::{cis, cx};

    fn ray(arg: f64, radii: &[f64]) -> Vec<Cx<f64>> {
        radii.iter().map(|&r| cis(arg) * r).collect()
    }

    #[test]
    fn zero_constant_follows_the_formal_series() {
        let a = cx(1.0, 0.0);
        let pre = p2_system(a, Branch::P21, &PresetConfig::default()).unwrap();
        let xs = ray(std::f64::consts::PI / 12.0, &[0.1, 0.15, 0.2]);
        let fam = solve_family(&pre, Side::Omega, cx(0.0, 0.0), &xs, &SolveOptions::default()).unwrap();
        assert!((fam.eigenvalue - cx(2.0, 0.0)).norm() < 1e-12);
        for p in &fam.points {
            let s = p.x * p.x;
            // y + a s = 2(a³ − a)s⁴ + O(s⁷) = O(s⁷) for a = 1
            assert!((p.y + a * s).norm() <= 10.0 * s.norm().powi(7), "{}", (p.y + a * s).norm());
        }
        assert!(fam.max_residual < 1e-6, "{}", fam.max_residual);
    }
}
