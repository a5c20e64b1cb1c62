use std::f64::consts::PI;

use transseries::painleve::{
    integrate, p2_system, p4_system, solve_family, Branch, PainlevePreset, PresetConfig, RkOptions, Side,
};
use transseries::scalar::{cis, cx};
use transseries::transseries::SolveOptions;
use transseries::C64;

fn c(v: f64) -> C64 {
    cx(v, 0.0)
}

fn presets() -> Vec<PainlevePreset<f64>> {
    let cfg = PresetConfig::default();
    vec![
        p2_system(cx(0.7, 0.2), Branch::P21, &cfg).unwrap(),
        p2_system(c(0.4), Branch::P22, &cfg).unwrap(),
        p4_system(c(0.3), c(0.5), Branch::P41a, &cfg).unwrap(),
        p4_system(cx(0.3, 0.1), c(0.5), Branch::P41b, &cfg).unwrap(),
        p4_system(c(0.3), c(0.5), Branch::P42, &cfg).unwrap(),
    ]
}

/// Along a classical trajectory of the original equation, the assembled
/// right side must reproduce `x^{1+γ}(u, v)′` obtained by differencing.
#[test]
fn assembled_systems_match_integrated_trajectories() {
    let opts = RkOptions::default();
    for pre in presets() {
        let map = pre.var_map;
        let x0 = cx(0.25, 0.03);
        let (u0, v0) = (cx(0.01, 0.005), cx(-0.02, 0.01));
        let (t0, y0, yp0) = map.to_original(x0, u0, v0);
        let params = pre.params;
        let h = x0 * 1e-4;
        let mut uv = Vec::new();
        for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let x = x0 + h * k;
            let t = map.t_of_x(x);
            let out = integrate(|t, y, yp| params.rhs(t, y, yp), t0, [y0, yp0], t, &opts).unwrap();
            let (_, u, v) = map.from_original(t, out[0], out[1], Some(x));
            uv.push([u, v]);
        }
        let rhs = pre.system.rhs(x0, &[u0, v0]);
        let g = pre.gamma as i32;
        for i in 0..2 {
            let d = (uv[0][i] - uv[1][i] * 8.0 + uv[3][i] * 8.0 - uv[4][i]) / (h * 12.0);
            let lhs = x0.powi(g + 1) * d;
            let err = (lhs - rhs[i]).norm() / (1.0 + rhs[i].norm());
            assert!(err < 1e-6, "{} component {i}: {err:e}", pre.branch);
        }
    }
}

#[test]
fn p2_residual_with_exponential_on_both_sides() {
    let pre = p2_system(c(1.0), Branch::P21, &PresetConfig::default()).unwrap();
    let opts = SolveOptions::default();
    let cases = [(Side::Omega, PI / 12.0), (Side::OmegaPlusPi, PI / 4.0)];
    for (side, arg) in cases {
        let xs: Vec<C64> = (0..5).map(|k| cis(arg) * (0.1 + 0.02 * k as f64)).collect();
        let fam = solve_family(&pre, side, cx(5e-3, 2e-3), &xs, &opts).unwrap();
        assert!(fam.max_residual < 1e-6, "{side:?}: {:e}", fam.max_residual);
        let lam = fam.eigenvalue;
        let expected = if side == Side::Omega { 2.0 } else { -2.0 };
        assert!((lam - c(expected)).norm() < 1e-12);
        // the carried exponential decays in its own sector
        for p in &fam.points {
            let z = fam.solution.z(p.x, &[fam.c_const]).unwrap()[0];
            assert!(z.norm() < fam.c_const.norm());
        }
    }
    // each family leaves the other's sector
    let swapped = solve_family(&pre, Side::OmegaPlusPi, c(1e-3), &[cis(PI / 12.0) * 0.1], &opts);
    assert!(swapped.is_err());
}

#[test]
fn p2_family_agrees_with_classical_integration() {
    let pre = p2_system(c(1.0), Branch::P21, &PresetConfig::default()).unwrap();
    // close to the sector edge the exponentials barely grow or decay, which
    // keeps the integrator's error amplification small
    let arg = 0.515;
    let opts = SolveOptions { decay_eps: 0.01, ..Default::default() };
    let x0 = cis(arg) * 0.2;
    let fam = solve_family(&pre, Side::Omega, c(1e-3), &[x0], &opts).unwrap();
    for r in [0.17, 0.14, 0.12, 0.1] {
        let (rk, series) = fam.rk_compare(&pre, x0, cis(arg) * r, &RkOptions::default()).unwrap();
        let err = (rk - series).norm() / (1.0 + series.norm());
        assert!(err < 1e-5, "|x| = {r}: {err:e}");
    }
}

#[test]
fn p4_families_have_small_residuals() {
    let cfg = PresetConfig::default();
    let opts = SolveOptions::default();
    for branch in [Branch::P41b, Branch::P42] {
        let pre = p4_system(c(0.3), c(0.5), branch, &cfg).unwrap();
        // λ = ±2, γ = 2: the ω-sector is |arg x| < π/4, the Borel ray π/4
        let xs: Vec<C64> = (0..4).map(|k| cis(PI / 8.0) * (0.08 + 0.02 * k as f64)).collect();
        let fam = solve_family(&pre, Side::Omega, c(1e-3), &xs, &opts).unwrap();
        assert!(fam.max_residual < 1e-6, "{branch}: {:e}", fam.max_residual);
    }
}
