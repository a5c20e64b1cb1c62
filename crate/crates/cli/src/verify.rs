//! Seeded invariant batteries behind `verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use transseries::borel_laplace::{borel_transform, convolve, laplace_formal};
use transseries::gauge::{build_gauge, gauge_residual};
use transseries::reduction::{formal_particular_solution, leading_matrix};
use transseries::samples;
use transseries::scalar::cx;
use transseries::spectral::{choose_direction, eigen_data};
use transseries::transseries::majorant_certificate;

use crate::CliError;

/// Outcome of one battery: the worst measured value against its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    /// `tolerance / worst`; above 1 means passing.
    pub margin: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub corrupt: bool,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

const ROUNDTRIP_TOL: f64 = 1e-14;
const CONVOLUTION_TOL: f64 = 1e-12;
const MAJORANT_TOL: f64 = 1e-12;
const GAUGE_TOL: f64 = 1e-10;
const FORMAL_TOL: f64 = 1e-10;
/// Size of the injected gauge perturbation in `--corrupt` mode.
const CORRUPTION: f64 = 1e-3;

fn suite(
    name: &'static str,
    cases: usize,
    tolerance: f64,
    mut case: impl FnMut() -> Result<f64, transseries::Error>,
) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut error = None;
    for _ in 0..cases {
        match case() {
            Ok(v) if v.is_finite() => worst = worst.max(v),
            Ok(v) => {
                error = Some(format!("non-finite measurement {v}"));
                break;
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let passed = error.is_none() && worst <= tolerance;
    SuiteResult {
        name,
        cases,
        worst,
        tolerance,
        margin: if worst > 0.0 { tolerance / worst } else { f64::INFINITY },
        passed,
        error,
    }
}

/// Run every battery with `cases` random instances each.
pub fn run(seed: u64, cases: usize, corrupt: bool) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = Vec::new();

    suites.push(suite("borel_roundtrip", cases, ROUNDTRIP_TOL, || {
        let kappa = rng.gen_range(1..=3);
        let f = samples::series(&mut rng, 20, true, 1.0);
        let back = laplace_formal(&borel_transform(&f, kappa)?);
        Ok((0..=20).map(|m| (back.coeff(m) - f.coeff(m)).norm()).fold(0.0, f64::max))
    }));

    suites.push(suite("convolution", cases, CONVOLUTION_TOL, || {
        let kappa = rng.gen_range(1..=3);
        let f = samples::series(&mut rng, 16, true, 1.0);
        let g = samples::series(&mut rng, 16, true, 1.0);
        let lhs = laplace_formal(&convolve(&borel_transform(&f, kappa)?, &borel_transform(&g, kappa)?)?);
        let rhs = &f * &g;
        let scale = rhs.max_abs().max(1.0);
        Ok((0..=16).map(|m| (lhs.coeff(m) - rhs.coeff(m)).norm()).fold(0.0, f64::max) / scale)
    }));

    suites.push(suite("majorant_routes", cases, MAJORANT_TOL, || {
        let gamma = rng.gen_range(1..=2);
        let sys = samples::diagonal_system(&mut rng, 2, 1, gamma, 16);
        let cert = sys.certify(1, 20)?;
        let dir = choose_direction(&sys.spectral()?, Some(&cert), None)?;
        let m = majorant_certificate(&sys, &cert, dir.theta_star, 4, 4, 12)?;
        Ok(m.max_route_discrepancy)
    }));

    suites.push(suite("gauge_residual", cases, GAUGE_TOL, || {
        let gamma = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=3);
        let a = samples::matrix_series(&mut rng, n, 16 + gamma as usize);
        let spec = eigen_data(a.coeff(0), gamma)?;
        let mut g = build_gauge(&a, &spec, 16)?;
        if corrupt {
            let mut c1 = g.c.coeff(1).clone();
            c1[(0, 1)] += cx(CORRUPTION, 0.0);
            g.c.set_coeff(1, c1);
        }
        gauge_residual(&a, &g)
    }));

    suites.push(suite("formal_solution", cases, FORMAL_TOL, || {
        let gamma = rng.gen_range(1..=2);
        let sys = samples::nonlinear_system(&mut rng, 2, gamma, 16);
        // the leading matrix must be invertible for the formal recursion
        eigen_data(&leading_matrix(&sys), gamma)?;
        let k = formal_particular_solution(&sys, 16)?;
        let res = sys.formal_residual(&k)?;
        let mut worst = 0.0f64;
        for (r, ki) in res.iter().zip(&k) {
            let mut running = 1.0f64;
            for m in 0..=r.order() {
                running = running.max(ki.coeff(m).norm() * m.max(1) as f64);
                worst = worst.max(r.coeff(m).norm() / running);
            }
        }
        Ok(worst)
    }));

    let passed = suites.iter().all(|s| s.passed);
    VerifyReport { seed, cases, corrupt, suites, passed }
}

/// Run, print one line per battery and fail when any battery fails.
pub fn verify(seed: u64, cases: usize, corrupt: bool, out: &std::path::Path) -> Result<VerifyReport, CliError> {
    let report = run(seed, cases, corrupt);
    for s in &report.suites {
        println!(
            "{:<16} {} worst {:.3e} tol {:.1e} margin {:.2e}{}",
            s.name,
            if s.passed { "PASS" } else { "FAIL" },
            s.worst,
            s.tolerance,
            s.margin,
            s.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    let mut dir = crate::output::Output::create(out)?;
    dir.json("verify.json", &report)?;
    if report.passed {
        Ok(report)
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}
