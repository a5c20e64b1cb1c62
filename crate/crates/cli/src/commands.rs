//! `analyze`, `solve`, `painleve2` and `painleve4`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use transseries::formal_series::Series;
use transseries::painleve::{
    family_setup, p2_system, p4_system, preset_antipodal_report, solve_family, AntipodalReport, Branch,
    PainlevePreset, PresetConfig, Side,
};
use transseries::reduction::{leading_matrix, prepare};
use transseries::scalar::{cis, cx};
use transseries::spectral::{
    check_conditions, choose_direction, eigen_data, ConditionCertificate, DirectionChoice, DEFAULT_SEP_TOL,
};
use transseries::transseries::{evaluate_transseries, residual, solve, SolveOptions};
use transseries::{NonlinearSystem, TransseriesSolution, C64};

use crate::output::{index, matrix_rows, num, re_im, series_rows, Output};
use crate::CliError;

/// Sample radii `lo, …, hi` in `count` equal steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Radii {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Radii {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Settings shared by every pipeline command.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub n_x: usize,
    pub n_z: u32,
    pub n_q: u32,
    pub theta: Option<f64>,
    pub quad_tol: f64,
    pub pole_tol: f64,
    pub decay_eps: f64,
    pub seed: u64,
    pub sweep: bool,
    pub subset: Vec<usize>,
    pub constants: Vec<C64>,
    pub arg: Option<f64>,
    pub radii: Radii,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Truncation orders of the `--sweep` table.
pub const SWEEP_ORDERS: [u32; 4] = [2, 4, 6, 8];
/// `|A_j|` used when no `--c` is given.
pub const DEFAULT_CONSTANT: f64 = 1e-3;

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.n_x == 0 || self.n_z == 0 || self.n_q == 0 {
            return usage("--nx, --nz and --nq must be positive");
        }
        for (name, v) in [("--tol-quad", self.quad_tol), ("--pole-tol", self.pole_tol), ("--decay-eps", self.decay_eps)] {
            if !(v > 0.0 && v < 1.0) {
                return usage(&format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        let r = self.radii;
        if r.count == 0 || !(r.lo > 0.0) || r.hi < r.lo {
            return usage("--radii needs 0 < lo ≤ hi and count ≥ 1");
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions<f64> {
        let mut o = SolveOptions {
            n_x: self.n_x,
            n_z: self.n_z,
            n_q: self.n_q,
            theta: self.theta,
            decay_eps: self.decay_eps,
            ..SolveOptions::default()
        };
        o.summation.quad_tol = self.quad_tol;
        o.summation.pole_tol = self.pole_tol;
        o
    }

    fn constants_for(&self, n_sub: usize) -> Result<Vec<C64>, CliError> {
        match self.constants.len() {
            0 => Ok(vec![cx(DEFAULT_CONSTANT, 0.0); n_sub]),
            k if k == n_sub => Ok(self.constants.clone()),
            k => Err(CliError::Usage(format!("{k} values of --c for a subset of size {n_sub}"))),
        }
    }
}

/// Spectral report written to `analysis.json`.
#[derive(Serialize)]
pub struct Analysis {
    pub gamma: u32,
    pub dimension: usize,
    /// Whether `Y = K + xW` was applied before the spectral stage.
    pub recentred: bool,
    pub eigenvalues: Vec<C64>,
    pub theta0: Vec<f64>,
    pub theta1: Vec<f64>,
    pub singular_directions: Vec<f64>,
    pub subset: Vec<usize>,
    pub certificate: ConditionCertificate<f64>,
    pub direction: Option<DirectionChoice<f64>>,
    pub theta_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antipodal: Option<AntipodalReport<f64>>,
    pub passed: bool,
    pub failure: Option<String>,
}

fn analysis_of(sys: &NonlinearSystem, subset: &[usize], theta: Option<f64>) -> Result<Analysis, CliError> {
    let (reduced, _, recentred) = prepare(sys).map_err(CliError::at("reduction"))?;
    let spec = eigen_data(&leading_matrix(&reduced), sys.gamma()).map_err(CliError::at("spectral"))?;
    let certificate = check_conditions(&spec, subset, transseries::spectral::DEFAULT_M_MAX)
        .map_err(CliError::at("spectral"))?;
    let mut failure = (!certificate.passed()).then(|| format!("{:?}", certificate.status));
    let direction = if certificate.passed() {
        match choose_direction(&spec, Some(&certificate), theta) {
            Ok(d) => Some(d),
            Err(e) => {
                failure = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };
    Ok(Analysis {
        gamma: sys.gamma(),
        dimension: sys.dim(),
        recentred,
        eigenvalues: spec.eigenvalues.clone(),
        theta0: spec.theta0_dirs.clone(),
        theta1: spec.theta1_dirs.clone(),
        singular_directions: spec.singular_directions(),
        subset: subset.to_vec(),
        certificate,
        theta_star: direction.as_ref().map(|d| d.theta_star),
        direction,
        antipodal: None,
        passed: failure.is_none(),
        failure,
    })
}

fn finish_analysis(analysis: &Analysis) -> Result<(), CliError> {
    match &analysis.failure {
        None => Ok(()),
        Some(msg) => Err(CliError::Condition(format!("conditions failed: {msg}"))),
    }
}

/// Where the system came from, echoed in the manifest.
#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Text { text: String },
    Painleve {
        branch: String,
        params: BTreeMap<&'static str, C64>,
        config: PresetConfig,
        side: Side,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    source: &'a Source,
    config: &'a RunConfig,
    solve_options: SolveOptions<f64>,
    sep_tol: f64,
    subset: Vec<usize>,
    constants: Vec<C64>,
    samples: Vec<C64>,
    theta_star: Option<f64>,
    r_eps: Option<f64>,
    files: Vec<String>,
}

struct SolvedRun {
    subset: Vec<usize>,
    constants: Vec<C64>,
    samples: Vec<C64>,
    theta_star: f64,
    r_eps: f64,
}

fn write_manifest(
    out: &mut Output,
    command: &str,
    source: &Source,
    cfg: &RunConfig,
    run: Option<&SolvedRun>,
) -> Result<(), CliError> {
    let mut files = out.files().to_vec();
    files.push("manifest.json".into());
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        source,
        config: cfg,
        solve_options: cfg.solve_options(),
        sep_tol: DEFAULT_SEP_TOL,
        subset: run.map_or_else(|| cfg.subset.clone(), |r| r.subset.clone()),
        constants: run.map_or_else(Vec::new, |r| r.constants.clone()),
        samples: run.map_or_else(Vec::new, |r| r.samples.clone()),
        theta_star: run.map(|r| r.theta_star),
        r_eps: run.map(|r| r.r_eps),
        files,
    };
    out.json("manifest.json", &m)
}

/// Points on the ray `arg` (default: middle of the evaluation arc).
fn sample_points(sol: &TransseriesSolution, cfg: &RunConfig) -> Result<Vec<C64>, CliError> {
    let arg = match cfg.arg {
        Some(a) => a,
        None => {
            let (lo, hi) = sol.evaluation_arc().ok_or_else(|| {
                CliError::Condition("the decay region misses the Laplace window of the chosen direction".into())
            })?;
            0.5 * (lo + hi)
        }
    };
    Ok(cfg.radii.values().into_iter().map(|r| cis(arg) * r).collect())
}

fn write_solution_tables(out: &mut Output, sol: &TransseriesSolution) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (i, k) in sol.k.iter().enumerate() {
        series_rows(&[i.to_string()], k, &mut rows);
    }
    out.csv("k_series.csv", &["component", "power", "re", "im"], &rows)?;

    let g = &sol.gauge;
    let mut rows = Vec::new();
    matrix_rows("T", &g.matrix(), &mut rows);
    matrix_rows("P", &g.p_poly, &mut rows);
    matrix_rows("C", &g.c, &mut rows);
    matrix_rows("Lambda", &g.lambda_matrix(), &mut rows);
    out.csv("gauge.csv", &["kind", "power", "row", "col", "re", "im"], &rows)?;

    let mut rows = Vec::new();
    for (p, values) in sol.c_table.iter() {
        for (i, s) in values.iter().enumerate() {
            series_rows(&[index(p), i.to_string()], s, &mut rows);
        }
    }
    out.csv("c_table.csv", &["p", "component", "power", "re", "im"], &rows)?;
    out.json("majorant.json", &sol.majorant)
}

/// Per-sample `(value, residual)` or the reason the sample failed.
type Sample = Result<(Vec<C64>, f64), String>;

fn evaluate_samples(sys: &NonlinearSystem, sol: &TransseriesSolution, consts: &[C64], xs: &[C64]) -> Vec<Sample> {
    xs.iter()
        .map(|&x| {
            let y = evaluate_transseries(sol, x, consts).map_err(|e| e.to_string())?;
            let rep = residual(sys, |x| evaluate_transseries(sol, x, consts), &[x]).map_err(|e| e.to_string())?;
            match rep.values[0] {
                Some(r) => Ok((y, r)),
                None => Err("residual stencil left the admissible region".into()),
            }
        })
        .collect()
}

/// Largest finite-difference and truncation residual for each `N_Z`.
fn sweep(
    out: &mut Output,
    sys: &NonlinearSystem,
    subset: &[usize],
    opts: &SolveOptions<f64>,
    consts: &[C64],
    xs: &[C64],
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for n_z in SWEEP_ORDERS {
        let o = SolveOptions { n_z, ..*opts };
        let row = match solve(sys, subset, &o) {
            Err(e) => vec![n_z.to_string(), String::new(), String::new(), e.to_string()],
            Ok(sol) => {
                let fd = evaluate_samples(sys, &sol, consts, xs);
                let tr: Vec<Result<f64, String>> = xs
                    .iter()
                    .map(|&x| sol.truncation_residual(x, consts).map_err(|e| e.to_string()))
                    .collect();
                let failed = fd.iter().filter(|s| s.is_err()).count() + tr.iter().filter(|s| s.is_err()).count();
                let fd_max = fd.iter().flatten().map(|s| s.1).fold(0.0, f64::max);
                let tr_max = tr.iter().flatten().copied().fold(0.0, f64::max);
                let status = if failed == 0 { "ok".to_string() } else { format!("{failed} samples failed") };
                vec![n_z.to_string(), num(fd_max), num(tr_max), status]
            }
        };
        rows.push(row);
    }
    out.csv("sweep.csv", &["n_z", "fd_residual", "truncation_residual", "status"], &rows)
}

fn sample_rows(xs: &[C64], samples: &[Sample]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (x, s) in xs.iter().zip(samples) {
        let [xr, xi] = re_im(*x);
        match s {
            Ok((y, r)) => {
                for (i, yi) in y.iter().enumerate() {
                    let [yr, yim] = re_im(*yi);
                    rows.push(vec![xr.clone(), xi.clone(), i.to_string(), yr, yim, num(*r), "ok".into()]);
                }
            }
            Err(e) => rows.push(vec![xr, xi, String::new(), String::new(), String::new(), String::new(), e.clone()]),
        }
    }
    rows
}

pub fn analyze(text: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let sys = crate::input::parse_system(text)?;
    let mut out = Output::create(&cfg.out)?;
    let analysis = analysis_of(&sys, &cfg.subset, cfg.theta)?;
    out.json("analysis.json", &analysis)?;
    write_manifest(&mut out, "analyze", &Source::Text { text: text.into() }, cfg, None)?;
    finish_analysis(&analysis)
}

pub fn solve_cmd(text: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let sys = crate::input::parse_system(text)?;
    let mut out = Output::create(&cfg.out)?;
    let analysis = analysis_of(&sys, &cfg.subset, cfg.theta)?;
    out.json("analysis.json", &analysis)?;
    finish_analysis(&analysis)?;
    let opts = cfg.solve_options();
    let sol = solve(&sys, &cfg.subset, &opts).map_err(CliError::at("solve"))?;
    let consts = cfg.constants_for(cfg.subset.len())?;
    let xs = sample_points(&sol, cfg)?;
    write_solution_tables(&mut out, &sol)?;
    let samples = evaluate_samples(&sys, &sol, &consts, &xs);
    out.csv(
        "samples.csv",
        &["x_re", "x_im", "component", "y_re", "y_im", "residual", "status"],
        &sample_rows(&xs, &samples),
    )?;
    if cfg.sweep {
        sweep(&mut out, &sys, &cfg.subset, &opts, &consts, &xs)?;
    }
    let run = SolvedRun {
        subset: cfg.subset.clone(),
        constants: consts,
        samples: xs,
        theta_star: sol.theta_star,
        r_eps: sol.r_eps,
    };
    write_manifest(&mut out, "solve", &Source::Text { text: text.into() }, cfg, Some(&run))?;
    let failed = samples.iter().filter(|s| s.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} of {} samples could not be evaluated", samples.len());
    }
    Ok(())
}

/// Painlevé run request.
pub struct PainleveRequest {
    pub branch: Branch,
    pub params: BTreeMap<&'static str, C64>,
    pub config: PresetConfig,
    pub side: Side,
    pub analyze_only: bool,
}

/// Default sample annulus of the Painlevé commands.
pub const PAINLEVE_RADII: Radii = Radii { lo: 0.1, hi: 0.2, count: 10 };

fn build_preset(req: &PainleveRequest) -> Result<PainlevePreset<f64>, CliError> {
    let p = |k: &str| req.params.get(k).copied().unwrap_or(cx(0.0, 0.0));
    let preset = match req.branch.family() {
        transseries::painleve::Family::P2 => p2_system(p("a"), req.branch, &req.config),
        transseries::painleve::Family::P4 => p4_system(p("alpha"), p("beta"), req.branch, &req.config),
    };
    preset.map_err(CliError::at("painleve"))
}

/// `y` as a formal series: `(x power, s = 1/t power, coefficient)`.
fn formal_y_rows(preset: &PainlevePreset<f64>, u: &Series<f64>) -> Vec<Vec<String>> {
    let map = preset.var_map;
    let mut terms: BTreeMap<i32, C64> = BTreeMap::new();
    for (m, c) in u.coeffs().iter().enumerate() {
        *terms.entry(map.scale_pow + m as i32).or_insert(cx(0.0, 0.0)) += *c;
    }
    *terms.entry(map.shift_pow).or_insert(cx(0.0, 0.0)) += map.shift;
    terms
        .into_iter()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|(e, c)| {
            let [re, im] = re_im(c);
            vec![e.to_string(), num(e as f64 / map.rho as f64), re, im]
        })
        .collect()
}

pub fn painleve(command: &str, req: &PainleveRequest, cfg: &RunConfig) -> Result<(), CliError> {
    let preset = build_preset(req)?;
    let source = Source::Painleve {
        branch: req.branch.to_string(),
        params: req.params.clone(),
        config: req.config,
        side: req.side,
    };
    let mut out = Output::create(&cfg.out)?;
    let report = preset_antipodal_report(&preset).map_err(CliError::at("spectral"))?;
    let setup = family_setup(&preset, req.side);
    let subset = setup.as_ref().map_or_else(|_| vec![0], |s| vec![s.index]);
    let theta = cfg.theta.or(setup.as_ref().ok().map(|s| s.theta));
    let mut analysis = analysis_of(&preset.system, &subset, theta)?;
    if !report.passed {
        analysis.passed = false;
        analysis.failure = report.reason.clone();
    }
    analysis.antipodal = Some(report);
    out.json("analysis.json", &analysis)?;

    let (_, k, _) = prepare(&preset.system).map_err(CliError::at("reduction"))?;
    out.csv("formal_y.csv", &["x_power", "s_power", "re", "im"], &formal_y_rows(&preset, &k[0]))?;
    if req.analyze_only {
        write_manifest(&mut out, command, &source, cfg, None)?;
        return finish_analysis(&analysis);
    }
    finish_analysis(&analysis)?;
    setup.map_err(CliError::at("painleve"))?;

    let consts = cfg.constants_for(1)?;
    let opts = cfg.solve_options();
    let fam = solve_family(&preset, req.side, consts[0], &[], &opts).map_err(CliError::at("solve"))?;
    let sol = &fam.solution;
    let xs = sample_points(sol, cfg)?;
    write_solution_tables(&mut out, sol)?;
    let system_samples = evaluate_samples(&preset.system, sol, &consts, &xs);
    let mut rows = Vec::new();
    for (x, s) in xs.iter().zip(&system_samples) {
        let mut row: Vec<String> = re_im(*x).into();
        match (fam.point(&preset, *x), s) {
            (Ok(p), Ok((_, r))) => {
                for z in [p.t, p.y, p.yp] {
                    row.extend(re_im(z));
                }
                row.extend([num(*r), num(p.residual), "ok".into()]);
            }
            (Err(e), _) => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.to_string());
            }
            (Ok(_), Err(e)) => {
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.clone());
            }
        }
        rows.push(row);
    }
    out.csv(
        "samples.csv",
        &[
            "x_re", "x_im", "t_re", "t_im", "y_re", "y_im", "yp_re", "yp_im", "system_residual", "ode_residual", "status",
        ],
        &rows,
    )?;
    let fixed = SolveOptions { theta: Some(sol.theta_star), ..opts };
    if cfg.sweep {
        sweep(&mut out, &preset.system, &[fam.index], &fixed, &consts, &xs)?;
    }
    let run = SolvedRun {
        subset: vec![fam.index],
        constants: consts,
        samples: xs,
        theta_star: sol.theta_star,
        r_eps: sol.r_eps,
    };
    write_manifest(&mut out, command, &source, cfg, Some(&run))
}

/// Parse `"re,im"` or `"re"`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let bad = || format!("expected re or re,im, got {s:?}");
    let mut parts = s.split(',').map(str::trim);
    let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(v) => v.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(cx(re, im))
}

/// Parse `"lo:hi:count"`.
pub fn parse_radii(s: &str) -> Result<Radii, String> {
    let bad = || format!("expected lo:hi:count, got {s:?}");
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(Radii {
        lo: parts[0].trim().parse().map_err(|_| bad())?,
        hi: parts[1].trim().parse().map_err(|_| bad())?,
        count: parts[2].trim().parse().map_err(|_| bad())?,
    })
}
