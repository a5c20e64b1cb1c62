//! `transseries`: batch front end for the transseries solver.

mod commands;
mod error;
mod input;
mod output;
mod verify;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use transseries::painleve::{Branch, PresetConfig, RootSign, Side};
use transseries::C64;

use commands::{parse_complex, parse_radii, PainleveRequest, Radii, RunConfig, PAINLEVE_RADII};
pub use error::CliError;

#[derive(Parser)]
#[command(name = "transseries", version, about = "Transseries solutions of x^{1+γ}Y′ = F0 + AY + F(x, Y)")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, singular directions and condition certificate.
    Analyze(SystemArgs),
    /// Full pipeline: formal solution, gauge, coefficient table, samples.
    Solve(SystemArgs),
    /// Seeded invariant batteries.
    Verify(VerifyArgs),
    /// Painlevé II preset, y″ = 2y³ + ty + a.
    Painleve2(P2Args),
    /// Painlevé IV preset, y″ = y′²/(2y) + 3y³/2 + 4ty² + 2(t² − α)y + β/y.
    Painleve4(P4Args),
}

#[derive(Args)]
struct SystemArgs {
    /// System file; `-` reads standard input.
    #[arg(required_unless_present = "system")]
    input: Option<PathBuf>,
    /// System text given inline instead of a file.
    #[arg(long, conflicts_with = "input")]
    system: Option<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// x-order of gauge, coefficient table and summed layers.
    #[arg(long, default_value_t = 30)]
    nx: usize,
    /// Largest |p| kept in the transseries.
    #[arg(long, default_value_t = 4)]
    nz: u32,
    /// ε-depth of the majorant certificate.
    #[arg(long, default_value_t = 4)]
    nq: u32,
    /// Summation direction override (radians).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Quadrature tolerance of the Laplace integrals.
    #[arg(long, default_value_t = 1e-12)]
    tol_quad: f64,
    /// Smallest allowed distance from a Padé pole to the ray.
    #[arg(long, default_value_t = 1e-3)]
    pole_tol: f64,
    /// Angular margin of the decay region.
    #[arg(long, default_value_t = 0.05)]
    decay_eps: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed, echoed in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the residual-versus-N_Z table.
    #[arg(long)]
    sweep: bool,
    /// Eigenvalue subset carried by the exponentials (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    subset: Vec<usize>,
    /// Integration constant `re,im`, once per subset entry.
    #[arg(long = "c", value_parser = parse_complex, allow_negative_numbers = true)]
    constants: Vec<C64>,
    /// Argument of the sample ray; the middle of the evaluation arc by default.
    #[arg(long, allow_negative_numbers = true)]
    arg: Option<f64>,
    /// Sample radii `lo:hi:count`.
    #[arg(long, value_parser = parse_radii)]
    radii: Option<Radii>,
}

impl RunArgs {
    fn config(&self, default_radii: Radii) -> RunConfig {
        RunConfig {
            n_x: self.nx,
            n_z: self.nz,
            n_q: self.nq,
            theta: self.theta,
            quad_tol: self.tol_quad,
            pole_tol: self.pole_tol,
            decay_eps: self.decay_eps,
            seed: self.seed,
            sweep: self.sweep,
            subset: self.subset.clone(),
            constants: self.constants.clone(),
            arg: self.arg,
            radii: self.radii.unwrap_or(default_radii),
            out: self.out.clone(),
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per battery.
    #[arg(long, default_value_t = 5)]
    cases: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Perturb the gauge before its residual check.
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    /// The eigenvalue with argument in (−π/2, π/2].
    Omega,
    /// Its antipode.
    Antipode,
}

#[derive(Clone, Copy, ValueEnum)]
enum RootArg {
    Plus,
    Minus,
}

#[derive(Args)]
struct PresetArgs {
    /// Which exponential the family carries.
    #[arg(long, value_enum, default_value = "omega")]
    side: SideArg,
    /// Square root taken for two-valued branch constants.
    #[arg(long, value_enum, default_value = "plus")]
    root: RootArg,
    /// x-order of the assembled system.
    #[arg(long, default_value_t = 40)]
    order: usize,
    /// Degree cap of the expanded 1/(c + u) (Painlevé IV).
    #[arg(long, default_value_t = 8)]
    ny: u32,
    /// Stop after the spectral report and formal series.
    #[arg(long)]
    analyze_only: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct P2Args {
    /// Parameter `re,im`.
    #[arg(long, value_parser = parse_complex, allow_negative_numbers = true, default_value = "1")]
    a: C64,
    /// P2.1 or P2.2.
    #[arg(long, default_value = "P2.1")]
    branch: String,
    #[command(flatten)]
    preset: PresetArgs,
}

#[derive(Args)]
struct P4Args {
    #[arg(long, value_parser = parse_complex, allow_negative_numbers = true, default_value = "0")]
    alpha: C64,
    #[arg(long, value_parser = parse_complex, allow_negative_numbers = true, default_value = "1")]
    beta: C64,
    /// P4.1a, P4.1b or P4.2.
    #[arg(long, default_value = "P4.1b")]
    branch: String,
    #[command(flatten)]
    preset: PresetArgs,
}

fn read_system(args: &SystemArgs) -> Result<String, CliError> {
    match (&args.system, &args.input) {
        (Some(text), _) => Ok(text.clone()),
        (None, Some(p)) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
        (None, Some(p)) => Ok(std::fs::read_to_string(p)?),
        (None, None) => Err(CliError::Usage("no system given".into())),
    }
}

fn painleve_request(
    branch: &str,
    params: BTreeMap<&'static str, C64>,
    p: &PresetArgs,
) -> Result<PainleveRequest, CliError> {
    let branch: Branch = branch.parse().map_err(|e: transseries::Error| CliError::Usage(e.to_string()))?;
    Ok(PainleveRequest {
        branch,
        params,
        config: PresetConfig {
            order: p.order,
            n_y: p.ny,
            root: match p.root {
                RootArg::Plus => RootSign::Plus,
                RootArg::Minus => RootSign::Minus,
            },
        },
        side: match p.side {
            SideArg::Omega => Side::Omega,
            SideArg::Antipode => Side::OmegaPlusPi,
        },
        analyze_only: p.analyze_only,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = args.run.config(Radii { lo: 0.05, hi: 0.2, count: 10 });
            cfg.validate()?;
            commands::analyze(&read_system(&args)?, &cfg)
        }
        Command::Solve(args) => {
            let cfg = args.run.config(Radii { lo: 0.05, hi: 0.2, count: 10 });
            cfg.validate()?;
            commands::solve_cmd(&read_system(&args)?, &cfg)
        }
        Command::Verify(args) => verify::verify(args.seed, args.cases, args.corrupt, &args.out).map(|_| ()),
        Command::Painleve2(args) => {
            let cfg = args.preset.run.config(PAINLEVE_RADII);
            cfg.validate()?;
            let req = painleve_request(&args.branch, BTreeMap::from([("a", args.a)]), &args.preset)?;
            commands::painleve("painleve2", &req, &cfg)
        }
        Command::Painleve4(args) => {
            let cfg = args.preset.run.config(PAINLEVE_RADII);
            cfg.validate()?;
            let params = BTreeMap::from([("alpha", args.alpha), ("beta", args.beta)]);
            let req = painleve_request(&args.branch, params, &args.preset)?;
            commands::painleve("painleve4", &req, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
