//! `softsqueeze`: integrate, scan, design and convert soft squeezing pulses.
//!
//! Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 validation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod parse;

use config::{CliResult, Format, RunConfig};
use softsqueeze::mathieu::Entry;
use softsqueeze::BeltConvention;

#[derive(Parser, Debug)]
#[command(
    name = "softsqueeze",
    version,
    about = "Soft squeezing pulses in quadratic traps"
)]
struct Cli {
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixed-step RK4 with this many steps per run.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Adaptive Dormand-Prince relative tolerance.
    #[arg(long, global = true)]
    rtol: Option<f64>,
    /// Adaptive Dormand-Prince absolute tolerance.
    #[arg(long, global = true)]
    atol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolution matrix u(to, from) with det, trace and zone.
    Evolve(EvolveArgs),
    /// Mathieu-plane scan, u12/u21 zero loci, or a double-zero refinement.
    Scan(ScanArgs),
    /// Build and verify a designed pulse; chain several with repeated --b.
    Design(DesignArgs),
    /// Moment shadow or trajectory congruence along a pulse.
    Shadow(ShadowArgs),
    /// Laboratory-unit estimates for a proton in a Paul trap.
    Units(UnitsArgs),
    /// Off-axis solenoid field correction or rotating-cylinder field.
    Solenoid(SolenoidArgs),
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Profile as inline JSON or a path to a JSON file.
    #[arg(long)]
    pub profile: Option<String>,
    /// Initial time; decimals or fractions like pi/2.
    #[arg(long, value_parser = parse::real, allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// Final time.
    #[arg(long, value_parser = parse::real, allow_hyphen_values = true)]
    pub to: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// beta0 range `lo,hi`.
    #[arg(long, value_parser = parse::pair, default_value = "0.9,1.9")]
    pub beta0: (f64, f64),
    /// beta1 range `lo,hi`.
    #[arg(long, value_parser = parse::pair, default_value = "0.5,1.6")]
    pub beta1: (f64, f64),
    #[arg(long, default_value_t = 200)]
    pub n0: usize,
    #[arg(long, default_value_t = 200)]
    pub n1: usize,
    /// Interval start.
    #[arg(long, value_parser = parse::real, default_value = "pi/2", allow_hyphen_values = true)]
    pub from: f64,
    /// Interval end.
    #[arg(long, value_parser = parse::real, default_value = "5pi/2", allow_hyphen_values = true)]
    pub to: f64,
    /// Emit the zero locus of this entry instead of the grid.
    #[arg(long, conflicts_with = "double_zero")]
    pub locus: Option<Entry>,
    /// Refine a simultaneous zero of u12 and u21 from --seed.
    #[arg(long, requires = "seed")]
    pub double_zero: bool,
    /// Newton seed `beta0,beta1`.
    #[arg(long, value_parser = parse::pair)]
    pub seed: Option<(f64, f64)>,
}

#[derive(Args, Debug, Clone)]
pub struct PulseArgs {
    /// Stage amplitudes b (u12 of each stage); repeat to chain stages.
    #[arg(long = "b", value_parser = parse::real, allow_hyphen_values = true)]
    pub b: Vec<f64>,
    /// End stiffness of each stage; one value applies to all.
    #[arg(long, value_parser = parse::real, allow_hyphen_values = true)]
    pub beta0: Vec<f64>,
    /// Append a constant quarter-period tail to the last stage.
    #[arg(long)]
    pub tail: bool,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,
    /// Number of beta(tau) samples.
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Also write the beta(tau) samples CSV here.
    #[arg(long)]
    pub beta_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ShadowArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,
    /// Use this profile instead of a designed pulse (needs --from/--to).
    #[arg(long, conflicts_with = "b")]
    pub profile: Option<String>,
    #[arg(long, value_parser = parse::real, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, value_parser = parse::real, allow_hyphen_values = true)]
    pub to: Option<f64>,
    /// Initial packet squeeze: Delta q² = 1/(2 kappa).
    #[arg(long, value_parser = parse::real, default_value = "1")]
    pub kappa: f64,
    #[arg(long, value_parser = parse::real, default_value = "0", allow_hyphen_values = true)]
    pub q0: f64,
    #[arg(long, value_parser = parse::real, default_value = "0", allow_hyphen_values = true)]
    pub p0: f64,
    /// Number of output times.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Radius of the electrode belt in units of the packet width.
    #[arg(long, value_parser = parse::real, default_value = "10")]
    pub belt: f64,
    /// Emit trajectories of these classical initial states `q,p` instead.
    #[arg(long = "init", value_parser = parse::pair, allow_hyphen_values = true)]
    pub inits: Vec<(f64, f64)>,
}

#[derive(Args, Debug)]
pub struct UnitsArgs {
    /// Trap size r0, cm.
    #[arg(long, value_parser = parse::real, default_value = "10")]
    pub r0: f64,
    /// Time scale T, s.
    #[arg(long = "t", value_parser = parse::real, default_value = "1")]
    pub t_scale: f64,
    /// Particle mass, g (default proton).
    #[arg(long, value_parser = parse::real)]
    pub mass: Option<f64>,
    /// Particle charge, esu (default proton).
    #[arg(long, value_parser = parse::real)]
    pub charge: Option<f64>,
    #[arg(long, value_parser = parse::real, default_value = "1.217", allow_hyphen_values = true)]
    pub beta0: f64,
    #[arg(long, value_parser = parse::real, default_value = "0.844", allow_hyphen_values = true)]
    pub beta1: f64,
    /// Paul trap drive frequency, 1/s.
    #[arg(long, value_parser = parse::real, default_value = "1e5")]
    pub omega: f64,
    /// Time scales for the scaling table, s.
    #[arg(long, value_parser = parse::real, value_delimiter = ',', default_value = "1e-3,1,100")]
    pub t_values: Vec<f64>,
    /// Radiative characteristic time, s (default 2e²/3mc³).
    #[arg(long, value_parser = parse::real)]
    pub sigma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolenoidArgs {
    /// Field inside a rotating charged cylinder instead of the series.
    #[arg(long)]
    pub cylinder: bool,
    /// Cylinder angular velocity, 1/s.
    #[arg(long, value_parser = parse::real, default_value = "1")]
    pub omega: f64,
    /// Linear charge density: esu/cm, or with suffix C.
    #[arg(long, value_parser = parse::charge, default_value = "1C")]
    pub qlin: f64,
    #[arg(long, value_enum, default_value_t = Convention::Belt)]
    pub convention: Convention,
    /// On-axis field and its tau-derivatives `B, B', B'', ...` in G.
    #[arg(long, value_parser = parse::real, value_delimiter = ',', allow_hyphen_values = true)]
    pub derivs: Vec<f64>,
    /// Radius, cm.
    #[arg(long, value_parser = parse::real, default_value = "0")]
    pub r: f64,
    /// Series order n (needs 2n+1 derivatives).
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Solenoid radius r0, cm.
    #[arg(long, value_parser = parse::real, default_value = "10")]
    pub r0: f64,
    /// Time scale T, s.
    #[arg(long = "t", value_parser = parse::real, default_value = "1")]
    pub t_scale: f64,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Convention {
    Belt,
    Standard,
}

impl From<Convention> for BeltConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Belt => BeltConvention::Belt,
            Convention::Standard => BeltConvention::Standard,
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ctx = commands::Context {
        integrator: config::integrator(cli.steps, cli.rtol, cli.atol, &file)?,
        format: cli.format.or(file.format),
        out: cli.out.clone().or_else(|| file.out.clone()),
        seed: file.seed,
    };
    match &cli.command {
        Command::Evolve(a) => commands::evolve(&ctx, a, &file),
        Command::Scan(a) => commands::scan(&ctx, a),
        Command::Design(a) => commands::design(&ctx, a),
        Command::Shadow(a) => commands::shadow(&ctx, a, &file),
        Command::Units(a) => commands::units(&ctx, a),
        Command::Solenoid(a) => commands::solenoid(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
