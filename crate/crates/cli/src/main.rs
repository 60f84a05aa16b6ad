//! `kdvb`: batch runner for the viscous KdV and mKdV experiments.
//!
//! Exit status: 0 on success, 1 when a computation fails (a `FAILED` marker
//! is left in the run directory), 2 for usage or configuration errors, 3
//! when a checked property is violated (artifacts are complete).

mod artifacts;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use config::{ConfigError, ExperimentConfig, Subcommand};

const SIMULATE_HELP: &str = "Output trajectory.csv (#schema=kdvb.simulate.v1)
  t   node time
  k   wavenumber, 1..=K
  re  real part of the physical-gauge coefficient
  im  imaginary part";

const SWEEP_HELP: &str = "Output sweep.csv (#schema=kdvb.sweep.v1), plus fit.json when fit = true
  epsilon   viscosity of the viscous leg
  distance  sup over nodes of the H^s distance to the inviscid leg
  s         Sobolev index of the measurement
  T         horizon
  K         band limit
  seed      data seed";

const LEMMAS_HELP: &str = "Output lemmas.csv (#schema=kdvb.lemmas.v1) and lemmas.json
  claim       claim identifier
  checked     tuples examined
  violations  tuples breaking the claim
  extremum    extreme observed ratio, empty if none
  holds       true when violations = 0";

const PROBE_HELP: &str = "Output probe.csv (#schema=kdvb.probe.v1) and probe.json
  split       frequency split N
  max_ratio   largest output/input norm ratio over the trials
  mean_ratio  mean ratio
  trials      trials drawn";

const REPORT_HELP: &str = "Output report.csv (#schema=kdvb.report.v1) and budgets.json
  t            node time
  l2_norm      L2 norm of u(t)
  dissipation  2 eps times the time integral of the squared L2 norm of u_x
  hamiltonian  H[u(t)]
  value        half the squared L2 norm plus half the dissipation column
  residual     relative residual of the L2 energy identity";

const TRUNCATION_HELP: &str = "Output truncation.csv (#schema=kdvb.truncation.v1)
  cutoff         frequency cutoff of the truncated data
  data_tail      norm of the removed data tail
  direct         viscous to inviscid distance, full data
  viscous_leg    viscous full vs truncated
  truncated_gap  viscous vs inviscid, truncated data
  inviscid_leg   inviscid truncated vs full
  triangle_ok    direct <= sum of the three legs";

#[derive(Parser)]
#[command(name = "kdvb", version, about = "Viscous KdV/mKdV experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Solve once and write the trajectory
    #[command(after_help = SIMULATE_HELP)]
    Simulate(RunArgs),
    /// Viscous against inviscid distances over an epsilon list
    #[command(after_help = SWEEP_HELP)]
    Sweep(RunArgs),
    /// Exhaustive checks of the phase identities and lower bounds
    #[command(after_help = LEMMAS_HELP)]
    VerifyLemmas(RunArgs),
    /// Norm-ratio probes of one multilinear operator
    #[command(after_help = PROBE_HELP)]
    Probe(RunArgs),
    /// Energy identity, Hamiltonian and budgets along one solve
    #[command(after_help = REPORT_HELP)]
    Report(RunArgs),
    /// Frequency-truncation triangle
    #[command(after_help = TRUNCATION_HELP)]
    Truncation(RunArgs),
    /// Dispatch on the config's `subcommand` key
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file in `key = value` form
    #[arg(long)]
    config: PathBuf,
    /// Run directory; overrides `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `threads`
    #[arg(long)]
    threads: Option<usize>,
}

fn load(sc: Option<Subcommand>, args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let sc = match sc {
        Some(sc) => sc,
        None => config::declared_subcommand(&text)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "run needs a 'subcommand' key in the config".to_string())?,
    };
    let mut cfg = ExperimentConfig::parse(&text, sc).map_err(|e: ConfigError| format!("{}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match args.threads {
        Some(0) => return Err("--threads must be at least 1".into()),
        Some(n) => cfg.threads = Some(n),
        None => {}
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .ok_or_else(|| "no output directory: pass --out or set output_dir".to_string())?;
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sc, args) = match &cli.command {
        Command::Simulate(a) => (Some(Subcommand::Simulate), a),
        Command::Sweep(a) => (Some(Subcommand::Sweep), a),
        Command::VerifyLemmas(a) => (Some(Subcommand::VerifyLemmas), a),
        Command::Probe(a) => (Some(Subcommand::Probe), a),
        Command::Report(a) => (Some(Subcommand::Report), a),
        Command::Truncation(a) => (Some(Subcommand::Truncation), a),
        Command::Run(a) => (None, a),
    };
    let (cfg, out) = match load(sc, args) {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run::execute(&cfg, &out)) {
        Ok(o) if o.holds => {
            println!("{}: wrote {}", cfg.subcommand, out.display());
            ExitCode::SUCCESS
        }
        Ok(_) => {
            eprintln!("{}: a checked property failed, see {}", cfg.subcommand, out.display());
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
