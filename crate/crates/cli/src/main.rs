//! `thinfilm` batch front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 inequality violation beyond the configured slack.

mod commands;
mod config;
mod output;
mod report;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "thinfilm", about = "Long-wave unstable thin film laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration file (flat key = value text).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in outputs; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Bypass regime/energy preconditions (certify-blowup) or warnings.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the regularized problem and emit ledger, snapshots, report.
    Simulate(CommonArgs),
    /// Measure per-mode growth rates against the linear dispersion relation.
    Dispersion(CommonArgs),
    /// Run the blow-up continuation loop and emit the second-moment
    /// certificate.
    CertifyBlowup(CommonArgs),
    /// Run a droplet and fit the support spreading exponent.
    Spreading(CommonArgs),
    /// Sweep (n, m) cells and emit the regime/theorem-applicability map.
    Regime(CommonArgs),
}

fn run(args: &CommonArgs, f: impl FnOnce(&config::ExperimentConfig, &std::path::Path) -> Result<(), commands::CmdError>) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return 1;
        }
    };
    let mut cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return 1;
    }
    match f(&cfg, &out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(args) => run(args, commands::cmd_simulate),
        Command::Dispersion(args) => run(args, commands::cmd_dispersion),
        Command::CertifyBlowup(args) => {
            let force = args.force;
            run(args, move |c, o| commands::cmd_certify_blowup(c, o, force))
        }
        Command::Spreading(args) => {
            let force = args.force;
            run(args, move |c, o| commands::cmd_spreading(c, o, force))
        }
        Command::Regime(args) => run(args, commands::cmd_regime),
    };
    std::process::exit(code);
}
