//! `levy-hjmm`: command-line front end.
//!
//! Exit codes: 0 success, 1 failed checks or runtime errors, 2 usage errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "levy-hjmm", version, about = "Lévy-driven forward-rate models", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a spec and decide whether it has an affine realization.
    Check {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate forward-curve paths.
    Simulate {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Zero-coupon bond price P(0, T) from the initial curve.
    Price {
        spec: PathBuf,
        #[arg(long)]
        maturity: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo check that P(T/2, T)/B(T/2) has mean P(0, T).
    Martingale {
        spec: PathBuf,
        #[arg(long)]
        maturity: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Switch the no-arbitrage drift off (negative control).
        #[arg(long)]
        no_drift: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical rank of Ψ(θᵢ·(−∫σ(h₀))) and, optionally, of sampled V^Ψ.
    RankProbe {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        thetas: Vec<f64>,
        /// Number of sample maturities.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Also estimate dim V^Ψ from this many sampled points (needs --seed).
        #[arg(long, requires = "seed")]
        vpsi: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Jump moments and cumulant Taylor coefficients up to order N.
    Moments {
        spec: PathBuf,
        #[arg(short = 'N', long = "order", default_value_t = 10)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence table for a two-variable geometric power series.
    SeriesDemo {
        /// Highest truncation degree.
        #[arg(long, default_value_t = 30)]
        max_degree: u32,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Reduced,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Master seed; path i uses the stream (seed, i).
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    paths: usize,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
}

#[derive(Debug, Args)]
struct Common {
    /// Directory for data files and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the spec's grid size.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Override the spec's largest maturity.
    #[arg(long)]
    x_max: Option<f64>,
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("LEVY_HJMM_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("LEVY_HJMM_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("LEVY_HJMM_THREADS must be a positive integer, got 0".into());
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
