//! `quadconc`: certify, bound, simulate and compare concentration of
//! quadratic forms `ξᵀAξ`.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quadconc_core::bernstein::DEFAULT_P_MAX;
use quadconc_core::montecarlo::{DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE};

use report::Format;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs (exit 2).
    Usage(String),
    Core(quadconc_core::Error),
}

impl From<quadconc_core::Error> for CliError {
    fn from(e: quadconc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// A fixed scale `K` or `auto` (maximum per-coordinate minimal `K`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KArg {
    Value(f64),
    Auto,
}

fn parse_k(s: &str) -> Result<KArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(KArg::Auto);
    }
    match s.parse::<f64>() {
        Ok(k) if k.is_finite() && k > 0.0 => Ok(KArg::Value(k)),
        _ => Err(format!("expected a positive number or `auto`, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quadconc",
    version,
    about = "Concentration bounds for quadratic forms ξᵀAξ"
)]
#[command(
    after_help = "Set QUADCONC_THREADS to cap the worker count; it never changes results.\n\
Exit status: 0 success, 2 invalid input, 3 numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Sampling {
    #[arg(long, default_value_t = 100_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per random sub-stream; part of the reproducibility contract.
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    /// One-sided confidence of the reported bounds.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the Bernstein moment condition E|X|^{2p} ≤ ½ p! σ² K^{2(p−1)} for p = 2..=p-max.
    Certify {
        /// Distribution JSON, e.g. {"kind": "gaussian", "sigma": 1.0}.
        #[arg(long)]
        dist: PathBuf,
        /// Scale K, or `auto` for the smallest certified K.
        #[arg(long = "K", value_parser = parse_k)]
        k: KArg,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        p_max: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Check the moment generating function inequalities on their default grids.
    MgfVerify {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long = "K", value_parser = parse_k)]
        k: KArg,
        /// Inequality to check; all three when omitted.
        #[arg(long, value_enum)]
        which: Option<commands::Which>,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        p_max: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate the three tail bounds on a t grid, or deviation bounds on an x grid.
    #[command(group(clap::ArgGroup::new("grid").required(true).args(["t_grid", "x_grid"])))]
    #[command(group(clap::ArgGroup::new("scales").required(true).args(["sigmas", "dists"])))]
    Bounds {
        /// Matrix CSV (n rows of n values) or JSON ({"n", "entries"}) by extension.
        #[arg(long)]
        matrix: PathBuf,
        /// JSON array of coordinate standard deviations.
        #[arg(long)]
        sigmas: Option<PathBuf>,
        /// Distribution JSON: one spec for every coordinate or an array of n specs.
        #[arg(long)]
        dists: Option<PathBuf>,
        /// Scale K, or `auto` (needs --dists).
        #[arg(long = "K", value_parser = parse_k)]
        k: KArg,
        /// Absolute constant of the Hanson-Wright bound; the inequality does not pin it.
        #[arg(long)]
        hw_c: Option<f64>,
        /// geom:START:STOP:COUNT, lin:START:STOP:COUNT or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        t_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        x_grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo tail frequencies with one-sided Clopper-Pearson bounds.
    Simulate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        dists: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: String,
        /// Adds a bernstein_tail column at this scale.
        #[arg(long = "K", value_parser = parse_k)]
        k: Option<KArg>,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical deviation quantiles next to the analytic deviation bounds.
    ///
    /// CSV columns: x, level (1 − e^{−x}), empirical_quantile,
    /// quantile_upper_confidence (order-statistic bound at --confidence),
    /// bernstein_deviation, hanson_wright_deviation, gaussian_chaos_deviation
    /// (empty unless every coordinate is Gaussian).
    Compare {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        dists: PathBuf,
        #[arg(long = "K", value_parser = parse_k)]
        k: KArg,
        #[arg(long)]
        hw_c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x_grid: String,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Exact tail probabilities by enumerating discrete coordinates (at most 2^24 states).
    Enumerate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        dists: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t_grid: String,
        /// Adds a bernstein_tail column at this scale.
        #[arg(long = "K", value_parser = parse_k)]
        k: Option<KArg>,
        #[command(flatten)]
        output: Output,
    },
}

fn workers() -> Result<Option<usize>, CliError> {
    match std::env::var("QUADCONC_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "QUADCONC_THREADS must be a positive integer, got {s:?}"
            ))),
        },
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let threads = workers()?;
    let go = move || commands::dispatch(cli.command, argv);
    match threads {
        Some(n) => quadconc_core::montecarlo::with_workers(n, go)?,
        None => go(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quadconc: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadconc_core::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Core(Error::InvalidInput("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::Core(Error::NonConvergence { iterations: 10 }).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(Error::MomentOverflow { p: 40 }).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(Error::Quadrature {
                estimate: 1.0,
                error: 1.0
            })
            .exit_code(),
            3
        );
    }

    #[test]
    fn k_argument() {
        assert_eq!(parse_k("auto"), Ok(KArg::Auto));
        assert_eq!(parse_k("1.5"), Ok(KArg::Value(1.5)));
        assert!(parse_k("0").is_err() && parse_k("nan").is_err() && parse_k("x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
