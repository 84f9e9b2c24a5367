//! Command-line frontend for the `nclaurent` engine.
//!
//! Every subcommand produces a deterministic report (JSON by default). Exit
//! codes: 0 success, 1 usage or configuration error, 2 a non-Laurent iterate
//! (a reproduction bundle is written), 3 a budget was exhausted, 4 a check failed.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nclaurent::Coeff;
use thiserror::Error;

pub use commands::{
    emit, run_division, run_iterate, run_pit, run_toric, run_verify, CheckResult, Status, VerifyReport,
};
pub use config::{Check, Format, RunConfig, TargetSel, SEED_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_LAURENT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("not Laurent at k = {k}, target {target}")]
    NotLaurent { k: i64, target: &'static str, bundle: String },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotLaurent { .. } => EXIT_NOT_LAURENT,
            CliError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        }
    }
}

impl From<nclaurent::KontsevichError> for CliError {
    fn from(e: nclaurent::KontsevichError) -> Self {
        use nclaurent::KontsevichError as K;
        match e {
            K::NotLaurent { k, target, bundle, .. } => CliError::NotLaurent { k, target: target.letter(), bundle },
            K::BudgetExceeded(m) => CliError::Budget(m),
            K::InvalidH(e) => CliError::Usage(format!("invalid H: {e}")),
            K::Engine(e) => CliError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nclaurent", version, about = "Iterates of the noncommutative Kontsevich map and their cross-checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute sigma^k(x) and/or sigma^k(y).
    Iterate(Opts),
    /// Run the enabled checks over a k-range.
    Verify(Opts),
    /// Lattice checks for the resolving toric surfaces.
    Toric(Opts),
    /// Randomized matrix evaluation of iterates over F_p.
    Pit(Opts),
    /// Recover iterates by exact left division.
    DivisionCheck(Opts),
}

/// Options shared by all subcommands; each one reads only what it needs.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Coefficients of H, constant term first, e.g. 1,0,1 for 1 + x^2.
    #[arg(long = "H", value_name = "COEFFS")]
    pub h: Option<String>,
    /// Single k (sets both ends of the range).
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i64>,
    /// Lower end of the k-range (default -6).
    #[arg(long, allow_negative_numbers = true)]
    pub k_min: Option<i64>,
    /// Upper end of the k-range (default 6).
    #[arg(long, allow_negative_numbers = true)]
    pub k_max: Option<i64>,
    /// Generator whose iterate is computed (default both).
    #[arg(long, value_enum)]
    pub target: Option<TargetSel>,
    /// Comma-separated subset of checks for `verify`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub checks: Option<Vec<Check>>,
    /// Output format (default json).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Base seed; overrides the NCLAURENT_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Refuse iterates with |k| above this (default 8).
    #[arg(long)]
    pub max_abs_k: Option<u32>,
    /// Abort when an iterate exceeds this many terms (default 10^7).
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Wall-clock guard for one iterate computation.
    #[arg(long)]
    pub max_seconds: Option<u64>,
    /// `verify` runs division only for |k| up to this (default 4).
    #[arg(long)]
    pub division_max_k: Option<i64>,
    /// Support-expansion rounds for division (default 2).
    #[arg(long)]
    pub rounds: Option<u32>,
    /// `verify` runs matrix evaluation only for |k| up to this (default 4).
    #[arg(long)]
    pub pit_max_k: Option<i64>,
    /// Random points per matrix dimension (default 20).
    #[arg(long)]
    pub trials: Option<u32>,
    /// Matrix dimensions (default 2,3).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Field characteristic (default 2^31 - 1).
    #[arg(long)]
    pub prime: Option<u64>,
    /// Degree for the lattice checks (defaults to deg H).
    #[arg(long)]
    pub n: Option<i64>,
    /// Index of the Y_i fan for the lattice checks (default 1).
    #[arg(long)]
    pub i: Option<i64>,
    /// Output file (directory for `iterate`).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings in JSON (breaks byte-identical output).
    #[arg(long)]
    pub timings: bool,
    /// Accept a non-palindromic H.
    #[arg(long)]
    pub allow_nonreversible: bool,
}

impl Opts {
    /// Layer defaults, config file, environment seed and flags.
    pub fn resolve(&self, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            cfg.apply_kv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        if let Some(s) = env_seed {
            cfg.seed = s.trim().parse().map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}")))?;
        }
        if let Some(h) = &self.h {
            cfg.h = h
                .split(',')
                .map(|c| c.trim().parse::<Coeff>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("--H: {e}")))?;
        }
        if let Some(k) = self.k {
            cfg.k_min = k;
            cfg.k_max = k;
        }
        macro_rules! take {
            ($($field:ident => $dst:ident),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { cfg.$dst = v; })*
            };
        }
        take!(k_min => k_min, k_max => k_max, target => target, checks => checks, format => format, seed => seed,
              max_abs_k => max_abs_k, max_terms => max_terms, division_max_k => division_max_k,
              rounds => division_rounds, pit_max_k => pit_max_k, trials => trials, dims => dims, prime => prime,
              i => i);
        if self.max_seconds.is_some() {
            cfg.max_seconds = self.max_seconds;
        }
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.timings |= self.timings;
        cfg.allow_nonreversible |= self.allow_nonreversible;
        Ok(cfg)
    }
}

type CommandFn = fn(&RunConfig) -> Result<commands::Report, CliError>;

/// Result of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `argv` (including the program name) and run the command, buffering
/// both streams.
pub fn run<I, S>(argv: I, env_seed: Option<&str>) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = run_to(argv, env_seed, &mut stdout, &mut stderr);
    Output {
        code,
        stdout: String::from_utf8(stdout).expect("output is UTF-8"),
        stderr: String::from_utf8(stderr).expect("output is UTF-8"),
    }
}

/// Parse `argv` and run the command, streaming the report to `stdout`.
/// Returns the exit code.
pub fn run_to<I, S>(argv: I, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let (opts, cmd): (&Opts, CommandFn) = match &cli.command {
        Command::Iterate(o) => (o, run_iterate),
        Command::Verify(o) => (o, |c| run_verify(c).map(Into::into)),
        Command::Toric(o) => (o, run_toric),
        Command::Pit(o) => (o, run_pit),
        Command::DivisionCheck(o) => (o, run_division),
    };
    let result = opts.resolve(env_seed).and_then(|cfg| cmd(&cfg).map(|r| (cfg, r)));
    let err = match result {
        Ok((cfg, report)) => {
            for w in &report.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            match commands::emit(&cfg, &report, stdout) {
                Ok(()) => return if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED },
                Err(e) => e,
            }
        }
        Err(e) => e,
    };
    let _ = writeln!(stderr, "error: {err}");
    if let CliError::NotLaurent { bundle, .. } = &err {
        let cfg = opts.resolve(env_seed).ok();
        match commands::write_bundle(cfg.as_ref().and_then(|c| c.out.as_deref()), bundle) {
            Ok(path) => {
                let _ = writeln!(stderr, "reproduction bundle written to {}", path.display());
            }
            Err(w) => {
                let _ = writeln!(stderr, "could not write reproduction bundle: {w}\n{bundle}");
            }
        }
    }
    err.exit_code()
}
