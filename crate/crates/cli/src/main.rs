//! `tempcorr`: closed forms, sweeps, figure data and Monte Carlo checks
//! for a link in a Poisson field of ALOHA interferers.

mod commands;
mod figures;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tempcorr_core::{Error, NetworkParams, ParamFile};

use table::{Format, Table};

#[derive(Parser, Debug)]
#[command(name = "tempcorr", version, about = "Temporal interference correlation in Poisson networks")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

/// Network parameters and output options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Globals {
    /// Interferer density.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Link distance.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// SIR threshold (linear).
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Path-loss exponent, > 2.
    #[arg(long, global = true, conflicts_with = "delta")]
    alpha: Option<f64>,
    /// 2/alpha.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// ALOHA transmit probability.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Receiver density for random link distances.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Contention Δ; rescales lambda to match.
    #[arg(long, global = true, conflicts_with = "lambda")]
    contention: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value parameter file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

pub const DEFAULT_SEED: u64 = 1;

/// Values for keys that neither the file nor the flags set.
fn default_params() -> NetworkParams {
    NetworkParams::new(0.1, 1.0, 1.0, 0.5, 0.5).expect("valid defaults")
}

/// Parameters after merging the config file and the flags.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub file: ParamFile,
    pub contention: Option<f64>,
}

impl Resolved {
    pub fn network(&self) -> Result<NetworkParams> {
        let n = self.file.network(&default_params())?;
        Ok(match self.contention {
            Some(c) => n.with_contention(c)?,
            None => n,
        })
    }

    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(DEFAULT_SEED)
    }
}

impl Globals {
    fn resolve(&self) -> Result<Resolved> {
        let base = match &self.config {
            Some(path) => ParamFile::load(path)?,
            None => ParamFile::default(),
        };
        let flags = ParamFile {
            lambda: self.lambda,
            r: self.r,
            theta: self.theta,
            alpha: self.alpha,
            delta: self.delta,
            p: self.p,
            mu: self.mu,
            seed: self.seed,
        };
        Ok(Resolved {
            file: base.overlay(&flags),
            contention: self.contention,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form quantities at one parameter point.
    Eval(commands::EvalArgs),
    /// Sweep one parameter and tabulate a quantity for n = 1..N slots.
    Curve(commands::CurveArgs),
    /// Data behind one of the reference figures.
    Figure(figures::FigureArgs),
    /// Monte Carlo estimate of one event probability.
    Simulate(commands::SimulateArgs),
    /// Closed form against simulation; exit status 3 if any |z| is too large.
    Compare(commands::CompareArgs),
    /// Local-delay distribution, mean and critical probabilities.
    Delay(commands::DelayArgs),
}

/// Raised when `compare` finds a z-score above its limit. The table is
/// still written.
#[derive(Debug)]
pub struct ComparisonFailed {
    pub worst: f64,
    pub limit: f64,
}

impl std::fmt::Display for ComparisonFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "comparison failed: max |z| = {:.2} exceeds {}", self.worst, self.limit)
    }
}

impl std::error::Error for ComparisonFailed {}

fn emit(table: &Table, g: &Globals) -> Result<()> {
    match &g.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            table.write(g.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(g.format, &mut lock)?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let params = cli.globals.resolve()?;
    let (table, verdict) = match &cli.command {
        Command::Eval(a) => (commands::eval(&params, a)?, None),
        Command::Curve(a) => (commands::curve(&params, a)?, None),
        Command::Figure(a) => (figures::figure(&params, a)?, None),
        Command::Simulate(a) => (commands::simulate(&params, a)?, None),
        Command::Compare(a) => {
            let (t, v) = commands::compare(&params, a)?;
            (t, v)
        }
        Command::Delay(a) => (commands::delay(&params, a)?, None),
    };
    emit(&table, &cli.globals)?;
    match verdict {
        Some(fail) => Err(fail.into()),
        None => Ok(()),
    }
}

/// 1 for bad input, 2 for a numerical failure, 3 for a failed comparison.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ComparisonFailed>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Domain(_) | Error::Config(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tempcorr: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
