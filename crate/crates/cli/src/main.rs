mod commands;
mod config;
mod ingest;

use std::path::PathBuf;
use std::process::ExitCode;

use bubbleci::{Ends, Functional};
use clap::{Args, Parser, Subcommand};

use config::Config;

/// An error with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "config", message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: 3, kind: "data", message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 4, kind: "numeric", message: message.into() }
    }
}

impl From<bubbleci::Error> for Failure {
    fn from(e: bubbleci::Error) -> Self {
        use bubbleci::Error::*;
        match e {
            Parameter(_) | Range(_) => Failure::config(e.to_string()),
            DegenerateFit(_) | DegenerateInput(_) | Overflow(_) | Fit(_) => Failure::numeric(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "bubbleci", version, about = "Bubble detection, date estimation and confidence sets for bubble dates")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Price file (CSV with a header row)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// TOML file with flat key-value settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Test level; sets have coverage 1 - delta [default: 0.10]
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Trimming fraction [default: 0.10]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Segment ends: `true` break dates or `estimated` ones
    #[arg(long, global = true)]
    ends: Option<Ends>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads, 0 for all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SADF statistic against its simulated critical value
    Detect {
        #[arg(long)]
        r0: Option<f64>,
        #[arg(long)]
        lags: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        /// Random-walk replications for the critical value [default: 2000]
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Emergence, collapse and recovery dates by step-by-step least squares
    Estimate,
    /// Confidence sets for the three dates plus plot data
    Ci {
        /// Surfaces JSON written by `tabulate`
        #[arg(long)]
        surfaces: Option<PathBuf>,
    },
    /// Monte Carlo coverage and length tables
    Mc {
        #[arg(long)]
        case: Option<usize>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Simulated critical values of the nonstandard functionals
    Tabulate {
        /// Functional to tabulate; repeat for several [default: all]
        #[arg(long = "functional")]
        functionals: Vec<Functional>,
        /// Brownian paths per grid point [default: 50000]
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

fn resolve(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let c = &cli.common;
    if let Some(v) = &c.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.delta {
        cfg.delta = v;
    }
    if let Some(v) = c.eps {
        cfg.eps = v;
    }
    if let Some(v) = c.ends {
        cfg.ends = Some(v);
    }
    if let Some(v) = &c.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = c.threads {
        cfg.threads = v;
    }
    match &cli.command {
        Command::Detect { r0, lags, level, reps } => {
            cfg.r0 = r0.or(cfg.r0);
            cfg.lags = lags.unwrap_or(cfg.lags);
            cfg.level = level.unwrap_or(cfg.level);
            cfg.reps = reps.or(cfg.reps);
        }
        Command::Ci { surfaces } => cfg.surfaces = surfaces.clone().or(cfg.surfaces),
        Command::Mc { case, a, reps } => {
            cfg.case = case.or(cfg.case);
            cfg.a = a.unwrap_or(cfg.a);
            cfg.reps = reps.or(cfg.reps);
        }
        Command::Tabulate { functionals, reps, steps } => {
            if !functionals.is_empty() {
                cfg.functionals = functionals.clone();
            }
            cfg.reps = reps.or(cfg.reps);
            cfg.steps = steps.unwrap_or(cfg.steps);
        }
        Command::Estimate => {}
    }
    if cfg.ends.is_none() {
        // simulations know the truth, data only has estimates
        let mc = matches!(cli.command, Command::Mc { .. });
        cfg.ends = Some(if mc { Ends::True } else { Ends::Estimated });
    }
    cfg.check()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve(&cli)?;
    if cfg.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    match cli.command {
        Command::Detect { .. } => commands::detect(&cfg),
        Command::Estimate => commands::estimate(&cfg),
        Command::Ci { .. } => commands::ci(&cfg),
        Command::Mc { .. } => commands::mc(&cfg),
        Command::Tabulate { .. } => commands::tabulate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let diag = serde_json::json!({ "error": f.kind, "code": f.code, "message": f.message });
            eprintln!("{diag}");
            ExitCode::from(f.code)
        }
    }
}
