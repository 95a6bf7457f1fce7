//! Command-line front end: parse the experiment config (file, environment,
//! flags), dispatch, print the summary, exit 0 iff every asserted check
//! passed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lenspace::config::{Command, ExperimentConfig, GammaLimit, GammaSequence, Overrides};
use lenspace::experiment::run_experiment;

#[derive(Parser)]
#[command(
    name = "lenspace",
    about = "Length distances induced by conformal weights: solvers, functionals, convergence experiments",
    long_about = None,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment config; flags override file values, which override
    /// defaults (env prefix LENSPACE_ sits between file and flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid step of the solver
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Stencil order: 1 (8-neighbor) or 2 (16-neighbor)
    #[arg(long)]
    stencil: Option<u32>,
    /// Verdict tolerance
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Sampling seed (fixed seed gives byte-identical reports)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON/SVG artifacts
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for independent runs
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Distance between two points (closure extension when on the boundary)
    Distance {
        #[command(flatten)]
        common: CommonArgs,
        /// First point as "x1,x2"
        #[arg(long, value_parser = parse_point)]
        from: Option<(f64, f64)>,
        /// Second point as "x1,x2"
        #[arg(long, value_parser = parse_point)]
        to: Option<(f64, f64)>,
    },
    /// Shortest path between two points as a constant-speed polyline
    Geodesic {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = parse_point)]
        from: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_point)]
        to: Option<(f64, f64)>,
    },
    /// Validate sandwich and length properties of the configured metric
    Membership {
        #[command(flatten)]
        common: CommonArgs,
        /// Sandwich constant
        #[arg(long)]
        alpha: Option<f64>,
        /// Low-discrepancy pair sample size
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// The collapsing-strip experiment: distance table, bounds, limit check
    Counterexample {
        #[command(flatten)]
        common: CommonArgs,
        /// Profile indices, e.g. "2,3,4,5"
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<u32>>,
    },
    /// Sequential convergence checks for the three functionals
    Gamma {
        #[command(flatten)]
        common: CommonArgs,
        /// Metric family: constant | profile
        #[arg(long)]
        sequence: Option<String>,
        /// Claimed limit: self-limit | double-euclid | proxy
        #[arg(long)]
        limit: Option<String>,
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<u32>>,
    },
}

fn parse_point(raw: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"x1,x2\", got {raw:?}"));
    }
    let x1 = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let x2 = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((x1, x2))
}

fn parse_gamma_sequence(raw: &str) -> Result<GammaSequence, String> {
    match raw {
        "constant" => Ok(GammaSequence::Constant),
        "profile" => Ok(GammaSequence::Profile),
        other => Err(format!("unknown sequence {other:?} (use constant | profile)")),
    }
}

fn parse_gamma_limit(raw: &str) -> Result<GammaLimit, String> {
    match raw {
        "self-limit" | "self" => Ok(GammaLimit::SelfLimit),
        "double-euclid" => Ok(GammaLimit::DoubleEuclid),
        "proxy" => Ok(GammaLimit::Proxy),
        other => Err(format!("unknown limit {other:?} (use self-limit | double-euclid | proxy)")),
    }
}

type ConfigPatch = Box<dyn FnOnce(&mut ExperimentConfig) -> Result<(), String>>;

struct Invocation {
    common: CommonArgs,
    command: Command,
    patch: ConfigPatch,
}

fn invocation(cli: CliCommand) -> Invocation {
    match cli {
        CliCommand::Distance { common, from, to } => Invocation {
            common,
            command: Command::Distance,
            patch: Box::new(move |cfg| {
                if let Some(p) = from {
                    cfg.x = Some([p.0, p.1]);
                }
                if let Some(p) = to {
                    cfg.y = Some([p.0, p.1]);
                }
                Ok(())
            }),
        },
        CliCommand::Geodesic { common, from, to } => Invocation {
            common,
            command: Command::Geodesic,
            patch: Box::new(move |cfg| {
                if let Some(p) = from {
                    cfg.x = Some([p.0, p.1]);
                }
                if let Some(p) = to {
                    cfg.y = Some([p.0, p.1]);
                }
                Ok(())
            }),
        },
        CliCommand::Membership { common, alpha, pairs } => Invocation {
            common,
            command: Command::Membership,
            patch: Box::new(move |cfg| {
                if alpha.is_some() {
                    cfg.alpha = alpha;
                }
                if pairs.is_some() {
                    cfg.pair_samples = pairs;
                }
                Ok(())
            }),
        },
        CliCommand::Counterexample { common, n_values } => Invocation {
            common,
            command: Command::Counterexample,
            patch: Box::new(move |cfg| {
                if n_values.is_some() {
                    cfg.n_values = n_values;
                }
                Ok(())
            }),
        },
        CliCommand::Gamma { common, sequence, limit, n_values } => Invocation {
            common,
            command: Command::Gamma,
            patch: Box::new(move |cfg| {
                if let Some(s) = sequence {
                    cfg.sequence = Some(parse_gamma_sequence(&s)?);
                }
                if let Some(l) = limit {
                    cfg.limit = Some(parse_gamma_limit(&l)?);
                }
                if n_values.is_some() {
                    cfg.n_values = n_values;
                }
                Ok(())
            }),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = invocation(cli.command);
    let overrides = Overrides {
        h: inv.common.h,
        stencil: inv.common.stencil,
        tol: inv.common.tol,
        seed: inv.common.seed,
        out_dir: inv.common.out_dir.clone(),
        threads: inv.common.threads,
    };
    let assembled = (|| -> Result<ExperimentConfig, lenspace::Error> {
        let mut cfg = match inv.common.config.as_deref() {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.command = Some(inv.command);
        cfg.apply_env(|key| std::env::var(key).ok())?;
        cfg.apply_overrides(&overrides);
        Ok(cfg)
    })();
    let mut cfg = match assembled {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = (inv.patch)(&mut cfg) {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    match run_experiment(&cfg) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            if outcome.pass {
                println!("PASS");
                ExitCode::SUCCESS
            } else {
                println!("FAIL");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{} failed: {e}", inv.command.name());
            ExitCode::FAILURE
        }
    }
}
