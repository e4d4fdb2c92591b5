//! Command-line driver for `besov-core`: simulations, decompositions, paraproduct audits,
//! the exponent calculus and the full verification suite.
//!
//! ```text
//! besov-lab simulate|decompose|paraproduct-audit|verify-all --config <path> [--out <dir>] [--seed <u64>]
//! besov-lab calculus <α> [d] [--beta <β>] [--p <p>] [--config <path>] [--out <dir>]
//! ```
//!
//! Exit codes: 0 pass, 1 audit failure, 2 config error, 3 runtime abort.

pub mod audits;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{CalculusSpec, LoadedConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "besov-lab", version, about = "Pseudo-spectral Besov laboratory for singular-drift active scalars")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for random synthetic fields (overrides the config's `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured equation and write per-shell records.
    Simulate(Common),
    /// Shell norms, Besov norms and the Hölder fit of the initial datum.
    Decompose(Common),
    /// Bony reconstruction and J-certificates on the initial datum.
    ParaproductAudit(Common),
    /// Exact exponent plan for (α, d), or the modified-SQG window with --beta and --p.
    Calculus {
        /// Hölder index as "a/b".
        alpha: Option<String>,
        /// Dimension.
        d: Option<u32>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every selected audit and write the verification report.
    VerifyAll(Common),
}

fn load(common: &Common) -> CliResult<(LoadedConfig, u64, PathBuf)> {
    let cfg = LoadedConfig::load(&common.config)?;
    let seed = common.seed.unwrap_or(cfg.config.seed);
    let out = commands::resolve_out(Some(&cfg), common.out.as_deref());
    Ok((cfg, seed, out))
}

/// Runs one command and returns its exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Simulate(c) => {
            let (cfg, seed, out) = load(&c)?;
            commands::simulate(&cfg, seed, &out)
        }
        Command::Decompose(c) => {
            let (cfg, seed, out) = load(&c)?;
            commands::decompose(&cfg, seed, &out)
        }
        Command::ParaproductAudit(c) => {
            let (cfg, seed, out) = load(&c)?;
            commands::paraproduct_audit(&cfg, seed, &out)
        }
        Command::VerifyAll(c) => {
            let (cfg, seed, out) = load(&c)?;
            commands::verify_all(&cfg, seed, &out)
        }
        Command::Calculus { alpha, d, beta, p, config, out, seed: _ } => {
            let from_config = match &config {
                Some(path) => LoadedConfig::load(path)?.config.calculus,
                None => None,
            };
            let spec = match (alpha, from_config) {
                (Some(alpha), base) => CalculusSpec {
                    alpha,
                    d: d.or(base.as_ref().map(|b| b.d)).unwrap_or(2),
                    beta: beta.or(base.as_ref().and_then(|b| b.beta.clone())),
                    p: p.or(base.and_then(|b| b.p)),
                },
                (None, Some(base)) => CalculusSpec {
                    d: d.unwrap_or(base.d),
                    beta: beta.or(base.beta),
                    p: p.or(base.p),
                    alpha: base.alpha,
                },
                (None, None) => {
                    return Err(CliError::Config(
                        "calculus needs α (positional) or a config with a \"calculus\" section".into(),
                    ))
                }
            };
            commands::calculus(&spec, out.as_deref())
        }
    }
}
