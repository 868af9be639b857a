//! Command-line driver: parameter sweeps, figure reproduction, ensemble
//! runs, and cross-validation of the three probability pipelines.
//!
//! Subcommands: `fig5`, `fig6`, `metrics`, `run`, `compare`. Every knob
//! can come from a `key=value` config file (`--config`) or a flag; flags
//! override the file. Exit codes: 0 success, 1 validation error,
//! 2 oracle deviation in `compare`.

pub mod commands;
pub mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::{
    cmd_compare, cmd_fig5, cmd_fig6, cmd_metrics, cmd_run, CompareConfig, Fig5Config, Fig6Config,
    MetricsConfig, RunConfig,
};
use config::{parse_config, ConfigError, ConfigMap};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Protocol(#[from] wconc::ecp::EcpError),
    #[error(transparent)]
    Gate(#[from] wconc::pcg::PcgError),
    #[error(transparent)]
    Cavity(#[from] wconc::cavity::CavityError),
}

#[derive(Debug, Parser)]
#[command(name = "wconc", about = "W-state entanglement concentration analysis", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default, Clone)]
struct CommonArgs {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for anything randomized.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of protocol rounds.
    #[arg(long)]
    rounds: Option<u32>,
    /// Monte Carlo trajectories.
    #[arg(long)]
    trajectories: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Balanced-condition success probabilities vs beta² (CSV).
    Fig5 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        beta_sq_min: Option<f64>,
        #[arg(long)]
        beta_sq_max: Option<f64>,
        #[arg(long)]
        beta_sq_step: Option<f64>,
    },
    /// Gate fidelity/efficiency over the coupling-leakage grid (CSV).
    Fig6 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        ratio_min: Option<f64>,
        #[arg(long)]
        ratio_max: Option<f64>,
        #[arg(long)]
        ratio_step: Option<f64>,
        #[arg(long)]
        ks_min: Option<f64>,
        #[arg(long)]
        ks_max: Option<f64>,
        #[arg(long)]
        ks_step: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Gate metrics at a single cavity point.
    Metrics {
        #[command(flatten)]
        common: CommonArgs,
        /// Normalized coupling g/(κ+κ_s).
        #[arg(long)]
        ratio: Option<f64>,
        /// Leakage ratio κ_s/κ.
        #[arg(long)]
        ks: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Monte Carlo ensemble run; per-round ledger CSV.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        alpha_sq: Option<f64>,
        #[arg(long)]
        beta_sq: Option<f64>,
        #[arg(long)]
        gamma_sq: Option<f64>,
        /// Input pairs consumed by step 1.
        #[arg(long)]
        pairs: Option<u64>,
        /// ideal | lossy
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        ks: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Count both photon pairs of an even herald as pairable.
        #[arg(long)]
        count_both_pairs: bool,
    },
    /// Cross-validate closed form vs exact enumeration vs Monte Carlo.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Random parameter triples to test.
        #[arg(long)]
        trials: Option<u32>,
    },
}

fn load_config(common: &CommonArgs) -> Result<ConfigMap, CliError> {
    match &common.config {
        None => Ok(ConfigMap::default()),
        Some(path) => Ok(parse_config(&fs::read_to_string(path)?)?),
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn with_sink(
    common: &CommonArgs,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &common.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(fs::File::create(path)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

/// Run the parsed CLI; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Fig5 { common, beta_sq_min, beta_sq_max, beta_sq_step } => {
            let file = load_config(&common)?;
            let d = Fig5Config::default();
            let cfg = Fig5Config {
                beta_sq_min: pick(beta_sq_min, file.get_f64("beta_sq_min")?, d.beta_sq_min),
                beta_sq_max: pick(beta_sq_max, file.get_f64("beta_sq_max")?, d.beta_sq_max),
                beta_sq_step: pick(beta_sq_step, file.get_f64("beta_sq_step")?, d.beta_sq_step),
            };
            with_sink(&common, |out| cmd_fig5(&cfg, out))?;
            Ok(0)
        }
        Command::Fig6 {
            common,
            ratio_min,
            ratio_max,
            ratio_step,
            ks_min,
            ks_max,
            ks_step,
            gamma,
        } => {
            let file = load_config(&common)?;
            let d = Fig6Config::default();
            let cfg = Fig6Config {
                ratio_min: pick(ratio_min, file.get_f64("ratio_min")?, d.ratio_min),
                ratio_max: pick(ratio_max, file.get_f64("ratio_max")?, d.ratio_max),
                ratio_step: pick(ratio_step, file.get_f64("ratio_step")?, d.ratio_step),
                ks_min: pick(ks_min, file.get_f64("ks_min")?, d.ks_min),
                ks_max: pick(ks_max, file.get_f64("ks_max")?, d.ks_max),
                ks_step: pick(ks_step, file.get_f64("ks_step")?, d.ks_step),
                gamma: pick(gamma, file.get_f64("gamma")?, d.gamma),
            };
            with_sink(&common, |out| cmd_fig6(&cfg, out))?;
            Ok(0)
        }
        Command::Metrics { common, ratio, ks, gamma } => {
            let file = load_config(&common)?;
            let d = MetricsConfig::default();
            let cfg = MetricsConfig {
                ratio: pick(ratio, file.get_f64("ratio")?, d.ratio),
                ks: pick(ks, file.get_f64("ks")?, d.ks),
                gamma: pick(gamma, file.get_f64("gamma")?, d.gamma),
            };
            with_sink(&common, |out| cmd_metrics(&cfg, out))?;
            Ok(0)
        }
        Command::Run {
            common,
            alpha_sq,
            beta_sq,
            gamma_sq,
            pairs,
            mode,
            ratio,
            ks,
            gamma,
            count_both_pairs,
        } => {
            let file = load_config(&common)?;
            let d = RunConfig::default();
            let mode_name = pick(mode, file.get("mode").map(str::to_string), "ideal".into());
            let lossy = match mode_name.as_str() {
                "ideal" => None,
                "lossy" => {
                    let dm = MetricsConfig::default();
                    Some(MetricsConfig {
                        ratio: pick(ratio, file.get_f64("ratio")?, dm.ratio),
                        ks: pick(ks, file.get_f64("ks")?, dm.ks),
                        gamma: pick(gamma, file.get_f64("gamma")?, dm.gamma),
                    })
                }
                other => {
                    return Err(CliError::Invalid(format!(
                        "mode must be `ideal` or `lossy`, got `{other}`"
                    )))
                }
            };
            let cfg = RunConfig {
                alpha_sq: pick(alpha_sq, file.get_f64("alpha_sq")?, d.alpha_sq),
                beta_sq: pick(beta_sq, file.get_f64("beta_sq")?, d.beta_sq),
                gamma_sq: pick(gamma_sq, file.get_f64("gamma_sq")?, d.gamma_sq),
                pairs: pick(pairs, file.get_u64("pairs")?, d.pairs),
                rounds: pick(common.rounds, file.get_u32("rounds")?, d.rounds),
                seed: pick(common.seed, file.get_u64("seed")?, d.seed),
                lossy,
                count_both_pairs: count_both_pairs
                    || file.get_bool("count_both_pairs")?.unwrap_or(false),
            };
            with_sink(&common, |out| cmd_run(&cfg, out))?;
            Ok(0)
        }
        Command::Compare { common, trials } => {
            let file = load_config(&common)?;
            let d = CompareConfig::default();
            let cfg = CompareConfig {
                trials: pick(trials, file.get_u32("trials")?, d.trials),
                trajectories: pick(
                    common.trajectories,
                    file.get_u64("trajectories")?,
                    d.trajectories,
                ),
                seed: pick(common.seed, file.get_u64("seed")?, d.seed),
                rounds: pick(common.rounds, file.get_u32("rounds")?, d.rounds),
            };
            let mut passed = true;
            with_sink(&common, |out| {
                passed = cmd_compare(&cfg, out)?.passed();
                Ok(())
            })?;
            Ok(if passed { 0 } else { 2 })
        }
    }
}
