//! Experiment configuration. Every subcommand takes flags and an optional
//! `--config` TOML file; values present in the file override flags, and
//! anything left unset falls back to the published defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Defaults {
    pub matching: MatchingDefaults,
    pub protocol: ProtocolDefaults,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct MatchingDefaults {
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ProtocolDefaults {
    pub beta: f64,
}

pub const DEFAULTS_TOML: &str = include_str!("../defaults.toml");

pub fn defaults() -> Defaults {
    toml::from_str(DEFAULTS_TOML).expect("bundled defaults.toml is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Copies of the proper state of the best assignment.
    Honest,
    /// Uniform superposition over a random half of `[N]`.
    Concentrated,
    /// Proper state with one shared random phase pattern.
    Phased,
    /// Independent perturbations of a proper state.
    Nonidentical,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Concentrated => "concentrated",
            Strategy::Phased => "phased",
            Strategy::Nonidentical => "nonidentical",
        }
    }
}

fn load_file<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `file.field.or(flags.field)` for every listed field.
macro_rules! overlay {
    ($flags:expr, $file:expr, [$($f:ident),* $(,)?]) => {{
        let (flags, file) = ($flags, $file);
        Self { config: None, $($f: file.$f.or(flags.$f)),* }
    }};
}

fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Config(format!("missing required parameter `{name}`")))
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

/// SHA-256 of the canonical JSON encoding of a resolved config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceArgs {
    /// TOML file whose values override the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// 3SAT instance in `p 3sat` format.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub max_occurrence: Option<usize>,
    #[arg(long)]
    pub pad_to: Option<usize>,
    /// Largest number of free variables to brute force.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Skip the brute-force gap measurement.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_gap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub max_occurrence: usize,
    pub pad_to: Option<usize>,
    pub cap: usize,
    pub measure_gap: bool,
}

impl ReduceArgs {
    pub fn resolve(self) -> Result<ReduceConfig> {
        let file: ReduceArgs = load_file(self.config.as_deref())?;
        let a = overlay!(self, file, [input, out_dir, max_occurrence, pad_to, cap, no_gap]);
        let cfg = ReduceConfig {
            input: require(a.input, "input")?,
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("qmak-out/reduce")),
            max_occurrence: a.max_occurrence.unwrap_or(qmak_core::reduction::DEFAULT_MAX_OCCURRENCE),
            pad_to: a.pad_to,
            cap: a.cap.unwrap_or(qmak_core::sat::DEFAULT_BRUTE_FORCE_CAP),
            measure_gap: !a.no_gap.unwrap_or(false),
        };
        check(cfg.max_occurrence >= qmak_core::reduction::MIN_MAX_OCCURRENCE, || {
            format!(
                "max_occurrence must be at least {}",
                qmak_core::reduction::MIN_MAX_OCCURRENCE
            )
        })?;
        check(cfg.cap <= 40, || "cap above 40 is not supported".into())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Reduction certificate written by `reduce`.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    /// Number of witnesses; defaults to `ceil(beta sqrt N)`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Support size of the concentrated strategy as a fraction of N.
    #[arg(long)]
    pub support_fraction: Option<f64>,
    /// Phase spread of the phased strategy.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Infidelity budget of the nonidentical strategy.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub certificate: PathBuf,
    pub strategy: Strategy,
    pub k: usize,
    pub beta: f64,
    pub trials: u64,
    pub seed: u64,
    pub support_fraction: f64,
    pub sigma: f64,
    pub delta: f64,
    pub cap: usize,
    pub out_dir: PathBuf,
}

impl SimulateArgs {
    /// `n` is the target dimension, needed for the default K.
    pub fn resolve(self, n_of: impl FnOnce(&Path) -> Result<usize>) -> Result<SimulateConfig> {
        let file: SimulateArgs = load_file(self.config.as_deref())?;
        let a = overlay!(
            self,
            file,
            [
                certificate,
                strategy,
                k,
                beta,
                trials,
                seed,
                support_fraction,
                sigma,
                delta,
                cap,
                out_dir
            ]
        );
        let certificate = require(a.certificate, "certificate")?;
        let beta = a.beta.unwrap_or(defaults().protocol.beta);
        check(beta > 0.0 && beta.is_finite(), || {
            format!("beta must be positive, got {beta}")
        })?;
        let n = n_of(&certificate)?;
        let cfg = SimulateConfig {
            strategy: a.strategy.unwrap_or(Strategy::Honest),
            k: a.k.unwrap_or_else(|| qmak_core::verifier::default_k(n, beta)),
            beta,
            trials: a.trials.unwrap_or(10_000),
            seed: require(a.seed, "seed")?,
            support_fraction: a.support_fraction.unwrap_or(0.5),
            sigma: a.sigma.unwrap_or(std::f64::consts::FRAC_PI_2),
            delta: a.delta.unwrap_or(0.1),
            cap: a.cap.unwrap_or(qmak_core::sat::DEFAULT_BRUTE_FORCE_CAP),
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("qmak-out/simulate")),
            certificate,
        };
        check(cfg.k >= 2, || "k must be at least 2".into())?;
        check(cfg.trials >= 1, || "trials must be positive".into())?;
        check(cfg.support_fraction > 0.0 && cfg.support_fraction <= 1.0, || {
            format!("support_fraction must be in (0, 1], got {}", cfg.support_fraction)
        })?;
        check(cfg.sigma >= 0.0 && cfg.sigma.is_finite(), || {
            format!("sigma must be nonnegative, got {}", cfg.sigma)
        })?;
        check(cfg.delta > 0.0 && cfg.delta < 1.0, || {
            format!("delta must be in (0, 1), got {}", cfg.delta)
        })?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random instances per property sweep.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Random matchings per unbalanced-edge check.
    #[arg(long)]
    pub matchings: Option<u64>,
    /// Monte-Carlo trials for collision checks.
    #[arg(long)]
    pub mc_trials: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmasConfig {
    pub seed: u64,
    pub instances: usize,
    pub matchings: u64,
    pub mc_trials: u64,
    pub c: f64,
    pub d: f64,
    pub out_dir: PathBuf,
}

impl LemmasArgs {
    pub fn resolve(self) -> Result<LemmasConfig> {
        let file: LemmasArgs = load_file(self.config.as_deref())?;
        let a = overlay!(self, file, [seed, instances, matchings, mc_trials, c, d, out_dir]);
        let def = defaults();
        let cfg = LemmasConfig {
            seed: require(a.seed, "seed")?,
            instances: a.instances.unwrap_or(10_000),
            matchings: a.matchings.unwrap_or(10_000),
            mc_trials: a.mc_trials.unwrap_or(10_000),
            c: a.c.unwrap_or(def.matching.c),
            d: a.d.unwrap_or(def.matching.d),
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("qmak-out/lemmas")),
        };
        check(cfg.instances >= 1 && cfg.matchings >= 1 && cfg.mc_trials >= 1, || {
            "counts must be positive".into()
        })?;
        check(cfg.c > 0.0 && cfg.d > 0.0, || "c and d must be positive".into())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Comma-separated even dimensions.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub strategies: Option<Vec<Strategy>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub support_fraction: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub trials: u64,
    pub seed: u64,
    pub support_fraction: f64,
    pub sigma: f64,
    pub delta: f64,
    pub out_dir: PathBuf,
}

impl SweepArgs {
    pub fn resolve(self) -> Result<SweepConfig> {
        let file: SweepArgs = load_file(self.config.as_deref())?;
        let a = overlay!(
            self,
            file,
            [
                ns,
                betas,
                strategies,
                trials,
                seed,
                support_fraction,
                sigma,
                delta,
                out_dir
            ]
        );
        let cfg = SweepConfig {
            ns: a.ns.unwrap_or_else(|| vec![16, 64, 256]),
            betas: a.betas.unwrap_or_else(|| vec![1.0, 2.0, 4.0]),
            strategies: a
                .strategies
                .unwrap_or_else(|| vec![Strategy::Honest, Strategy::Concentrated, Strategy::Phased]),
            trials: a.trials.unwrap_or(2_000),
            seed: require(a.seed, "seed")?,
            support_fraction: a.support_fraction.unwrap_or(0.5),
            sigma: a.sigma.unwrap_or(std::f64::consts::FRAC_PI_2),
            delta: a.delta.unwrap_or(0.1),
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("qmak-out/sweep")),
        };
        check(
            !cfg.ns.is_empty() && !cfg.betas.is_empty() && !cfg.strategies.is_empty(),
            || "grid axes must be non-empty".into(),
        )?;
        check(cfg.ns.iter().all(|&n| n >= 2 && n % 2 == 0 && n <= 1 << 20), || {
            format!("dimensions must be even and in [2, 2^20], got {:?}", cfg.ns)
        })?;
        check(cfg.betas.iter().all(|&b| b > 0.0 && b.is_finite()), || {
            format!("betas must be positive, got {:?}", cfg.betas)
        })?;
        check(cfg.trials >= 1, || "trials must be positive".into())?;
        check(cfg.support_fraction > 0.0 && cfg.support_fraction <= 1.0, || {
            "support_fraction must be in (0, 1]".into()
        })?;
        check(cfg.delta > 0.0 && cfg.delta < 1.0, || "delta must be in (0, 1)".into())?;
        Ok(cfg)
    }
}
