//! Command-line flags and the matching TOML config file.
//!
//! Every flag group doubles as a config section; a flag given on the command
//! line wins over the same key in the file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use wpc_core::{db_to_linear, SystemParams};

#[derive(Debug, Parser)]
#[command(
    name = "wpc",
    version,
    about = "Wireless-powered link analysis: sweeps, optimizers, simulation"
)]
pub struct Cli {
    /// TOML file with [params], [split], [sim], [sweep] and [output] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for simulation and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direct-link throughput and outage over a range of harvest ratios.
    DtSweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Optimal harvest ratio for the direct link.
    DtOptimize {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Relay-link throughput and outage along one axis of the time split.
    DfSweep {
        /// Swept quantity; the others come from --alpha, --kappa or --z.
        #[arg(long, value_enum, default_value_t = DfAxis::Beta)]
        axis: DfAxis,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Optimal time split for the relay link. Exits 1 when infeasible.
    DfOptimize {
        #[arg(long, value_enum, default_value_t = DfMethod::Joint)]
        method: DfMethod,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Monte Carlo run at one split, with closed forms alongside when they apply.
    Simulate {
        #[arg(long, value_enum, default_value_t = Protocol::Dt)]
        protocol: Protocol,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutArgs,
    },
    /// Writes the dataset behind one figure (or all) as CSV into --out.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DfAxis {
    /// First-hop time at fixed --alpha.
    Beta,
    /// Harvest-plus-first-hop time at fixed --kappa.
    Z,
    /// Harvest-to-first-hop ratio at fixed --z.
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DfMethod {
    /// Search over the whole feasible frontier.
    Joint,
    /// Fix kappa at its unconstrained optimum, then fit z.
    ThreeStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Dt,
    Df,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

macro_rules! merge_options {
    ($a:expr, $b:expr; $($f:ident),+) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.clone(); } )+
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamArgs {
    /// SIR threshold in dB.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "gamma_o")]
    pub gamma_o_db: Option<f64>,
    /// SIR threshold, linear.
    #[arg(long)]
    pub gamma_o: Option<f64>,
    /// Outage limit in (0, 1]; 1 removes the constraint.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Path-loss exponent, at least 2.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Source-relay distance as a fraction of source-destination distance.
    #[arg(long)]
    pub d: Option<f64>,
    /// Energy conversion efficiency in (0, 1].
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Access-point transmit power, watts.
    #[arg(long)]
    pub p_a: Option<f64>,
    /// Receiver noise power, watts (simulation with --noise only).
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub r_as: Option<f64>,
    #[arg(long)]
    pub r_ar: Option<f64>,
    #[arg(long)]
    pub r_ad: Option<f64>,
}

impl ParamArgs {
    pub fn merge(&mut self, file: &Self) {
        if self.gamma_o.is_none() && self.gamma_o_db.is_none() {
            self.gamma_o = file.gamma_o;
            self.gamma_o_db = file.gamma_o_db;
        }
        merge_options!(self, file; theta, mu, d, zeta, p_a, sigma2, r_as, r_ar, r_ad);
    }

    /// Overlays the given values on `base` and validates the result.
    pub fn apply(&self, base: SystemParams) -> Result<SystemParams> {
        let mut p = base;
        match (self.gamma_o, self.gamma_o_db) {
            (Some(_), Some(_)) => bail!("give only one of gamma_o and gamma_o_db"),
            (Some(g), None) => p.gamma_o = g,
            (None, Some(db)) => p.gamma_o = db_to_linear(db),
            (None, None) => {}
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.theta, self.theta);
        set(&mut p.mu, self.mu);
        set(&mut p.d, self.d);
        set(&mut p.zeta, self.zeta);
        set(&mut p.p_a, self.p_a);
        set(&mut p.sigma2, self.sigma2);
        set(&mut p.r_as, self.r_as);
        set(&mut p.r_ar, self.r_ar);
        set(&mut p.r_ad, self.r_ad);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
}

impl SplitArgs {
    pub fn merge(&mut self, file: &Self) {
        merge_options!(self, file; alpha, beta, kappa, z);
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimArgs {
    /// Simulated slots (default 10000).
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the full SINR chain with noise and distances.
    #[arg(long)]
    pub noise: bool,
    /// Minimum slots per worker task; does not affect results.
    #[arg(long)]
    pub chunk_size: Option<u64>,
}

impl SimArgs {
    pub fn merge(&mut self, file: &Self) {
        merge_options!(self, file; slots, seed, chunk_size);
        self.noise |= file.noise;
    }

    pub fn config(&self) -> Result<wpc_core::montecarlo::SimConfig> {
        let d = wpc_core::montecarlo::SimConfig::default();
        let c = wpc_core::montecarlo::SimConfig {
            slots: self.slots.unwrap_or(d.slots),
            seed: self.seed.unwrap_or(d.seed),
            include_noise: self.noise,
            chunk_size: self.chunk_size.unwrap_or(d.chunk_size),
        };
        if c.slots == 0 || c.chunk_size == 0 {
            bail!("slots and chunk_size must be at least 1");
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

impl SweepArgs {
    pub fn merge(&mut self, file: &Self) {
        merge_options!(self, file; from, to, step);
    }

    /// Points `from, from + step, ...` not past `to`, with the given defaults.
    pub fn points(&self, from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
        sweep_points(
            self.from.unwrap_or(from),
            self.to.unwrap_or(to),
            self.step.unwrap_or(step),
        )
    }
}

pub fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        bail!("sweep bounds must be finite");
    }
    if step <= 0.0 {
        bail!("sweep step must be positive, got {step}");
    }
    if to < from {
        bail!("empty sweep range: from {from} is above to {to}");
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| crate::output::round_sig(from + step * i as f64))
        .collect())
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutArgs {
    pub fn merge(&mut self, file: &Self) {
        merge_options!(self, file; out, format);
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub params: ParamArgs,
    pub split: SplitArgs,
    pub sim: SimArgs,
    pub sweep: SweepArgs,
    pub output: OutArgs,
}

impl ConfigFile {
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
