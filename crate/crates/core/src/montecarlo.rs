//! Slot-level Rayleigh-fading simulator.
//!
//! Every slot draws `h_as`, `h_ar`, `h_ad` (in that order) from its own
//! ChaCha8 stream, keyed by `(seed, slot index)`. Slots are grouped into
//! fixed blocks of [`BLOCK_SLOTS`]; block moments are merged in a fixed
//! pairwise tree, so results depend only on `(params, split, seed, slots)`.
//!
//! With `include_noise = false` each SIR is computed as `k * h1 / h2` using
//! the same scale factor as the closed forms (times an AP-distance ratio
//! that is exactly 1 for equal distances). With noise, the full energy,
//! power and SINR chain is used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_denominator_gain, sample_unit_exponential, FadingDraw};
use crate::df::DfSplit;
use crate::dt::DtSplit;
use crate::error::{check_domain, Error, Result};
use crate::params::SystemParams;

/// Slots per aggregation block. Fixed so results never depend on chunking.
pub const BLOCK_SLOTS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub slots: u64,
    pub seed: u64,
    pub include_noise: bool,
    /// Minimum number of slots handed to one worker task.
    pub chunk_size: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            slots: 10_000,
            seed: 0,
            include_noise: false,
            chunk_size: 65_536,
        }
    }
}

impl SimConfig {
    pub fn with_slots(slots: u64, seed: u64) -> Self {
        Self {
            slots,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        check_domain("slots", self.slots as f64, self.slots >= 1, ">= 1")?;
        check_domain(
            "chunk_size",
            self.chunk_size as f64,
            self.chunk_size >= 1,
            ">= 1",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    Direct(DtSplit),
    Relay(DfSplit),
}

/// Physical quantities of one slot. Fields that do not apply to the
/// protocol are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRealization {
    pub h_as: FadingDraw,
    pub h_ar: FadingDraw,
    pub h_ad: FadingDraw,
    /// Harvested energy at the source and relay, joules.
    pub e_s: f64,
    pub e_r: f64,
    /// Transmit powers, watts: source (direct), source (relay mode), relay.
    pub p_s: f64,
    pub p_s_co: f64,
    pub p_r: f64,
    pub gamma_dt: f64,
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    /// Slot throughputs, bits/s/Hz.
    pub r_dt: f64,
    pub r_sr: f64,
    pub r_rd: f64,
}

/// Interference-limited SIR scales, including AP-distance ratios.
#[derive(Debug, Clone, Copy)]
struct Scales {
    dt: f64,
    sr: f64,
    rd: f64,
}

fn path_gain(p: &SystemParams, r: f64) -> f64 {
    r.powf(-p.mu)
}

fn finite_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!(
            "{name} = {v} is not a positive finite number"
        )))
    }
}

impl Scales {
    fn new(p: &SystemParams, protocol: Protocol) -> Result<Self> {
        let g_as = finite_positive("r_as^-mu", path_gain(p, p.r_as))?;
        let g_ar = finite_positive("r_ar^-mu", path_gain(p, p.r_ar))?;
        let g_ad = finite_positive("r_ad^-mu", path_gain(p, p.r_ad))?;
        Ok(match protocol {
            Protocol::Direct(s) => {
                let a = s.alpha();
                let dt = p.zeta * a / (1.0 - a) * (g_as / g_ad);
                Self {
                    dt: finite_positive("direct SIR scale", dt)?,
                    sr: 0.0,
                    rd: 0.0,
                }
            }
            Protocol::Relay(s) => {
                let (a, b) = (s.alpha(), s.beta());
                let sr = p.zeta * a * p.d.powf(-p.mu) / b * (g_as / g_ar);
                let rd = p.zeta * a * (1.0 - p.d).powf(-p.mu) / s.relay_phase() * (g_ar / g_ad);
                Self {
                    dt: 0.0,
                    sr: finite_positive("source-relay SIR scale", sr)?,
                    rd: finite_positive("relay-destination SIR scale", rd)?,
                }
            }
        })
    }
}

/// Computes the full physical chain of one slot from its three gains.
pub fn derive_slot(
    params: &SystemParams,
    protocol: Protocol,
    h_as: FadingDraw,
    h_ar: FadingDraw,
    h_ad: FadingDraw,
    include_noise: bool,
) -> Result<SlotRealization> {
    params.validate()?;
    let scales = Scales::new(params, protocol)?;
    Ok(derive_with(
        params,
        protocol,
        &scales,
        h_as,
        h_ar,
        h_ad,
        include_noise,
    ))
}

fn derive_with(
    p: &SystemParams,
    protocol: Protocol,
    scales: &Scales,
    h_as: FadingDraw,
    h_ar: FadingDraw,
    h_ad: FadingDraw,
    include_noise: bool,
) -> SlotRealization {
    let (has, har, had) = (h_as.h(), h_ar.h(), h_ad.h());
    let alpha = match protocol {
        Protocol::Direct(s) => s.alpha(),
        Protocol::Relay(s) => s.alpha(),
    };
    let harvest = alpha * p.zeta * p.p_a;
    let e_s = harvest * has * path_gain(p, p.r_as);
    let e_r = harvest * har * path_gain(p, p.r_ar);
    let interference = |h: f64, r: f64| p.p_a * h * path_gain(p, r) + p.sigma2;

    let mut slot = SlotRealization {
        h_as,
        h_ar,
        h_ad,
        e_s,
        e_r,
        p_s: 0.0,
        p_s_co: 0.0,
        p_r: 0.0,
        gamma_dt: 0.0,
        gamma_sr: 0.0,
        gamma_rd: 0.0,
        r_dt: 0.0,
        r_sr: 0.0,
        r_rd: 0.0,
    };
    match protocol {
        Protocol::Direct(_) => {
            let rest = 1.0 - alpha;
            slot.p_s = e_s / rest;
            slot.gamma_dt = if include_noise {
                slot.p_s / interference(had, p.r_ad)
            } else {
                scales.dt * (has / had)
            };
            slot.r_dt = rest * slot.gamma_dt.ln_1p() / std::f64::consts::LN_2;
        }
        Protocol::Relay(s) => {
            let (beta, relay) = (s.beta(), s.relay_phase());
            slot.p_s_co = e_s / beta;
            slot.p_r = e_r / relay;
            if include_noise {
                slot.gamma_sr = slot.p_s_co * p.d.powf(-p.mu) / interference(har, p.r_ar);
                slot.gamma_rd = slot.p_r * (1.0 - p.d).powf(-p.mu) / interference(had, p.r_ad);
            } else {
                slot.gamma_sr = scales.sr * (has / har);
                slot.gamma_rd = scales.rd * (har / had);
            }
            slot.r_sr = beta * slot.gamma_sr.ln_1p() / std::f64::consts::LN_2;
            slot.r_rd = relay * slot.gamma_rd.ln_1p() / std::f64::consts::LN_2;
        }
    }
    slot
}

fn slot_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot);
    rng
}

fn draw_gains(rng: &mut ChaCha8Rng) -> (FadingDraw, FadingDraw, FadingDraw) {
    let h_as = sample_unit_exponential(rng);
    let h_ar = FadingDraw::new(sample_denominator_gain(rng)).expect("finite gain");
    let h_ad = FadingDraw::new(sample_denominator_gain(rng)).expect("finite gain");
    (h_as, h_ar, h_ad)
}

/// The realization of slot `index` under `config.seed`, as used inside
/// [`simulate_dt`] and [`simulate_df`].
pub fn realize_slot(
    params: &SystemParams,
    protocol: Protocol,
    config: &SimConfig,
    index: u64,
) -> Result<SlotRealization> {
    params.validate()?;
    let scales = Scales::new(params, protocol)?;
    let (a, b, c) = draw_gains(&mut slot_rng(config.seed, index));
    Ok(derive_with(
        params,
        protocol,
        &scales,
        a,
        b,
        c,
        config.include_noise,
    ))
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let frac = other.n as f64 / n as f64;
        Self {
            n,
            mean: self.mean + delta * frac,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * frac,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.n - 1) as f64;
        (var / self.n as f64).sqrt()
    }
}

trait Merge: Default + Send {
    fn merge(self, other: Self) -> Self;
}

fn tree_merge<A: Merge>(mut parts: Vec<A>) -> A {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

fn run_blocks<A, F>(config: &SimConfig, per_slot: F) -> A
where
    A: Merge,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let blocks =
        usize::try_from(config.slots.div_ceil(BLOCK_SLOTS)).expect("block count fits usize");
    let min_len = (config.chunk_size / BLOCK_SLOTS).max(1) as usize;
    let parts: Vec<A> = (0..blocks)
        .into_par_iter()
        .with_min_len(min_len)
        .map(|b| {
            let mut acc = A::default();
            let start = b as u64 * BLOCK_SLOTS;
            let end = (start + BLOCK_SLOTS).min(config.slots);
            let mut base = ChaCha8Rng::seed_from_u64(config.seed);
            for slot in start..end {
                base.set_stream(slot);
                base.set_word_pos(0);
                per_slot(&mut base, &mut acc);
            }
            acc
        })
        .collect();
    tree_merge(parts)
}

#[derive(Debug, Clone, Copy, Default)]
struct LinkAcc {
    rate: Moments,
    outages: u64,
    /// Throughput over slots not in outage.
    served: Moments,
}

impl LinkAcc {
    fn push(&mut self, rate: f64, in_outage: bool) {
        self.rate.push(rate);
        if in_outage {
            self.outages += 1;
        } else {
            self.served.push(rate);
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            rate: self.rate.merge(o.rate),
            outages: self.outages + o.outages,
            served: self.served.merge(o.served),
        }
    }

    fn summary(&self) -> LinkSim {
        let n = self.rate.n as f64;
        let p = self.outages as f64 / n;
        LinkSim {
            mean: self.rate.mean,
            stderr: self.rate.stderr(),
            outage_rate: p,
            outage_stderr: (p * (1.0 - p) / n).sqrt(),
            outage_count: self.outages,
            conditional_mean: (self.served.n > 0).then_some(self.served.mean),
        }
    }
}

impl Merge for LinkAcc {
    fn merge(self, other: Self) -> Self {
        LinkAcc::merge(self, other)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RelayAcc {
    sr: LinkAcc,
    rd: LinkAcc,
    /// End-to-end: rate is the per-slot minimum, outage either hop.
    e2e: LinkAcc,
}

impl Merge for RelayAcc {
    fn merge(self, o: Self) -> Self {
        Self {
            sr: self.sr.merge(o.sr),
            rd: self.rd.merge(o.rd),
            e2e: self.e2e.merge(o.e2e),
        }
    }
}

/// Empirical statistics of one link. For the end-to-end relay figures the
/// per-slot rate is `min(R_SR, R_RD)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSim {
    pub mean: f64,
    pub stderr: f64,
    pub outage_rate: f64,
    pub outage_stderr: f64,
    pub outage_count: u64,
    /// Mean throughput over slots that were not in outage.
    pub conditional_mean: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaySim {
    pub sr: LinkSim,
    pub rd: LinkSim,
    /// Mean and standard error of `min(R_SR, R_RD)` taken slot by slot.
    pub mean_slot_min: f64,
    pub slot_min_stderr: f64,
}

/// Monte Carlo estimates. Outage slots still contribute their throughput to
/// `mean_throughput`.
///
/// For relaying, `mean_throughput`/`stderr` belong to whichever hop has the
/// lower mean (the end-to-end expected throughput is the smaller of the two
/// expectations), and the outage fields count slots where either hop failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub slots: u64,
    pub mean_throughput: f64,
    pub stderr: f64,
    pub outage_rate: f64,
    pub outage_stderr: f64,
    pub outage_count: u64,
    pub conditional_mean: Option<f64>,
    pub relay: Option<RelaySim>,
}

/// Simulates direct transmission for `config.slots` slots.
pub fn simulate_dt(params: &SystemParams, split: DtSplit, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    config.validate()?;
    let protocol = Protocol::Direct(split);
    let scales = Scales::new(params, protocol)?;
    let g0 = params.gamma_o;
    let acc: LinkAcc = run_blocks(config, |rng, acc: &mut LinkAcc| {
        let (a, b, c) = draw_gains(rng);
        let s = derive_with(params, protocol, &scales, a, b, c, config.include_noise);
        acc.push(s.r_dt, s.gamma_dt <= g0);
    });
    let link = acc.summary();
    check_finite(link.mean)?;
    Ok(SimResult {
        slots: config.slots,
        mean_throughput: link.mean,
        stderr: link.stderr,
        outage_rate: link.outage_rate,
        outage_stderr: link.outage_stderr,
        outage_count: link.outage_count,
        conditional_mean: link.conditional_mean,
        relay: None,
    })
}

/// Simulates decode-and-forward relaying for `config.slots` slots.
pub fn simulate_df(params: &SystemParams, split: DfSplit, config: &SimConfig) -> Result<SimResult> {
    params.validate()?;
    config.validate()?;
    let protocol = Protocol::Relay(split);
    let scales = Scales::new(params, protocol)?;
    let g0 = params.gamma_o;
    let acc: RelayAcc = run_blocks(config, |rng, acc: &mut RelayAcc| {
        let (a, b, c) = draw_gains(rng);
        let s = derive_with(params, protocol, &scales, a, b, c, config.include_noise);
        let out_sr = s.gamma_sr <= g0;
        let out_rd = s.gamma_rd <= g0;
        acc.sr.push(s.r_sr, out_sr);
        acc.rd.push(s.r_rd, out_rd);
        acc.e2e.push(s.r_sr.min(s.r_rd), out_sr || out_rd);
    });
    let sr = acc.sr.summary();
    let rd = acc.rd.summary();
    let e2e = acc.e2e.summary();
    check_finite(sr.mean)?;
    check_finite(rd.mean)?;
    let weaker = if sr.mean <= rd.mean { sr } else { rd };
    Ok(SimResult {
        slots: config.slots,
        mean_throughput: weaker.mean,
        stderr: weaker.stderr,
        outage_rate: e2e.outage_rate,
        outage_stderr: e2e.outage_stderr,
        outage_count: e2e.outage_count,
        conditional_mean: e2e.conditional_mean,
        relay: Some(RelaySim {
            sr,
            rd,
            mean_slot_min: e2e.mean,
            slot_min_stderr: e2e.stderr,
        }),
    })
}

/// Simulates only the source-relay hop. Unlike [`simulate_df`] this allows
/// `alpha + beta = 1`, i.e. no time left for the second hop.
pub fn simulate_first_hop(
    params: &SystemParams,
    alpha: f64,
    beta: f64,
    config: &SimConfig,
) -> Result<LinkSim> {
    params.validate()?;
    config.validate()?;
    check_domain("alpha", alpha, alpha > 0.0 && alpha < 1.0, "(0, 1)")?;
    check_domain(
        "beta",
        beta,
        beta > 0.0 && alpha + beta <= 1.0 + 4.0 * f64::EPSILON,
        "(0, 1 - alpha]",
    )?;
    let ratio = path_gain(params, params.r_as) / path_gain(params, params.r_ar);
    let scale = finite_positive(
        "source-relay SIR scale",
        params.zeta * alpha * params.d.powf(-params.mu) / beta * ratio,
    )?;
    let g0 = params.gamma_o;
    let p = *params;
    let noise = config.include_noise;
    let acc: LinkAcc = run_blocks(config, |rng, acc: &mut LinkAcc| {
        let (a, b, _) = draw_gains(rng);
        let gamma = if noise {
            let e_s = alpha * p.zeta * p.p_a * a.h() * path_gain(&p, p.r_as);
            e_s / beta * p.d.powf(-p.mu) / (p.p_a * b.h() * path_gain(&p, p.r_ar) + p.sigma2)
        } else {
            scale * (a.h() / b.h())
        };
        acc.push(beta * gamma.ln_1p() / std::f64::consts::LN_2, gamma <= g0);
    });
    let link = acc.summary();
    check_finite(link.mean)?;
    Ok(link)
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Overflow(format!("simulated mean throughput is {v}")))
    }
}
