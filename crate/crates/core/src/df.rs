//! Decode-and-forward relaying.
//!
//! Source and relay harvest for `alpha`, the source transmits to the relay
//! for `beta`, and the relay forwards to the destination for
//! `1 - alpha - beta`. With the source-destination distance normalized to 1
//! the hops have lengths `d` and `1 - d`, and their SIRs are
//!
//! ```text
//! gamma_sr = zeta * alpha * d^-mu       / beta             * h_as / h_ar
//! gamma_rd = zeta * alpha * (1 - d)^-mu / (1 - alpha - beta) * h_ar / h_ad
//! ```
//!
//! The end-to-end throughput is the smaller of the two expected link
//! throughputs, subject to an outage limit and to data causality
//! (`E[R_SR] <= E[R_RD]`).
//!
//! The optimizer works in the `(kappa, z)` coordinates, `kappa = alpha / beta`
//! and `z = alpha + beta`. For a fixed `kappa` the expected first-hop
//! throughput is linear in `z`, the outage limit is a lower bound on `z`
//! ([`z_lower`]) and causality an upper bound ([`z_upper`]), so each `kappa`
//! has a best `z` in closed form and only a one-dimensional search remains.

use serde::{Deserialize, Serialize};

use crate::channel::{log2_one_plus_mean, ScaledExpRatio};
use crate::error::{check_domain, Error, Result};
use crate::numeric::{bisect, bisect_boundary, golden_section_max};
use crate::params::SystemParams;

pub const KAPPA_MIN: f64 = 1e-6;
pub const KAPPA_MAX: f64 = 1e6;
/// Golden-section tolerance on `ln(kappa)`.
const KAPPA_TOL: f64 = 1e-10;
const KAPPA_SCAN_POINTS: usize = 2001;
const TAU_MIN: f64 = 1e-12;
const TAU_MAX: f64 = 1e12;
const TAU_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfSplit {
    alpha: f64,
    beta: f64,
}

impl DfSplit {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_domain("alpha", alpha, alpha > 0.0 && alpha < 1.0, "(0, 1)")?;
        check_domain("beta", beta, beta > 0.0 && beta < 1.0, "(0, 1)")?;
        check_domain(
            "alpha + beta",
            alpha + beta,
            1.0 - alpha - beta > 0.0,
            "< 1",
        )?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Duration of the relay-to-destination phase.
    pub fn relay_phase(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    pub fn to_kappa_z(&self) -> KappaZ {
        KappaZ {
            kappa: self.alpha / self.beta,
            z: self.alpha + self.beta,
        }
    }
}

/// Harvest ratio `kappa = alpha / beta` and harvest-and-first-hop time
/// `z = alpha + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaZ {
    kappa: f64,
    z: f64,
}

impl KappaZ {
    pub fn new(kappa: f64, z: f64) -> Result<Self> {
        check_kappa(kappa)?;
        check_domain("z", z, z > 0.0 && z < 1.0, "(0, 1)")?;
        Ok(Self { kappa, z })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_split(&self) -> Result<DfSplit> {
        let beta = self.z / (1.0 + self.kappa);
        DfSplit::new(self.kappa * beta, beta)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    check_domain("kappa", kappa, kappa > 0.0 && kappa.is_finite(), "> 0")
}

/// Bounds on `z` for one `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfFeasibility {
    /// Smallest `z` meeting the outage limit; 1 when no `z < 1` does.
    pub z_lower: f64,
    /// Largest `z` meeting data causality.
    pub z_upper: f64,
    pub psi: f64,
    pub tau_star: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfOptimum {
    pub kappa_star: f64,
    pub z_star: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub throughput: f64,
    pub outage: f64,
    pub feasible: bool,
    /// Bounds on `z` at `kappa_star`.
    pub z_lower: f64,
    pub z_upper: f64,
    /// Maximizer of the first-hop throughput with `z` held fixed, ignoring
    /// both constraints.
    pub kappa_unconstrained: f64,
}

fn sr_gain(p: &SystemParams) -> f64 {
    p.zeta * p.d.powf(-p.mu)
}

fn rd_gain(p: &SystemParams) -> f64 {
    p.zeta * (1.0 - p.d).powf(-p.mu)
}

/// SIR scale of the source-relay hop, `zeta alpha d^-mu / beta`.
pub fn k_sr(params: &SystemParams, split: DfSplit) -> Result<f64> {
    params.check_analytic()?;
    Ok(params.zeta * split.alpha * params.d.powf(-params.mu) / split.beta)
}

/// SIR scale of the relay-destination hop, `zeta alpha (1-d)^-mu / (1 - alpha - beta)`.
pub fn k_rd(params: &SystemParams, split: DfSplit) -> Result<f64> {
    params.check_analytic()?;
    Ok(params.zeta * split.alpha * (1.0 - params.d).powf(-params.mu) / split.relay_phase())
}

pub fn outage_sr(params: &SystemParams, split: DfSplit) -> Result<f64> {
    ScaledExpRatio::new(k_sr(params, split)?)?.cdf(params.gamma_o)
}

pub fn outage_rd(params: &SystemParams, split: DfSplit) -> Result<f64> {
    ScaledExpRatio::new(k_rd(params, split)?)?.cdf(params.gamma_o)
}

/// End-to-end outage: either hop failing fails the slot.
pub fn outage(params: &SystemParams, split: DfSplit) -> Result<f64> {
    let sr = outage_sr(params, split)?;
    let rd = outage_rd(params, split)?;
    Ok(1.0 - (1.0 - sr) * (1.0 - rd))
}

pub fn expected_throughput_sr(params: &SystemParams, split: DfSplit) -> Result<f64> {
    Ok(split.beta * log2_one_plus_mean(k_sr(params, split)?))
}

pub fn expected_throughput_rd(params: &SystemParams, split: DfSplit) -> Result<f64> {
    Ok(split.relay_phase() * log2_one_plus_mean(k_rd(params, split)?))
}

/// End-to-end expected throughput, limited by the weaker hop.
pub fn expected_throughput(params: &SystemParams, split: DfSplit) -> Result<f64> {
    Ok(expected_throughput_sr(params, split)?.min(expected_throughput_rd(params, split)?))
}

/// First-hop throughput per unit of `z` as a function of `kappa`.
fn first_hop_rate(params: &SystemParams, kappa: f64) -> f64 {
    log2_one_plus_mean(sr_gain(params) * kappa) / (1.0 + kappa)
}

/// Expected source-relay throughput in `(kappa, z)` coordinates.
pub fn esr_kappa_z(params: &SystemParams, kz: KappaZ) -> Result<f64> {
    params.check_analytic()?;
    Ok(kz.z * first_hop_rate(params, kz.kappa))
}

/// Harvest ratio maximizing the first-hop throughput at any fixed `z`,
/// found by golden-section search on `ln(kappa)` over
/// `[KAPPA_MIN, KAPPA_MAX]`.
pub fn optimize_kappa(params: &SystemParams) -> Result<f64> {
    params.check_analytic()?;
    let (lk, _) = golden_section_max(
        |lk| first_hop_rate(params, lk.exp()),
        KAPPA_MIN.ln(),
        KAPPA_MAX.ln(),
        KAPPA_TOL,
    );
    Ok(lk.exp())
}

/// Smallest `z` for which the end-to-end outage at this `kappa` is at most
/// `theta`, or `None` if the first hop alone already violates the limit.
///
/// With `a = k_sr` (fixed by `kappa`) and `k_rd = c z / (1 - z)`, the limit
/// `(1 - theta)(a + g)(k_rd + g) <= a k_rd` solves to
/// `z / (1 - z) >= (1 - theta)(a + g) g / (c (theta a - (1 - theta) g))`.
pub fn z_lower(params: &SystemParams, kappa: f64) -> Result<Option<f64>> {
    params.check_analytic()?;
    check_kappa(kappa)?;
    if params.unconstrained() {
        return Ok(Some(0.0));
    }
    Ok(z_lower_unchecked(params, kappa))
}

fn z_lower_unchecked(params: &SystemParams, kappa: f64) -> Option<f64> {
    let t = params.theta;
    let g = params.gamma_o;
    let a = sr_gain(params) * kappa;
    let c = rd_gain(params) * kappa / (1.0 + kappa);
    let margin = t * a - (1.0 - t) * g;
    if margin <= 0.0 {
        return None;
    }
    let w = (1.0 - t) * (a + g) * g / (c * margin);
    if !w.is_finite() {
        return None;
    }
    Some(w / (1.0 + w))
}

/// Right-hand side of the causality condition `f(tau) >= psi`,
/// `(1 - d)^mu log2(d^mu / (zeta kappa)) / (d^mu - zeta kappa)`, continuous
/// through `zeta kappa = d^mu`.
pub fn psi(params: &SystemParams, kappa: f64) -> Result<f64> {
    params.check_analytic()?;
    check_kappa(kappa)?;
    Ok(psi_unchecked(params, kappa))
}

fn psi_unchecked(params: &SystemParams, kappa: f64) -> f64 {
    first_hop_total(params, kappa) / (rd_gain(params) * kappa)
}

fn first_hop_total(params: &SystemParams, kappa: f64) -> f64 {
    log2_one_plus_mean(sr_gain(params) * kappa)
}

/// `f(tau) = tau log2(tau) / (tau - 1)`, with `f(1) = log2(e)`.
pub fn f_tau(tau: f64) -> Result<f64> {
    check_domain("tau", tau, tau > 0.0 && tau.is_finite(), "> 0")?;
    Ok(log2_one_plus_mean(tau))
}

/// Inverse of [`f_tau`], by bisection on `ln(tau)`. The bracket starts at
/// `[1e-12, 1e12]` and is widened geometrically, up to `[1e-300, 1e300]`,
/// when `psi_value` lies outside it.
pub fn tau_star(psi_value: f64) -> Result<f64> {
    check_domain(
        "psi",
        psi_value,
        psi_value > 0.0 && psi_value.is_finite(),
        "> 0",
    )?;
    let g = |lt: f64| log2_one_plus_mean(lt.exp()) - psi_value;
    let limit = TAU_LIMIT.ln();
    let (mut lo, mut hi) = (TAU_MIN.ln(), TAU_MAX.ln());
    while g(lo) > 0.0 && lo > -limit {
        lo = (2.0 * lo).max(-limit);
    }
    while g(hi) < 0.0 && hi < limit {
        hi = (2.0 * hi).min(limit);
    }
    let lt = bisect(g, lo, hi, 0.0)?;
    let tau = lt.exp();
    let resid = (log2_one_plus_mean(tau) - psi_value).abs();
    if resid > 1e-9 * psi_value.max(1.0) {
        return Err(Error::NoConvergence {
            method: "tau_star",
            detail: format!("|f(tau) - psi| = {resid:e} at psi = {psi_value}"),
        });
    }
    Ok(tau)
}

/// Largest `z` satisfying causality at this `kappa`:
/// `[1 + zeta kappa tau* / ((1 + kappa)(1 - d)^mu)]^-1`.
pub fn z_upper(params: &SystemParams, kappa: f64, tau_star_value: f64) -> Result<f64> {
    params.check_analytic()?;
    check_kappa(kappa)?;
    check_domain(
        "tau_star",
        tau_star_value,
        tau_star_value > 0.0 && tau_star_value.is_finite(),
        "> 0",
    )?;
    Ok(z_upper_unchecked(params, kappa, tau_star_value))
}

fn z_upper_unchecked(params: &SystemParams, kappa: f64, tau: f64) -> f64 {
    let scale = params.zeta * kappa * tau / ((1.0 + kappa) * (1.0 - params.d).powf(params.mu));
    1.0 / (1.0 + scale)
}

/// Both `z` bounds at one `kappa`.
pub fn feasibility(params: &SystemParams, kappa: f64) -> Result<DfFeasibility> {
    params.check_analytic()?;
    check_kappa(kappa)?;
    feasibility_unchecked(params, kappa)
}

fn feasibility_unchecked(params: &SystemParams, kappa: f64) -> Result<DfFeasibility> {
    let lower = if params.unconstrained() {
        Some(0.0)
    } else {
        z_lower_unchecked(params, kappa)
    };
    let psi = psi_unchecked(params, kappa);
    let tau_star = tau_star(psi)?;
    let z_upper = z_upper_unchecked(params, kappa, tau_star);
    let z_lower = lower.unwrap_or(1.0);
    let feasible = lower.is_some() && z_lower <= z_upper && z_upper > 0.0 && z_upper < 1.0;
    Ok(DfFeasibility {
        z_lower,
        z_upper,
        psi,
        tau_star,
        feasible,
    })
}

/// Best split for a fixed `kappa`: `z` at its causality bound when the
/// bounds overlap. When they do not, the returned point sits at the
/// causality bound with `feasible = false`.
pub fn optimize_at_kappa(params: &SystemParams, kappa: f64) -> Result<DfOptimum> {
    params.check_analytic()?;
    check_kappa(kappa)?;
    let kappa_unconstrained = optimize_kappa(params)?;
    assemble(params, kappa, kappa_unconstrained)
}

fn assemble(params: &SystemParams, kappa: f64, kappa_unconstrained: f64) -> Result<DfOptimum> {
    let bounds = feasibility_unchecked(params, kappa)?;
    let z_star = if bounds.feasible && bounds.z_lower == bounds.z_upper {
        bounds.z_lower
    } else {
        bounds.z_upper
    };
    let split = KappaZ::new(kappa, z_star)?.to_split()?;
    Ok(DfOptimum {
        kappa_star: kappa,
        z_star,
        alpha_star: split.alpha,
        beta_star: split.beta,
        throughput: expected_throughput(params, split)?,
        outage: outage(params, split)?,
        feasible: bounds.feasible,
        z_lower: bounds.z_lower,
        z_upper: bounds.z_upper,
        kappa_unconstrained,
    })
}

/// Fixes `kappa` at its unconstrained maximizer first and only then fits `z`
/// between the two bounds. Cheaper than [`optimize`] but generally
/// suboptimal, and it reports infeasibility whenever the bounds fail to
/// overlap at that one `kappa`.
pub fn optimize_three_step(params: &SystemParams) -> Result<DfOptimum> {
    let kappa = optimize_kappa(params)?;
    assemble(params, kappa, kappa)
}

/// Maximizes end-to-end expected throughput under the outage limit and data
/// causality.
///
/// For each `kappa` the best objective is `z_upper(kappa) * rate(kappa)`,
/// available whenever `z_lower(kappa) <= z_upper(kappa)`. That frontier is
/// scanned on a log grid over `[KAPPA_MIN, KAPPA_MAX]` and refined by
/// golden-section search around the best grid point, with bisection onto
/// the edge of the feasible range when a neighbour is infeasible.
pub fn optimize(params: &SystemParams) -> Result<DfOptimum> {
    params.check_analytic()?;
    let kappa_unconstrained = optimize_kappa(params)?;

    let frontier = |lk: f64| -> Option<f64> {
        let kappa = lk.exp();
        match feasibility_unchecked(params, kappa) {
            Ok(b) if b.feasible => Some(b.z_upper * first_hop_rate(params, kappa)),
            _ => None,
        }
    };

    let (lo, hi) = (KAPPA_MIN.ln(), KAPPA_MAX.ln());
    let step = (hi - lo) / (KAPPA_SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..KAPPA_SCAN_POINTS)
        .map(|i| lo + step * i as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&lk| frontier(lk)).collect();

    let best = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let Some((i, _)) = best else {
        return assemble(params, kappa_unconstrained, kappa_unconstrained);
    };

    let feasible_at = |lk: f64| frontier(lk).is_some();
    let edge = |j: usize| -> f64 {
        if values[j].is_some() {
            grid[j]
        } else {
            bisect_boundary(feasible_at, grid[i], grid[j], KAPPA_TOL)
        }
    };
    let left = if i > 0 { edge(i - 1) } else { grid[i] };
    let right = if i + 1 < grid.len() {
        edge(i + 1)
    } else {
        grid[i]
    };

    let (lk_golden, v_golden) = golden_section_max(
        |lk| frontier(lk).unwrap_or(f64::NEG_INFINITY),
        left,
        right,
        KAPPA_TOL,
    );
    let mut best_lk = grid[i];
    let mut best_v = values[i].unwrap_or(f64::NEG_INFINITY);
    if v_golden > best_v {
        best_lk = lk_golden;
        best_v = v_golden;
    }
    for lk in [left, right] {
        if let Some(v) = frontier(lk) {
            if v > best_v {
                best_lk = lk;
                best_v = v;
            }
        }
    }
    assemble(params, best_lk.exp(), kappa_unconstrained)
}
