//! Brute-force references for the closed forms.
//!
//! Nothing here calls into [`crate::channel`], [`crate::dt`] or [`crate::df`]:
//! link quantities are evaluated from their own `(alpha, beta)` expressions,
//! expectations by quadrature, optima by exhaustive grids and bounds by
//! bisection. Tests compare the two sides.

use std::f64::consts::LN_2;

use crate::error::{check_domain, Error, Result};
use crate::numeric::{bisect, bisect_boundary};
use crate::params::SystemParams;

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
pub const QUAD_MAX_DEPTH: u32 = 60;
pub const DEFAULT_DT_GRID: usize = 2000;
pub const DEFAULT_DF_GRID: usize = 500;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_domain("tol", tol, tol > 0.0, "> 0")?;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut exhausted = false;
    let v = simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut exhausted);
    if exhausted || !v.is_finite() {
        return Err(Error::NoConvergence {
            method: "adaptive Simpson",
            detail: format!("depth {max_depth} exhausted on [{a}, {b}], estimate {v}"),
        });
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    exhausted: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *exhausted = true;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, exhausted)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, exhausted)
}

/// `E[log2(1 + X)]` for `X` with density `k / (k + x)^2`, by quadrature.
///
/// The half-line is compactified with `x = u / (1 - u)`. That alone leaves a
/// logarithmic blow-up at `u = 1`, so `u` is further graded toward the end as
/// `1 - u = w^2`, `w = 1 - s`. In `s` the integrand becomes
/// `-4 k w log2(w) / (1 + (k - 1) w^2)^2`, which vanishes at both ends.
pub fn quad_expected_log(k: f64, tol: f64) -> Result<f64> {
    check_domain("k", k, k > 0.0 && k.is_finite(), "> 0")?;
    let integrand = |s: f64| {
        let w = 1.0 - s;
        if w <= 0.0 || w >= 1.0 {
            return 0.0;
        }
        let den = 1.0 + (k - 1.0) * w * w;
        -4.0 * k * w * w.log2() / (den * den)
    };
    adaptive_simpson(integrand, 0.0, 1.0, tol, QUAD_MAX_DEPTH)
}

/// `log2(q) / (q - 1)`, continuous at `q = 1`.
fn log_ratio_term(q: f64) -> f64 {
    let qm1 = q - 1.0;
    if qm1.abs() < 1e-9 {
        (1.0 - qm1 / 2.0) / LN_2
    } else if q > 0.5 && q < 2.0 {
        qm1.ln_1p() / (qm1 * LN_2)
    } else {
        q.log2() / qm1
    }
}

/// Outage of the direct link, `(1 - a) g / (zeta a + (1 - a) g)`.
pub fn dt_outage_direct(p: &SystemParams, alpha: f64) -> f64 {
    let rest = 1.0 - alpha;
    rest * p.gamma_o / (p.zeta * alpha + rest * p.gamma_o)
}

/// Expected direct-link throughput, `(1 - a) log2(q) / (q - 1)` with
/// `q = (1 - a) / (zeta a)`.
pub fn dt_throughput_direct(p: &SystemParams, alpha: f64) -> f64 {
    let rest = 1.0 - alpha;
    rest * log_ratio_term(rest / (p.zeta * alpha))
}

/// End-to-end relay outage written as one fraction.
pub fn df_outage_direct(p: &SystemParams, alpha: f64, beta: f64) -> f64 {
    let za = p.zeta * alpha;
    let relay = 1.0 - alpha - beta;
    let num = za * za * (p.d * (1.0 - p.d)).powf(-p.mu);
    let den = (za * p.d.powf(-p.mu) + beta * p.gamma_o)
        * (za * (1.0 - p.d).powf(-p.mu) + relay * p.gamma_o);
    1.0 - num / den
}

/// Expected source-relay throughput, `beta log2(q) / (q - 1)` with
/// `q = beta d^mu / (zeta alpha)`.
pub fn df_esr_direct(p: &SystemParams, alpha: f64, beta: f64) -> f64 {
    beta * log_ratio_term(beta * p.d.powf(p.mu) / (p.zeta * alpha))
}

/// Expected relay-destination throughput, with `(1 - d)^mu` in place of
/// `d^mu` and the relay phase in place of `beta`.
pub fn df_erd_direct(p: &SystemParams, alpha: f64, beta: f64) -> f64 {
    let relay = 1.0 - alpha - beta;
    relay * log_ratio_term(relay * (1.0 - p.d).powf(p.mu) / (p.zeta * alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDt {
    pub alpha: f64,
    pub value: f64,
    /// Lower end of the scanned interval.
    pub alpha_lower: f64,
    pub step: f64,
}

/// Best feasible harvest ratio on an `n`-point grid of `[alpha_min, 1)`.
///
/// `alpha_min` is found here by bisection on the direct outage expression,
/// so the grid does not depend on the closed-form bound.
pub fn grid_optimize_dt(p: &SystemParams, n: usize) -> Result<GridDt> {
    check_domain("n", n as f64, n >= 100, ">= 100")?;
    let limit = p.theta * (1.0 + 1e-12);
    let feasible = |a: f64| dt_outage_direct(p, a) <= limit;
    let lower = if p.theta >= 1.0 {
        0.0
    } else {
        bisect_boundary(feasible, 1.0 - 1e-15, 0.0, 0.0)
    };
    let step = (1.0 - lower) / n as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        let a = lower + step * i as f64;
        if a <= 0.0 || a >= 1.0 || !feasible(a) {
            continue;
        }
        let v = dt_throughput_direct(p, a);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((a, v));
        }
    }
    let (alpha, value) = best.ok_or_else(|| Error::NoConvergence {
        method: "grid_optimize_dt",
        detail: "no feasible grid point".into(),
    })?;
    Ok(GridDt {
        alpha,
        value,
        alpha_lower: lower,
        step,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDf {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
    pub feasible: bool,
    pub step: f64,
}

/// Exhaustive scan of the open simplex `alpha, beta > 0, alpha + beta < 1`
/// at spacing `1/n`, keeping points that meet the outage limit and data
/// causality and maximizing the weaker hop's expected throughput.
/// When no point qualifies the coordinates are NaN and `feasible` is false.
pub fn grid_optimize_df(p: &SystemParams, n: usize) -> Result<GridDf> {
    check_domain("n", n as f64, n >= 100, ">= 100")?;
    let step = 1.0 / n as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 1..n {
        let a = i as f64 * step;
        for j in 1..(n - i) {
            let b = j as f64 * step;
            if df_outage_direct(p, a, b) > p.theta {
                continue;
            }
            let sr = df_esr_direct(p, a, b);
            let rd = df_erd_direct(p, a, b);
            if sr > rd {
                continue;
            }
            let v = sr.min(rd);
            if best.is_none_or(|(_, _, bv)| v > bv) {
                best = Some((a, b, v));
            }
        }
    }
    Ok(match best {
        Some((alpha, beta, value)) => GridDf {
            alpha,
            beta,
            value,
            feasible: true,
            step,
        },
        None => GridDf {
            alpha: f64::NAN,
            beta: f64::NAN,
            value: f64::NAN,
            feasible: false,
            step,
        },
    })
}

fn split_of(kappa: f64, z: f64) -> (f64, f64) {
    let beta = z / (1.0 + kappa);
    (kappa * beta, beta)
}

/// Root in `z` of `outage(z) = theta` at fixed `kappa`, by bisection on the
/// direct outage expression. `None` if even `z -> 1` misses the limit.
pub fn bisect_outage_z(p: &SystemParams, kappa: f64) -> Result<Option<f64>> {
    let top = 1.0 - 1e-15;
    let out = |z: f64| {
        let (a, b) = split_of(kappa, z);
        df_outage_direct(p, a, b) - p.theta
    };
    if out(top) > 0.0 {
        return Ok(None);
    }
    let z = bisect(out, 1e-300, top, 1e-15)?;
    Ok(Some(z))
}

/// Root in `z` of `E[R_SR](z) = E[R_RD](z)` at fixed `kappa`, by bisection
/// on the direct throughput expressions.
pub fn bisect_causality_z(p: &SystemParams, kappa: f64) -> Result<f64> {
    let gap = |z: f64| {
        let (a, b) = split_of(kappa, z);
        df_esr_direct(p, a, b) - df_erd_direct(p, a, b)
    };
    bisect(gap, 1e-12, 1.0 - 1e-12, 1e-15)
}

/// Largest central second difference `f(x+h) - 2 f(x) + f(x-h)` over `n`
/// evenly spaced points of `[lo, hi]`. Values at or below about 1e-9
/// certify concavity at this step size.
pub fn scan_concavity<F>(f: F, lo: f64, hi: f64, n: usize, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(lo < hi && n >= 10 && h > 0.0);
    let dx = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = lo + dx * i as f64;
            f(x + h) - 2.0 * f(x) + f(x - h)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest first difference `f(x[i+1]) - f(x[i])` over a grid of `n`
/// points, spaced evenly in `ln x` when `log_grid` is set.
pub fn scan_monotone<F>(f: F, lo: f64, hi: f64, n: usize, log_grid: bool) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(lo < hi && n >= 2);
    let point = |i: usize| {
        let t = i as f64 / (n - 1) as f64;
        if log_grid {
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        } else {
            lo + t * (hi - lo)
        }
    };
    (1..n)
        .map(|i| f(point(i)) - f(point(i - 1)))
        .fold(f64::INFINITY, f64::min)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic<F>(samples: &mut [f64], cdf: F) -> f64
where
    F: Fn(f64) -> f64,
{
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic for `n` samples.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
