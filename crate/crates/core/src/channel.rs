//! Rayleigh-fading primitives.
//!
//! Every SIR in the interference-limited model has the form `k * H1 / H2`
//! with `H1`, `H2` independent unit-mean exponential power gains. Its density
//! is `k / (k + x)^2`, its CDF `x / (k + x)`, and
//! `E[log2(1 + X)] = log2(1/k) / (1/k - 1)`.

use std::f64::consts::{LN_2, LOG2_E};

use rand::Rng;

use crate::error::{check_domain, Result};

/// Gains below this are redrawn when used as a ratio denominator.
pub const MIN_DENOMINATOR_GAIN: f64 = 1e-300;

/// Half-width of the window around `k = 1` where the series form is used.
const SERIES_WINDOW: f64 = 1e-6;

/// Distribution of `X = k * H1 / H2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledExpRatio {
    k: f64,
}

impl ScaledExpRatio {
    pub fn new(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x.is_infinite() {
            return Ok(0.0);
        }
        let s = self.k + x;
        Ok(self.k / (s * s))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        if x.is_infinite() {
            return Ok(1.0);
        }
        Ok(x / (self.k + x))
    }

    /// `E[log2(1 + X)]` in bits.
    pub fn expected_log2_one_plus(&self) -> f64 {
        log2_one_plus_mean(self.k)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h1 = sample_unit_exponential(rng).h();
        let h2 = sample_denominator_gain(rng);
        self.k * (h1 / h2)
    }
}

fn check_k(k: f64) -> Result<()> {
    check_domain("k", k, k > 0.0 && k.is_finite(), "> 0 and finite")
}

fn check_x(x: f64) -> Result<()> {
    check_domain("x", x, x >= 0.0, ">= 0")
}

/// Density of `k * H1 / H2` at `x`.
pub fn ratio_pdf(k: f64, x: f64) -> Result<f64> {
    ScaledExpRatio::new(k)?.pdf(x)
}

/// CDF of `k * H1 / H2` at `x`.
pub fn ratio_cdf(k: f64, x: f64) -> Result<f64> {
    ScaledExpRatio::new(k)?.cdf(x)
}

/// `E[log2(1 + k * H1 / H2)]`, continuous through the removable point `k = 1`.
pub fn expected_log2_one_plus(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(log2_one_plus_mean(k))
}

/// Unchecked kernel of [`expected_log2_one_plus`]; `k` must be positive.
pub(crate) fn log2_one_plus_mean(k: f64) -> f64 {
    let km1 = k - 1.0;
    if km1.abs() < SERIES_WINDOW {
        // log2(u)/(u-1) with u = 1/k, expanded around u = 1.
        let v = 1.0 / k - 1.0;
        LOG2_E * (1.0 - v / 2.0 + v * v / 3.0)
    } else if k > 0.5 && k < 2.0 {
        // k - 1 is exact here, so ln_1p keeps full precision near the pole.
        k * km1.ln_1p() / (km1 * LN_2)
    } else {
        k * k.ln() / (km1 * LN_2)
    }
}

/// A unit-mean exponential channel power gain.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FadingDraw(f64);

impl FadingDraw {
    pub fn new(h: f64) -> Result<Self> {
        check_domain("h", h, h >= 0.0 && h.is_finite(), ">= 0 and finite")?;
        Ok(Self(h))
    }

    pub fn h(self) -> f64 {
        self.0
    }
}

/// Inverse transform `-ln(1 - u)` for `u` in `[0, 1)`; `u = 0` maps to 0.
pub fn unit_exponential_from_uniform(u: f64) -> f64 {
    -(-u).ln_1p()
}

pub fn sample_unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> FadingDraw {
    let u: f64 = rng.random();
    FadingDraw(unit_exponential_from_uniform(u))
}

/// Draws a unit exponential, redrawing until it is usable as a denominator.
pub(crate) fn sample_denominator_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let h = sample_unit_exponential(rng).h();
        if h >= MIN_DENOMINATOR_GAIN {
            return h;
        }
    }
}

/// One draw of `k * h1 / h2` from two independent unit exponentials.
pub fn sample_ratio<R: Rng + ?Sized>(rng: &mut R, k: f64) -> Result<f64> {
    Ok(ScaledExpRatio::new(k)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pdf_examples() {
        assert_eq!(ratio_pdf(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(ratio_pdf(2.0, 2.0).unwrap(), 0.125);
        assert_eq!(ratio_pdf(0.5, 1.5).unwrap(), 0.125);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(ratio_cdf(3.0, 3.0).unwrap(), 0.5);
        assert_eq!(ratio_cdf(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(ratio_cdf(2.0, 6.0).unwrap(), 0.75);
        assert_eq!(ratio_cdf(2.0, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(ratio_pdf(0.0, 1.0).is_err());
        assert!(ratio_pdf(-1.0, 1.0).is_err());
        assert!(ratio_pdf(1.0, -0.1).is_err());
        assert!(ratio_cdf(f64::NAN, 1.0).is_err());
        assert!(ratio_cdf(1.0, f64::NAN).is_err());
        assert!(expected_log2_one_plus(0.0).is_err());
        assert!(expected_log2_one_plus(f64::INFINITY).is_err());
    }

    #[test]
    fn log_mean_at_removable_point() {
        assert_eq!(expected_log2_one_plus(1.0).unwrap(), LOG2_E);
        for dk in [1e-7, -1e-7, 1e-6, -1e-6, 1.0001e-6, 1e-5] {
            let v = expected_log2_one_plus(1.0 + dk).unwrap();
            assert!((v - LOG2_E).abs() < 1e-5, "{dk}: {v}");
        }
        assert!((expected_log2_one_plus(1.0 + 1e-7).unwrap() - LOG2_E).abs() < 1e-6);
        assert!((expected_log2_one_plus(1.0 - 1e-7).unwrap() - LOG2_E).abs() < 1e-6);
    }

    #[test]
    fn log_mean_closed_values() {
        // k = 4: 4 * 2 / 3; k = 1/4: 0.25 * 2 / 0.75.
        assert!((expected_log2_one_plus(4.0).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!((expected_log2_one_plus(0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((expected_log2_one_plus(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn series_and_direct_forms_meet() {
        let edge = 1.0 + SERIES_WINDOW;
        let below = log2_one_plus_mean(edge * (1.0 - 1e-12));
        let above = log2_one_plus_mean(edge * (1.0 + 1e-12));
        // Slope is about log2(e)/2, so the jump allowance covers 2e-12 of travel.
        assert!((above - below).abs() < 1e-12 + 2e-12 * LOG2_E);
    }

    #[test]
    fn exponential_boundary() {
        assert_eq!(unit_exponential_from_uniform(0.0), 0.0);
        let top = unit_exponential_from_uniform(1.0 - f64::EPSILON / 2.0);
        assert!(top.is_finite() && top > 36.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_unit_exponential(&mut ChaCha8Rng::seed_from_u64(42)).h();
        let b = sample_unit_exponential(&mut ChaCha8Rng::seed_from_u64(42)).h();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a >= 0.0);
    }

    #[test]
    fn ratio_scales_exactly_with_k() {
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let one = sample_ratio(&mut r1, 1.0).unwrap();
            let two = sample_ratio(&mut r2, 2.0).unwrap();
            assert_eq!(two, 2.0 * one);
        }
    }

    #[test]
    fn sample_ratio_rejects_bad_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_ratio(&mut rng, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn cdf_derivative_is_pdf(lk in -3.0f64..3.0, lx in -3.0f64..3.0) {
            let k = 10f64.powf(lk);
            let x = 10f64.powf(lx);
            let h = 1e-4 * x;
            let d = (ratio_cdf(k, x + h).unwrap() - ratio_cdf(k, x - h).unwrap()) / (2.0 * h);
            prop_assert!((d - ratio_pdf(k, x).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn cdf_is_half_at_k(k in 1e-6f64..1e6) {
            prop_assert_eq!(ratio_cdf(k, k).unwrap(), 0.5);
        }

        #[test]
        fn cdf_nondecreasing(k in 1e-3f64..1e3, a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(ratio_cdf(k, lo).unwrap() <= ratio_cdf(k, hi).unwrap());
        }

        #[test]
        fn log_mean_increasing(lk in -4.0f64..4.0, step in 1e-3f64..1.0) {
            let k = 10f64.powf(lk);
            let a = expected_log2_one_plus(k).unwrap();
            let b = expected_log2_one_plus(k * (1.0 + step)).unwrap();
            prop_assert!(b > a);
            prop_assert!(a > 0.0);
        }
    }
}
