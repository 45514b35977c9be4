//! Direct transmission: harvest for `alpha`, transmit to the destination for
//! `1 - alpha`.
//!
//! The received SIR is `k * h_as / h_ad` with `k = zeta * alpha / (1 - alpha)`,
//! so outage and expected throughput follow from [`crate::channel`].

use serde::{Deserialize, Serialize};

use crate::channel::{log2_one_plus_mean, ScaledExpRatio};
use crate::error::{check_domain, Result};
use crate::numeric::golden_section_max;
use crate::params::SystemParams;

/// Upper end of the harvest-ratio search interval.
pub const ALPHA_UPPER: f64 = 1.0 - 1e-9;
const ALPHA_FLOOR: f64 = 1e-12;
const SEARCH_TOL: f64 = 1e-9;

/// Harvest ratio of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtSplit {
    alpha: f64,
}

impl DtSplit {
    pub fn new(alpha: f64) -> Result<Self> {
        check_domain("alpha", alpha, alpha > 0.0 && alpha < 1.0, "(0, 1)")?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Outage probability and expected throughput of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub outage: f64,
    /// bits/s/Hz
    pub expected_throughput: f64,
}

/// Which constraint determined an optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Interior,
    OutageConstraint,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtOptimum {
    pub alpha_star: f64,
    pub throughput: f64,
    pub outage: f64,
    pub binding: Binding,
}

/// SIR scale factor `zeta * alpha / (1 - alpha)`.
pub fn sir_scale(params: &SystemParams, split: DtSplit) -> Result<f64> {
    params.check_analytic()?;
    Ok(scale(params.zeta, split.alpha))
}

fn scale(zeta: f64, alpha: f64) -> f64 {
    zeta * alpha / (1.0 - alpha)
}

pub fn outage(params: &SystemParams, split: DtSplit) -> Result<f64> {
    let k = sir_scale(params, split)?;
    ScaledExpRatio::new(k)?.cdf(params.gamma_o)
}

pub fn expected_throughput(params: &SystemParams, split: DtSplit) -> Result<f64> {
    params.check_analytic()?;
    Ok(throughput_of(params.zeta, split.alpha))
}

fn throughput_of(zeta: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * log2_one_plus_mean(scale(zeta, alpha))
}

pub fn link_stats(params: &SystemParams, split: DtSplit) -> Result<LinkStats> {
    Ok(LinkStats {
        outage: outage(params, split)?,
        expected_throughput: expected_throughput(params, split)?,
    })
}

/// Smallest harvest ratio meeting the outage constraint,
/// `(1 - theta) gamma_o / (theta zeta + (1 - theta) gamma_o)`.
/// Zero when the constraint is disabled.
pub fn min_alpha(params: &SystemParams) -> f64 {
    let t = params.theta;
    let g = params.gamma_o;
    if t >= 1.0 {
        return 0.0;
    }
    (1.0 - t) * g / (t * params.zeta + (1.0 - t) * g)
}

/// Maximizes expected throughput subject to the outage constraint.
///
/// The objective is concave in `alpha`; at `zeta = 1` its peak is at exactly
/// 0.5 by symmetry, otherwise the peak is located by golden-section search.
/// The optimum is the peak clipped to the constraint bound.
pub fn optimize(params: &SystemParams) -> Result<DtOptimum> {
    params.check_analytic()?;
    let lower = min_alpha(params);
    let peak = if params.zeta == 1.0 {
        0.5
    } else {
        let zeta = params.zeta;
        golden_section_max(
            |a| throughput_of(zeta, a),
            ALPHA_FLOOR,
            ALPHA_UPPER,
            SEARCH_TOL,
        )
        .0
    };
    let (alpha_star, binding) = if peak > lower {
        (peak, Binding::Interior)
    } else {
        (lower, Binding::OutageConstraint)
    };
    let split = DtSplit::new(alpha_star)?;
    Ok(DtOptimum {
        alpha_star,
        throughput: expected_throughput(params, split)?,
        outage: outage(params, split)?,
        binding,
    })
}

/// Throughput with both fading gains fixed at 1: `(1 - alpha) log2(1 / (1 - alpha))`.
pub fn deterministic_throughput(alpha: f64) -> Result<f64> {
    let split = DtSplit::new(alpha)?;
    let rest = 1.0 - split.alpha;
    Ok(-rest * rest.log2())
}

/// Optimal harvest ratio for the deterministic channel under an SIR floor:
/// the unconstrained peak `1 - 1/e`, or the ratio at which the SIR
/// `alpha / (1 - alpha)` reaches `gamma_o` if that is larger.
pub fn deterministic_optimize(gamma_o: f64) -> Result<f64> {
    check_domain(
        "gamma_o",
        gamma_o,
        gamma_o > 0.0 && gamma_o.is_finite(),
        "> 0",
    )?;
    let peak = 1.0 - (-1.0f64).exp();
    Ok(peak.max(gamma_o / (1.0 + gamma_o)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::db_to_linear;
    use proptest::prelude::*;
    use std::f64::consts::{E, LOG2_E};

    fn params(zeta: f64, gamma_o: f64, theta: f64) -> SystemParams {
        SystemParams {
            zeta,
            gamma_o,
            theta,
            ..Default::default()
        }
    }

    fn split(a: f64) -> DtSplit {
        DtSplit::new(a).unwrap()
    }

    #[test]
    fn split_domain() {
        assert!(DtSplit::new(0.0).is_err());
        assert!(DtSplit::new(1.0).is_err());
        assert!(DtSplit::new(0.3).is_ok());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(sir_scale(&params(1.0, 1.0, 0.05), split(0.5)).unwrap(), 1.0);
        assert_eq!(
            sir_scale(&params(1.0, 1.0, 0.05), split(0.75)).unwrap(),
            3.0
        );
        assert_eq!(sir_scale(&params(0.5, 1.0, 0.05), split(0.5)).unwrap(), 0.5);
    }

    #[test]
    fn rejects_noise_and_unequal_distances() {
        let p = SystemParams {
            sigma2: 1e-12,
            ..Default::default()
        };
        assert!(outage(&p, split(0.5)).is_err());
        assert!(optimize(&p).is_err());
    }

    #[test]
    fn outage_examples() {
        assert_eq!(outage(&params(1.0, 1.0, 0.05), split(0.5)).unwrap(), 0.5);
        let near_one = outage(&params(1.0, 1.0, 0.05), split(1.0 - 1e-12)).unwrap();
        assert!(near_one < 1e-11);
        // (1 - a) g / (a + (1 - a) g) at a = 0.2, g = 0.05
        let direct = 0.8 * 0.05 / (0.2 + 0.8 * 0.05);
        let got = outage(&params(1.0, 0.05, 0.05), split(0.2)).unwrap();
        assert!((got - direct).abs() < 1e-15);
    }

    #[test]
    fn throughput_at_half_is_bound() {
        let t = expected_throughput(&params(1.0, 0.05, 0.05), split(0.5)).unwrap();
        assert!((t - 0.5 * LOG2_E).abs() < 1e-15);
        assert!((t - 0.7213).abs() < 5e-5);
        let tiny = expected_throughput(&params(1.0, 0.05, 0.05), split(1e-9)).unwrap();
        assert!(tiny < 1e-7);
    }

    #[test]
    fn throughput_matches_factored_form_away_from_half() {
        for a in [0.1f64, 0.2, 0.35, 0.65, 0.9] {
            let factored = a * (1.0 - a) / (1.0 - 2.0 * a) * (1.0 / a - 1.0).log2();
            let got = expected_throughput(&params(1.0, 0.05, 0.05), split(a)).unwrap();
            assert!((got - factored).abs() < 1e-14, "{a}");
        }
    }

    #[test]
    fn min_alpha_examples() {
        let g = db_to_linear(-13.0);
        let a5 = min_alpha(&params(1.0, g, 0.05));
        let a2 = min_alpha(&params(1.0, g, 0.02));
        assert!((a5 - 0.4878).abs() < 1e-4, "{a5}");
        assert!((a2 - 0.7106).abs() < 1e-4, "{a2}");
        for (a, t) in [(a5, 0.05), (a2, 0.02)] {
            let o = outage(&params(1.0, g, t), split(a)).unwrap();
            assert!((o - t).abs() < 1e-12);
        }
        assert!(min_alpha(&params(1.0, g, 1.0 - 1e-12)) < 1e-10);
        assert_eq!(min_alpha(&params(1.0, g, 1.0)), 0.0);
    }

    #[test]
    fn optimize_examples() {
        let g = db_to_linear(-13.0);
        let o = optimize(&params(1.0, g, 0.05)).unwrap();
        assert_eq!(o.alpha_star, 0.5);
        assert_eq!(o.binding, Binding::Interior);
        assert!((o.throughput - 0.7213).abs() < 5e-5);

        let o = optimize(&params(1.0, g, 0.02)).unwrap();
        assert!((o.alpha_star - 0.7106).abs() < 1e-4);
        assert_eq!(o.binding, Binding::OutageConstraint);
        assert!(o.outage <= 0.02 + 1e-12);
        assert_eq!(o.alpha_star, min_alpha(&params(1.0, g, 0.02)));

        let o = optimize(&params(1.0, g, 1.0)).unwrap();
        assert_eq!(o.alpha_star, 0.5);
    }

    #[test]
    fn optimize_with_efficiency() {
        let g = db_to_linear(-20.0);
        let p = params(0.3, g, 1.0);
        let o = optimize(&p).unwrap();
        // Grid check of the peak.
        let mut best = (0.0, f64::MIN);
        for i in 1..100_000 {
            let a = i as f64 / 100_000.0;
            let v = expected_throughput(&p, split(a)).unwrap();
            if v > best.1 {
                best = (a, v);
            }
        }
        assert!((o.alpha_star - best.0).abs() < 2e-5);
        assert!(o.throughput >= best.1 - 1e-12);
        assert_eq!(o.binding, Binding::Interior);
    }

    #[test]
    fn deterministic_examples() {
        let a = 1.0 - 1.0 / E;
        let t = deterministic_throughput(a).unwrap();
        assert!((t - LOG2_E / E).abs() < 1e-15);
        assert!((t - 0.5307).abs() < 5e-5);
        assert!(deterministic_throughput(1e-12).unwrap() < 1e-11);
        assert!(deterministic_throughput(1.0 - 1e-12).unwrap() < 1e-10);
        assert!(deterministic_throughput(1.0).is_err());

        assert!((deterministic_optimize(E - 1.0).unwrap() - a).abs() < 1e-15);
        assert_eq!(deterministic_optimize(0.1).unwrap(), a);
        assert_eq!(deterministic_optimize(3.0).unwrap(), 0.75);
        assert!(deterministic_optimize(0.0).is_err());
    }

    #[test]
    fn deterministic_sir_floor_met() {
        for g in [0.01, 0.5, 1.0, 1.7, 2.0, 10.0, 100.0] {
            let a = deterministic_optimize(g).unwrap();
            assert!(a / (1.0 - a) >= g * (1.0 - 1e-12));
        }
    }

    #[test]
    fn power_is_irrelevant() {
        let base = params(1.0, 0.05, 0.03);
        let loud = SystemParams { p_a: 1e6, ..base };
        assert_eq!(optimize(&base).unwrap(), optimize(&loud).unwrap());
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(
                link_stats(&base, split(a)).unwrap(),
                link_stats(&loud, split(a)).unwrap()
            );
        }
    }

    proptest! {
        #[test]
        fn symmetric_about_half(a in 0.001f64..0.999) {
            prop_assume!((a - 0.5).abs() > 1e-9);
            let p = params(1.0, 0.05, 0.05);
            let lhs = expected_throughput(&p, split(a)).unwrap();
            let rhs = expected_throughput(&p, split(1.0 - a)).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn outage_decreasing(a in 0.01f64..0.98, da in 1e-4f64..0.01, g in 1e-3f64..10.0) {
            let p = params(1.0, g, 0.05);
            prop_assert!(outage(&p, split(a + da)).unwrap() < outage(&p, split(a)).unwrap());
        }

        #[test]
        fn min_alpha_monotone(g in 1e-3f64..10.0, t in 0.01f64..0.9, dt in 1e-3f64..0.05) {
            let lo = min_alpha(&params(1.0, g, t));
            prop_assert!(min_alpha(&params(1.0, g, t + dt)) < lo);
            prop_assert!(min_alpha(&params(1.0, g * 1.1, t)) > lo);
        }
    }
}
