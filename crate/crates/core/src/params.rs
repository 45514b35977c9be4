use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};

/// Converts a power ratio in dB to linear scale, `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Physical and constraint constants shared by both protocols.
///
/// The slot length is normalized to 1 and the source-destination distance is
/// normalized to 1, so `d` is the source-relay distance as a fraction of it.
/// A `theta` of exactly 1 disables the outage constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Linear SIR threshold below which a link is in outage.
    pub gamma_o: f64,
    /// Maximum tolerable outage probability.
    pub theta: f64,
    /// Path-loss exponent.
    pub mu: f64,
    /// Source-relay distance.
    pub d: f64,
    /// Energy harvesting efficiency.
    pub zeta: f64,
    /// Access point transmit power in watts.
    pub p_a: f64,
    /// Receiver noise power in watts. Only the simulator uses it.
    pub sigma2: f64,
    pub r_as: f64,
    pub r_ar: f64,
    pub r_ad: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            gamma_o: db_to_linear(-13.0),
            theta: 0.05,
            mu: 2.0,
            d: 0.5,
            zeta: 1.0,
            p_a: 1.0,
            sigma2: 0.0,
            r_as: 10.0,
            r_ar: 10.0,
            r_ad: 10.0,
        }
    }
}

impl SystemParams {
    /// Checks every field against its domain.
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        check_domain("gamma_o", self.gamma_o, pos(self.gamma_o), "> 0")?;
        check_domain(
            "theta",
            self.theta,
            self.theta > 0.0 && self.theta <= 1.0,
            "(0, 1]",
        )?;
        check_domain("mu", self.mu, self.mu >= 2.0 && self.mu.is_finite(), ">= 2")?;
        check_domain("d", self.d, self.d > 0.0 && self.d < 1.0, "(0, 1)")?;
        check_domain(
            "zeta",
            self.zeta,
            self.zeta > 0.0 && self.zeta <= 1.0,
            "(0, 1]",
        )?;
        check_domain("p_a", self.p_a, pos(self.p_a), "> 0")?;
        check_domain(
            "sigma2",
            self.sigma2,
            self.sigma2 >= 0.0 && self.sigma2.is_finite(),
            ">= 0",
        )?;
        check_domain("r_as", self.r_as, pos(self.r_as), "> 0")?;
        check_domain("r_ar", self.r_ar, pos(self.r_ar), "> 0")?;
        check_domain("r_ad", self.r_ad, pos(self.r_ad), "> 0")?;
        Ok(())
    }

    /// Validates and additionally requires the interference-limited,
    /// equal-distance regime in which the closed forms hold.
    pub fn check_analytic(&self) -> Result<()> {
        self.validate()?;
        if self.sigma2 != 0.0 {
            return Err(Error::Precondition(format!(
                "sigma2 must be 0 for closed-form analysis, got {}",
                self.sigma2
            )));
        }
        if self.r_as != self.r_ar || self.r_as != self.r_ad {
            return Err(Error::Precondition(format!(
                "access point distances must be equal, got r_as={}, r_ar={}, r_ad={}",
                self.r_as, self.r_ar, self.r_ad
            )));
        }
        Ok(())
    }

    /// True when the outage constraint is switched off.
    pub fn unconstrained(&self) -> bool {
        self.theta >= 1.0
    }
}
