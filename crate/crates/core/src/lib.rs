//! Analysis, optimization and simulation of wireless-powered links whose
//! nodes harvest energy from an access point that keeps transmitting to its
//! own users, so the energy source later acts as the interferer.
//!
//! Two protocols are covered:
//!
//! * direct transmission ([`dt`]): harvest for a fraction `alpha` of the slot,
//!   then transmit to the destination for the rest;
//! * decode-and-forward relaying ([`df`]): both source and relay harvest for
//!   `alpha`, the source sends to the relay for `beta`, and the relay forwards
//!   for `1 - alpha - beta`.
//!
//! In the interference-limited regime every received SIR is a scaled ratio of
//! two unit-mean exponential gains ([`channel::ScaledExpRatio`]), which gives
//! closed forms for outage and expected throughput. [`montecarlo`] checks them
//! against a seeded slot-level simulation and [`oracle`] holds brute-force
//! numerical references.

pub mod channel;
pub mod df;
pub mod dt;
mod error;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;
mod params;

pub use error::{Error, Result};
pub use params::{db_to_linear, linear_to_db, SystemParams};
