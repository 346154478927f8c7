//! Relay selection in wireless powered cooperative networks whose relays carry
//! two-state (empty/charged) batteries.
//!
//! A single access point at the centre of a disc talks to a destination only
//! through decode-and-forward relays scattered as a Poisson point process.
//! Empty relays harvest energy from the access point's broadcast; charged relays
//! may be picked to forward and are drained at the end of the relaying slot.
//! Five selection policies are covered, see [`SchemeId`].
//!
//! The crate carries two independent engines:
//!
//! * closed forms: [`steady_state`], [`outage`] and [`multicell`] evaluate the
//!   battery Markov chain, the outage probabilities, their high-SNR floors and
//!   the multi-cell interference extension;
//! * a Monte Carlo simulator in [`sim`] that plays the protocol slot by slot.
//!
//! The crate is `no_std` (it needs `alloc`). All math goes through `libm`, so
//! results are bit-reproducible across platforms for a fixed seed.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN inputs fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod model;
pub mod multicell;
pub mod numerics;
pub mod outage;
pub mod sim;
pub mod steady_state;

pub use model::{DerivedParams, MultiCellConfig, NetworkConfig, SchemeId};
pub use numerics::{NumericsError, QuadratureSpec};
pub use outage::{EstimateMode, OutageEstimate};
pub use steady_state::{SelectionApprox, SteadyState};

use thiserror::Error;

/// Errors raised by the analytical and simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The Jensen closed form for battery-aware selection needs π₀ ≥ 1/(λπρ²).
    #[error("battery-starved regime: charge probability {pi0:.6} is below 1/(lambda*pi*rho^2) = {threshold:.6}")]
    BatteryStarved { pi0: f64, threshold: f64 },
    #[error("scheme {0} is not defined for this setting")]
    UnsupportedScheme(SchemeId),
    #[error("series did not reach tolerance within {0} terms")]
    SeriesTruncated(usize),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
