//! Network parameters, derived thresholds and the distance/CDF kernels shared by
//! the analytical engine and the simulator.

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use libm::{cos, exp, pow, sqrt};

use crate::numerics::scaled_lower_gamma;
use crate::{Error, Result};

/// Below this argument the harvesting CDF is evaluated by its first-order expansion.
const CDF_SERIES_CUTOFF: f64 = 1e-12;

/// Physical and model parameters of one single-cell scenario. All powers are linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Relay density per m².
    pub lambda: f64,
    /// Disc radius in metres.
    pub rho: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// AP transmit power in watts.
    pub power: f64,
    /// Battery-size ratio P_r / P.
    pub psi: f64,
    /// AWGN variance in watts.
    pub noise: f64,
    /// Target spectral efficiency in bits per channel use.
    pub rate: f64,
    /// AP to destination distance in metres.
    pub d0: f64,
    /// Energy conversion efficiency.
    pub zeta: f64,
}

impl Default for NetworkConfig {
    /// λ = 1, ρ = 3, α = 3, P = 30 dB, Ψ = 0.1, σ² = 1, r₀ = 0.01, d₀ = 2ρ, ζ = 1.
    fn default() -> Self {
        Self {
            lambda: 1.0,
            rho: 3.0,
            alpha: 3.0,
            power: 1e3,
            psi: 0.1,
            noise: 1.0,
            rate: 0.01,
            d0: 6.0,
            zeta: 1.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lambda) {
            return Err(Error::InvalidConfig("lambda must be positive and finite"));
        }
        if !positive(self.rho) {
            return Err(Error::InvalidConfig("rho must be positive and finite"));
        }
        // α = 2 is admitted for the single cell: the closed forms stay finite there and the
        // moderate-SNR RCS asymptote exists only at α = 2. The multi-cell model needs α > 2.
        if !(self.alpha >= 2.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be at least 2"));
        }
        if !positive(self.power) {
            return Err(Error::InvalidConfig("power must be positive and finite"));
        }
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(Error::InvalidConfig("psi must lie in (0, 1)"));
        }
        if !positive(self.noise) {
            return Err(Error::InvalidConfig("noise must be positive and finite"));
        }
        if !positive(self.rate) {
            return Err(Error::InvalidConfig("rate must be positive and finite"));
        }
        if !positive(self.d0) {
            return Err(Error::InvalidConfig("d0 must be positive and finite"));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(Error::InvalidConfig("zeta must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn derive(&self) -> DerivedParams {
        derive(self)
    }

    /// Expected number of relays in the disc, λπρ².
    pub fn mean_count(&self) -> f64 {
        self.lambda * PI * self.rho * self.rho
    }

    /// Copy with the transmit power set from decibels, P = 10^(dB/10)·σ².
    pub fn with_power_db(mut self, db: f64) -> Self {
        self.power = pow(10.0, db / 10.0) * self.noise;
        self
    }
}

/// Quantities derived from a [`NetworkConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// δ = 2/α.
    pub delta: f64,
    /// SNR threshold ε = 2^(2r₀) − 1.
    pub epsilon: f64,
    /// Normalized threshold Ξ = εσ²/P.
    pub xi: f64,
    /// Relay transmit power P_r = ΨP.
    pub p_relay: f64,
    /// λπρ².
    pub mean_count: f64,
}

pub fn derive(config: &NetworkConfig) -> DerivedParams {
    let epsilon = pow(2.0, 2.0 * config.rate) - 1.0;
    DerivedParams {
        delta: 2.0 / config.alpha,
        epsilon,
        xi: epsilon * config.noise / config.power,
        p_relay: config.psi * config.power,
        mean_count: config.mean_count(),
    }
}

/// The five relay-selection policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// Random relay selection regardless of battery state.
    Rrs,
    /// Closest relay to the AP regardless of battery state.
    Rcs,
    /// Random selection among charged relays.
    Rrsb,
    /// Closest charged relay.
    Rcsb,
    /// Distributed beamforming by every charged relay that decodes.
    Db,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [Self::Rrs, Self::Rcs, Self::Rrsb, Self::Rcsb, Self::Db];
    pub const SINGLE_RELAY: [SchemeId; 4] = [Self::Rrs, Self::Rcs, Self::Rrsb, Self::Rcsb];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rrs => "RRS",
            Self::Rcs => "RCS",
            Self::Rrsb => "RRSB",
            Self::Rcsb => "RCSB",
            Self::Db => "DB",
        }
    }

    /// Only charged relays are eligible for selection.
    pub fn battery_aware(self) -> bool {
        matches!(self, Self::Rrsb | Self::Rcsb | Self::Db)
    }

    /// Selection by distance to the AP.
    pub fn closest(self) -> bool {
        matches!(self, Self::Rcs | Self::Rcsb)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig(
                "unknown scheme (expected RRS, RCS, RRSB, RCSB or DB)",
            ))
    }
}

/// Multi-cell scenario: APs form a PPP of density μ and each cell is a disc of
/// radius 1/(4√μ) with its destination on the cell edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiCellConfig {
    base: NetworkConfig,
    mu: f64,
    truncation_radius: f64,
}

impl MultiCellConfig {
    /// Builds the cell from `base`, overriding its radius and destination distance.
    /// The interferer truncation radius defaults to ten cell radii.
    pub fn new(base: NetworkConfig, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig("mu must be positive and finite"));
        }
        let rho = cell_radius(mu);
        Self::with_truncation(base, mu, 10.0 * rho)
    }

    pub fn with_truncation(mut base: NetworkConfig, mu: f64, truncation_radius: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidConfig("mu must be positive and finite"));
        }
        let rho = cell_radius(mu);
        base.rho = rho;
        base.d0 = rho;
        base.validate()?;
        if base.alpha <= 2.0 {
            return Err(Error::InvalidConfig("the interference transform needs alpha > 2"));
        }
        if !(truncation_radius > rho && truncation_radius.is_finite()) {
            return Err(Error::InvalidConfig("truncation radius must exceed the cell radius"));
        }
        Ok(Self {
            base,
            mu,
            truncation_radius,
        })
    }

    pub fn base(&self) -> &NetworkConfig {
        &self.base
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.base.rho
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// Same cell geometry with other link parameters (power, rate, ...) taken from `f`.
    /// Radius and destination distance stay pinned to μ.
    pub fn map_base(&self, f: impl FnOnce(NetworkConfig) -> NetworkConfig) -> Result<Self> {
        let ratio = self.truncation_radius / self.rho();
        let mut next = f(self.base);
        next.rho = self.rho();
        next.d0 = self.rho();
        Self::with_truncation(next, self.mu, ratio * self.rho())
    }
}

/// Disc approximation of a Voronoi cell, ρ = 1/(4√μ).
pub fn cell_radius(mu: f64) -> f64 {
    1.0 / (4.0 * sqrt(mu))
}

/// Bounded path loss 1 + d^α of the single-cell model (always above one).
pub fn bounded_path_loss(d: f64, alpha: f64) -> f64 {
    1.0 + pow(d, alpha)
}

/// Conventional unbounded path loss d^α, used only for the multi-cell first hop.
pub fn unbounded_path_loss(d: f64, alpha: f64) -> f64 {
    pow(d, alpha)
}

/// 1 − F_u(x) for u = |h|²/(1 + d^α) with d uniform on the disc and |h|² ~ Exp(1):
/// δ e^(−x) γ(δ, xρ^α)/(xρ^α)^δ.
pub fn tail_u(x: f64, config: &NetworkConfig) -> f64 {
    let delta = 2.0 / config.alpha;
    if x <= 0.0 {
        return 1.0;
    }
    if x < CDF_SERIES_CUTOFF {
        return 1.0 - x * (1.0 + mean_path_power(config));
    }
    let y = x * pow(config.rho, config.alpha);
    // the domain checks cannot fail for δ > 0 and y > 0
    let scaled = scaled_lower_gamma(delta, y).unwrap_or(1.0 / delta);
    (delta * exp(-x) * scaled).clamp(0.0, 1.0)
}

/// F_u(x), the CDF of the normalized harvested power u.
pub fn cdf_u(x: f64, config: &NetworkConfig) -> f64 {
    if x < CDF_SERIES_CUTOFF {
        return if x <= 0.0 {
            0.0
        } else {
            x * (1.0 + mean_path_power(config))
        };
    }
    1.0 - tail_u(x, config)
}

/// E[d^α] for d uniform on the disc.
fn mean_path_power(config: &NetworkConfig) -> f64 {
    let delta = 2.0 / config.alpha;
    pow(config.rho, config.alpha) * delta / (1.0 + delta)
}

/// Density of the AP-to-nearest-relay distance, conditioned on N ≥ 1.
pub fn nearest_distance_pdf(r: f64, config: &NetworkConfig) -> Result<f64> {
    if !(0.0..=config.rho).contains(&r) {
        return Err(Error::Domain("nearest distance lies outside [0, rho]"));
    }
    Ok(nearest_weight(r, config.lambda, config.rho))
}

/// 2λπr e^(−λπr²)/(1 − e^(−λπρ²)) without the domain check; `lambda` may be a thinned density.
pub(crate) fn nearest_weight(r: f64, lambda: f64, rho: f64) -> f64 {
    let norm = -libm::expm1(-lambda * PI * rho * rho);
    2.0 * lambda * PI * r * exp(-lambda * PI * r * r) / norm
}

/// Relay-to-destination distance by the cosine law.
pub fn relay_dest_distance(d_i: f64, theta: f64, d0: f64) -> f64 {
    let sq = d_i * d_i + d0 * d0 - 2.0 * d_i * d0 * cos(theta);
    sqrt(sq.max(0.0))
}
