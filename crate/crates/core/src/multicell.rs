//! Multi-cell extension: interference from a PPP of out-of-cell APs on the first hop.
//!
//! The cell is a disc of radius ρ = 1/(4√μ) with its destination at distance ρ. The
//! broadcast phase uses the unbounded path loss d^α and sees interference; relays forward
//! on orthogonal channels, so the second hop and the battery model stay single-cell.

use core::f64::consts::PI;

use libm::{exp, expm1, pow};

use crate::model::{derive, nearest_weight, unbounded_path_loss, MultiCellConfig, SchemeId};
use crate::numerics::{adaptive, gauss_2f1, NumericsError, QuadratureSpec};
use crate::outage::{second_hop_nearest_raw, second_hop_uniform_raw, OutageEstimate};
use crate::steady_state::{disc_mean, steady_state};
use crate::{Error, Result};

/// Interferers: PPP of density `mu` outside an exclusion disc around the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSpec {
    pub mu: f64,
    pub exclusion_radius: f64,
    pub alpha: f64,
}

impl InterferenceSpec {
    pub fn new(mu: f64, exclusion_radius: f64, alpha: f64) -> Result<Self> {
        if !(mu > 0.0 && exclusion_radius > 0.0) {
            return Err(Error::InvalidConfig(
                "interference needs mu > 0 and a positive exclusion radius",
            ));
        }
        if !(alpha > 2.0) {
            return Err(Error::InvalidConfig("the interference transform needs alpha > 2"));
        }
        Ok(Self {
            mu,
            exclusion_radius,
            alpha,
        })
    }

    pub fn for_cell(config: &MultiCellConfig) -> Self {
        Self {
            mu: config.mu(),
            exclusion_radius: config.rho(),
            alpha: config.base().alpha,
        }
    }

    /// E[I] = 2πμ ρ^(2−α)/(α − 2) by Campbell's theorem.
    pub fn mean(&self) -> f64 {
        2.0 * PI * self.mu * pow(self.exclusion_radius, 2.0 - self.alpha) / (self.alpha - 2.0)
    }

    /// Mean interference contributed beyond `radius`.
    pub fn mean_beyond(&self, radius: f64) -> f64 {
        2.0 * PI * self.mu * pow(radius, 2.0 - self.alpha) / (self.alpha - 2.0)
    }
}

/// L(s) = E[e^(−sI)] for I = Σ H_j r_j^(−α), H_j ~ Exp(1):
/// exp(−πμ[sρ^(2−α) ₂F₁(1,2;2−δ;z/(z+1))/((1−δ)(z+1)²) − ρ²s/(s+ρ^α)]), z = s/ρ^α.
pub fn laplace_interference(s: f64, spec: &InterferenceSpec) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain("Laplace argument must be nonnegative"));
    }
    Ok(laplace_unchecked(s, spec)?)
}

fn laplace_unchecked(s: f64, spec: &InterferenceSpec) -> core::result::Result<f64, NumericsError> {
    if s == 0.0 {
        return Ok(1.0);
    }
    let rho = spec.exclusion_radius;
    let delta = 2.0 / spec.alpha;
    let rho_a = pow(rho, spec.alpha);
    let z = s / rho_a;
    let f = gauss_2f1(1.0, 2.0, 2.0 - delta, z / (z + 1.0))?;
    let bracket =
        s * pow(rho, 2.0 - spec.alpha) * f / ((1.0 - delta) * (z + 1.0) * (z + 1.0)) - rho * rho * s / (s + rho_a);
    Ok(exp(-PI * spec.mu * bracket))
}

/// Whether the first hop sees the interference transform or is interference-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interference {
    On,
    Off,
}

fn first_hop_weighted<W: Fn(f64) -> f64>(
    config: &MultiCellConfig,
    xi: f64,
    weight: W,
    interference: Interference,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let base = config.base();
    let eps = derive(base).epsilon;
    let ispec = InterferenceSpec::for_cell(config);
    let alpha = base.alpha;
    let value = adaptive(
        |x| {
            let pl = unbounded_path_loss(x, alpha);
            let l = match interference {
                Interference::On => laplace_unchecked(eps * pl, &ispec)?,
                Interference::Off => 1.0,
            };
            Ok(weight(x) * exp(-xi * pl) * l)
        },
        0.0,
        config.rho(),
        spec,
    )?;
    Ok(value)
}

/// Q₁(Ξ, ρ): first-hop success of a uniformly placed relay,
/// (2/ρ²)∫₀^ρ e^(−Ξx^α) L(εx^α) x dx.
pub fn decode_success_rrs_mc(config: &MultiCellConfig) -> Result<f64> {
    let xi = derive(config.base()).xi;
    q1(config, xi, Interference::On, &QuadratureSpec::planar())
}

/// Q₁′(λ, Ξ, ρ): first-hop success of the relay nearest to the AP among density `lambda`.
pub fn decode_success_rcs_mc(config: &MultiCellConfig, lambda: f64) -> Result<f64> {
    let xi = derive(config.base()).xi;
    q1_nearest(config, lambda, xi, Interference::On, &QuadratureSpec::planar())
}

fn q1(config: &MultiCellConfig, xi: f64, interference: Interference, spec: &QuadratureSpec) -> Result<f64> {
    let rho2 = config.rho() * config.rho();
    first_hop_weighted(config, xi, |x| 2.0 * x / rho2, interference, spec)
}

fn q1_nearest(
    config: &MultiCellConfig,
    lambda: f64,
    xi: f64,
    interference: Interference,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("thinned density must be positive"));
    }
    let rho = config.rho();
    first_hop_weighted(config, xi, |x| nearest_weight(x, lambda, rho), interference, spec)
}

/// Multi-cell outage for the single-relay schemes (Λ for random, Θ for closest selection).
pub fn outage_multicell(scheme: SchemeId, config: &MultiCellConfig) -> Result<OutageEstimate> {
    let xi = derive(config.base()).xi;
    let v = multicell_value(scheme, config, xi, Interference::On)?;
    Ok(OutageEstimate::analytic(scheme, v))
}

/// The same expressions with the interference transform replaced by one, i.e. the single cell
/// with an unbounded first-hop path loss.
pub fn outage_multicell_interference_free(scheme: SchemeId, config: &MultiCellConfig) -> Result<OutageEstimate> {
    let xi = derive(config.base()).xi;
    let v = multicell_value(scheme, config, xi, Interference::Off)?;
    Ok(OutageEstimate::analytic(scheme, v))
}

/// Ξ → 0 limit of [`outage_multicell`] at fixed ε: the interference term survives.
pub fn outage_multicell_floor(scheme: SchemeId, config: &MultiCellConfig) -> Result<OutageEstimate> {
    let v = multicell_value(scheme, config, 0.0, Interference::On)?;
    Ok(OutageEstimate::asymptotic(scheme, v))
}

fn multicell_value(scheme: SchemeId, config: &MultiCellConfig, xi: f64, interference: Interference) -> Result<f64> {
    if scheme == SchemeId::Db {
        return Err(Error::UnsupportedScheme(scheme));
    }
    let base = config.base();
    let spec = QuadratureSpec::planar();
    let rho = config.rho();
    let k = xi / base.psi;
    let eta1 = steady_state(scheme, base)?.eta1;
    // battery-aware schemes select among the thinned PPP of charged relays and the
    // selected relay is charged by construction
    let (lambda_eff, charged) = if scheme.battery_aware() {
        (base.lambda * eta1, 1.0)
    } else {
        (base.lambda, eta1)
    };
    let m = disc_mean(lambda_eff, rho);
    if m == 0.0 {
        return Ok(1.0);
    }
    let success = if scheme.closest() {
        let first = q1_nearest(config, lambda_eff, xi, interference, &spec)?;
        let second = if k == 0.0 {
            1.0
        } else {
            second_hop_nearest_raw(k, lambda_eff, rho, rho, base.alpha, &spec)?
        };
        first * second
    } else {
        let first = q1(config, xi, interference, &spec)?;
        let second = if k == 0.0 {
            1.0
        } else {
            second_hop_uniform_raw(k, rho, rho, base.alpha, &spec)?
        };
        first * second
    };
    Ok(exp(-m) - expm1(-m) * (1.0 - charged * success))
}
