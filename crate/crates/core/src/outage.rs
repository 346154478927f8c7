//! Closed-form single-cell outage probabilities, their decompositions and high-SNR limits.

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use libm::{exp, expm1, lgamma, log, pow, sqrt};

use crate::model::{derive, nearest_weight, relay_dest_distance, tail_u, NetworkConfig, SchemeId};
use crate::numerics::{bessel_i0, integrate_1d, integrate_polar_disc, regularized_lower_gamma, QuadratureSpec};
use crate::steady_state::{disc_mean, steady_state_with, SelectionApprox};
use crate::{Error, Result};

/// Where an outage value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateMode {
    Analytic,
    Asymptotic,
    Simulated,
}

impl EstimateMode {
    pub const ALL: [EstimateMode; 3] = [Self::Analytic, Self::Simulated, Self::Asymptotic];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Asymptotic => "asymptotic",
            Self::Simulated => "simulated",
        }
    }
}

impl fmt::Display for EstimateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig(
                "unknown mode (expected analytic, simulated or asymptotic)",
            ))
    }
}

/// An outage probability together with its provenance.
///
/// `stderr` and `trials` are set exactly when `mode` is [`EstimateMode::Simulated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub value: f64,
    pub mode: EstimateMode,
    pub scheme: SchemeId,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
}

impl OutageEstimate {
    pub fn analytic(scheme: SchemeId, value: f64) -> Self {
        Self::exact(scheme, value, EstimateMode::Analytic)
    }

    pub fn asymptotic(scheme: SchemeId, value: f64) -> Self {
        Self::exact(scheme, value, EstimateMode::Asymptotic)
    }

    pub fn simulated(scheme: SchemeId, value: f64, stderr: f64, trials: u64) -> Self {
        Self {
            value,
            mode: EstimateMode::Simulated,
            scheme,
            stderr: Some(stderr),
            trials: Some(trials),
        }
    }

    fn exact(scheme: SchemeId, value: f64, mode: EstimateMode) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            mode,
            scheme,
            stderr: None,
            trials: None,
        }
    }
}

/// Knobs shared by every closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptions {
    pub quadrature: QuadratureSpec,
    pub approx: SelectionApprox,
    /// DB series: hard cap on the summation index.
    pub db_k_max: usize,
    /// DB series: stop once a term and the bound on the remaining tail fall below this.
    pub db_term_tol: f64,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::planar(),
            approx: SelectionApprox::Jensen,
            db_k_max: 60,
            db_term_tol: 1e-12,
        }
    }
}

/// First-hop success of a relay placed uniformly on the disc, 1 − F_u(Ξ).
pub fn first_hop_uniform(config: &NetworkConfig) -> f64 {
    tail_u(derive(config).xi, config)
}

/// Second-hop success of a relay placed uniformly on the disc:
/// (1/πρ²) ∬ exp(−(Ξ/Ψ)(1 + c^α)) x dx dθ.
pub fn second_hop_uniform(config: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    let k = derive(config).xi / config.psi;
    second_hop_uniform_raw(k, config.rho, config.d0, config.alpha, spec)
}

pub(crate) fn second_hop_uniform_raw(k: f64, rho: f64, d0: f64, alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    let area = PI * rho * rho;
    let v = integrate_polar_disc(|x, theta| link_success(k, x, theta, d0, alpha), rho, spec)?;
    Ok(v / area)
}

/// Second-hop success of the relay nearest to the AP among a PPP of density `lambda`.
pub(crate) fn second_hop_nearest_raw(
    k: f64,
    lambda: f64,
    rho: f64,
    d0: f64,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let norm = -expm1(-disc_mean(lambda, rho));
    let v = integrate_polar_disc(
        |r, theta| exp(-lambda * PI * r * r) * link_success(k, r, theta, d0, alpha),
        rho,
        spec,
    )?;
    Ok(lambda * v / norm)
}

/// P{|g|²/(1 + c^α) ≥ k} for a relay at polar position (x, θ).
fn link_success(k: f64, x: f64, theta: f64, d0: f64, alpha: f64) -> f64 {
    let c = relay_dest_distance(x, theta, d0);
    exp(-k * (1.0 + pow(c, alpha)))
}

/// Relaying success Q of a uniformly placed relay: first- times second-hop success.
pub fn relaying_success_uniform(config: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    Ok(first_hop_uniform(config) * second_hop_uniform(config, spec)?)
}

/// Relaying success Q′(λ) of the relay nearest to the AP in a PPP of density `lambda`.
pub fn relaying_success_nearest(config: &NetworkConfig, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (first, second) = nearest_hop_factors(config, lambda, spec)?;
    Ok(first * second)
}

/// The two factors of Q′(λ).
pub fn nearest_hop_factors(config: &NetworkConfig, lambda: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("thinned density must be positive"));
    }
    let d = derive(config);
    let (rho, alpha) = (config.rho, config.alpha);
    let first = integrate_1d(
        |x| nearest_weight(x, lambda, rho) * exp(-d.xi * (1.0 + pow(x, alpha))),
        0.0,
        rho,
        spec,
    )?;
    let second = second_hop_nearest_raw(d.xi / config.psi, lambda, rho, config.d0, alpha, spec)?;
    Ok((first, second))
}

/// Breakdown of the RRS outage into its four disjoint events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrsEvents {
    /// N = 0.
    pub no_relay: f64,
    /// A relay is selected but its battery is empty.
    pub empty_battery: f64,
    /// Charged selected relay fails to decode.
    pub first_hop: f64,
    /// Relay decodes but the destination is in outage.
    pub second_hop: f64,
}

impl RrsEvents {
    pub fn total(&self) -> f64 {
        self.no_relay + self.empty_battery + self.first_hop + self.second_hop
    }
}

pub fn rrs_events(config: &NetworkConfig, options: &AnalyticOptions) -> Result<RrsEvents> {
    let eta1 = steady_state_with(SchemeId::Rrs, config, options.approx)?.eta1;
    let m = config.mean_count();
    let some = -expm1(-m);
    let q1 = first_hop_uniform(config);
    let q2 = second_hop_uniform(config, &options.quadrature)?;
    Ok(RrsEvents {
        no_relay: exp(-m),
        empty_battery: some * (1.0 - eta1),
        first_hop: some * eta1 * (1.0 - q1),
        second_hop: some * eta1 * q1 * (1.0 - q2),
    })
}

pub fn outage_rrs(config: &NetworkConfig) -> Result<OutageEstimate> {
    outage_with(SchemeId::Rrs, config, &AnalyticOptions::default())
}

pub fn outage_rcs(config: &NetworkConfig) -> Result<OutageEstimate> {
    outage_with(SchemeId::Rcs, config, &AnalyticOptions::default())
}

pub fn outage_rrsb(config: &NetworkConfig) -> Result<OutageEstimate> {
    outage_with(SchemeId::Rrsb, config, &AnalyticOptions::default())
}

pub fn outage_rcsb(config: &NetworkConfig) -> Result<OutageEstimate> {
    outage_with(SchemeId::Rcsb, config, &AnalyticOptions::default())
}

/// Closed-form outage of `scheme` with default options.
pub fn outage(scheme: SchemeId, config: &NetworkConfig) -> Result<OutageEstimate> {
    outage_with(scheme, config, &AnalyticOptions::default())
}

pub fn outage_with(scheme: SchemeId, config: &NetworkConfig, options: &AnalyticOptions) -> Result<OutageEstimate> {
    config.validate()?;
    let spec = &options.quadrature;
    let m = config.mean_count();
    let value = match scheme {
        SchemeId::Rrs => {
            let eta1 = steady_state_with(scheme, config, options.approx)?.eta1;
            exp(-m) - expm1(-m) * (1.0 - eta1 * relaying_success_uniform(config, spec)?)
        }
        SchemeId::Rcs => {
            let eta1 = steady_state_with(scheme, config, options.approx)?.eta1;
            let q = relaying_success_nearest(config, config.lambda, spec)?;
            exp(-m) - expm1(-m) * (1.0 - eta1 * q)
        }
        SchemeId::Rrsb | SchemeId::Rcsb => {
            let eta1 = steady_state_with(scheme, config, options.approx)?.eta1;
            let thinned = config.lambda * eta1;
            let m_charged = disc_mean(thinned, config.rho);
            if m_charged == 0.0 {
                1.0
            } else {
                let q = if scheme == SchemeId::Rrsb {
                    relaying_success_uniform(config, spec)?
                } else {
                    relaying_success_nearest(config, thinned, spec)?
                };
                exp(-m_charged) - expm1(-m_charged) * (1.0 - q)
            }
        }
        SchemeId::Db => return Ok(outage_db_with(config, options)?.estimate),
    };
    Ok(OutageEstimate::analytic(scheme, value))
}

/// DB outage from the truncated Poisson–gamma series, with the number of terms summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbSeries {
    pub estimate: OutageEstimate,
    pub terms: usize,
}

/// Parameters of the DB series: participating-relay density λ′ and z₀ = Ξ(1 + d₀^α)/Ψ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbParams {
    pub lambda_prime: f64,
    pub z0: f64,
}

pub fn db_params(config: &NetworkConfig, approx: SelectionApprox) -> Result<DbParams> {
    let eta1 = steady_state_with(SchemeId::Db, config, approx)?.eta1;
    let xi = derive(config).xi;
    Ok(DbParams {
        lambda_prime: config.lambda * eta1 * tail_u(xi, config),
        z0: xi * (1.0 + pow(config.d0, config.alpha)) / config.psi,
    })
}

/// Σ_k P(k, z₀)·Poisson(k; λ′πρ²), where P(0, z₀) is taken as 1 (no participant ⇒ outage).
///
/// Summation stops at the first k past the Poisson mode where both the term and the bound
/// P(k+1, z₀)·P{N ≥ k+1} on everything that follows are below `term_tol`.
pub fn outage_db(config: &NetworkConfig, k_max: usize, term_tol: f64) -> Result<DbSeries> {
    outage_db_with(
        config,
        &AnalyticOptions {
            db_k_max: k_max,
            db_term_tol: term_tol,
            ..AnalyticOptions::default()
        },
    )
}

/// [`outage_db`] with the truncation and selection settings taken from `options`.
pub fn outage_db_with(config: &NetworkConfig, options: &AnalyticOptions) -> Result<DbSeries> {
    config.validate()?;
    let p = db_params(config, options.approx)?;
    let mean = disc_mean(p.lambda_prime, config.rho);
    let tol = options.db_term_tol;
    let mut sum = exp(-mean);
    if mean == 0.0 {
        return Ok(DbSeries {
            estimate: OutageEstimate::analytic(SchemeId::Db, 1.0),
            terms: 1,
        });
    }
    let log_mean = log(mean);
    for k in 1..=options.db_k_max {
        let kf = k as f64;
        let pmf = exp(kf * log_mean - mean - lgamma(kf + 1.0));
        let term = regularized_lower_gamma(kf, p.z0)? * pmf;
        sum += term;
        if term < tol {
            let tail = regularized_lower_gamma(kf + 1.0, p.z0)? * regularized_lower_gamma(kf + 1.0, mean)?;
            if tail < tol {
                return Ok(DbSeries {
                    estimate: OutageEstimate::analytic(SchemeId::Db, sum),
                    terms: k + 1,
                });
            }
        }
    }
    Err(Error::SeriesTruncated(options.db_k_max))
}

/// High-SNR DB approximation e^(−λ′πρ²) I₀(2ρ√(z₀λ′π)).
pub fn outage_db_asymptote(config: &NetworkConfig) -> Result<OutageEstimate> {
    config.validate()?;
    let p = db_params(config, SelectionApprox::Jensen)?;
    let mean = disc_mean(p.lambda_prime, config.rho);
    let i0 = bessel_i0(2.0 * config.rho * sqrt(p.z0 * p.lambda_prime * PI))?;
    Ok(OutageEstimate::asymptotic(SchemeId::Db, exp(-mean) * i0))
}

/// Outage floor reached as P → ∞ with Ψ fixed. Depends only on the battery steady state.
pub fn outage_floor(scheme: SchemeId, config: &NetworkConfig) -> Result<OutageEstimate> {
    let eta1 = steady_state_with(scheme, config, SelectionApprox::Jensen)?.eta1;
    let value = match scheme {
        SchemeId::Rrs | SchemeId::Rcs => 1.0 - eta1,
        SchemeId::Rrsb | SchemeId::Rcsb | SchemeId::Db => exp(-disc_mean(config.lambda * eta1, config.rho)),
    };
    Ok(OutageEstimate::asymptotic(scheme, value))
}

/// First-order expansion in Ξ of the outage given N ≥ 1, assuming ρ ≪ d₀.
///
/// RRS: 1 − η₁[1 − Ξ((1 + d₀^α)/Ψ + 1)]. RCS (α = 2 only):
/// 1 − η₁ λπ/(λπ + Ξ)·(1 + Ξρ² e^(−λπρ²)/(1 − e^(−λπρ²)))·[1 − Ξ((1 + d₀²)/Ψ + 1)].
pub fn outage_asymptote_moderate(scheme: SchemeId, config: &NetworkConfig) -> Result<OutageEstimate> {
    config.validate()?;
    let eta1 = steady_state_with(scheme, config, SelectionApprox::Jensen)?.eta1;
    let xi = derive(config).xi;
    let value = match scheme {
        SchemeId::Rrs => 1.0 - eta1 * (1.0 - xi * ((1.0 + pow(config.d0, config.alpha)) / config.psi + 1.0)),
        SchemeId::Rcs => {
            if config.alpha != 2.0 {
                return Err(Error::Domain("the RCS moderate-SNR asymptote requires alpha = 2"));
            }
            let lp = config.lambda * PI;
            let m = config.mean_count();
            let rho2 = config.rho * config.rho;
            let first = lp / (lp + xi) * (1.0 + xi * rho2 * exp(-m) / -expm1(-m));
            let second = 1.0 - xi * ((1.0 + config.d0 * config.d0) / config.psi + 1.0);
            1.0 - eta1 * first * second
        }
        other => return Err(Error::UnsupportedScheme(other)),
    };
    Ok(OutageEstimate::asymptotic(scheme, value))
}
