//! Two-state battery Markov chain: transition probabilities and stationary distribution.

use core::f64::consts::PI;

use libm::{exp, lgamma, log, sqrt};

use crate::model::{tail_u, NetworkConfig, SchemeId};
use crate::{Error, Result};

/// Transition probabilities and stationary distribution of one relay's battery.
///
/// `pi0` is the empty→charged probability, `pi1` the charged→empty probability;
/// `eta0`/`eta1` are the stationary empty/charged probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub pi0: f64,
    pub pi1: f64,
    pub eta0: f64,
    pub eta1: f64,
}

impl SteadyState {
    /// Stationary distribution of the chain [[1−π₀, π₀], [π₁, 1−π₁]].
    pub fn from_transitions(pi0: f64, pi1: f64) -> Self {
        let total = pi0 + pi1;
        Self {
            pi0,
            pi1,
            eta0: pi1 / total,
            eta1: pi0 / total,
        }
    }

    /// Row-stochastic transition matrix, state 0 = empty, 1 = charged.
    pub fn transition_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.pi0, self.pi0], [self.pi1, 1.0 - self.pi1]]
    }

    /// Largest component of ηΠ − η.
    pub fn stationarity_residual(&self) -> f64 {
        let m = self.transition_matrix();
        let next0 = self.eta0 * m[0][0] + self.eta1 * m[1][0];
        let next1 = self.eta0 * m[0][1] + self.eta1 * m[1][1];
        (next0 - self.eta0).abs().max((next1 - self.eta1).abs())
    }
}

/// How the per-slot selection probability E[1/N] of a relay is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionApprox {
    /// E[1/N] ≈ 1/E[N], which yields the closed forms.
    #[default]
    Jensen,
    /// E[1/N] summed over the Poisson law of N (zero relays contribute nothing).
    ExactPoisson,
}

/// Probability that an empty battery is fully charged within one broadcast slot,
/// π₀ = P{u ≥ Ψ/ζ}.
pub fn charge_probability(config: &NetworkConfig) -> f64 {
    tail_u(config.psi / config.zeta, config)
}

/// Steady state under the closed-form (Jensen) selection probabilities.
pub fn steady_state(scheme: SchemeId, config: &NetworkConfig) -> Result<SteadyState> {
    steady_state_with(scheme, config, SelectionApprox::Jensen)
}

pub fn steady_state_with(scheme: SchemeId, config: &NetworkConfig, approx: SelectionApprox) -> Result<SteadyState> {
    config.validate()?;
    let pi0 = charge_probability(config);
    let m = config.mean_count();
    match (scheme, approx) {
        (SchemeId::Db, _) => Ok(SteadyState::from_transitions(pi0, 1.0)),
        // π₁ = 1/(λπρ²) is above one when λπρ² < 1; reported as computed
        (SchemeId::Rrs | SchemeId::Rcs, SelectionApprox::Jensen) => Ok(SteadyState::from_transitions(pi0, 1.0 / m)),
        (SchemeId::Rrs | SchemeId::Rcs, SelectionApprox::ExactPoisson) => {
            Ok(SteadyState::from_transitions(pi0, expected_inverse_count(m)?))
        }
        (SchemeId::Rrsb | SchemeId::Rcsb, SelectionApprox::Jensen) => battery_aware_jensen(pi0, m),
        (SchemeId::Rrsb | SchemeId::Rcsb, SelectionApprox::ExactPoisson) => battery_aware_exact(pi0, m),
    }
}

/// η₁ = 1 − 1/(π₀λπρ²), with π₁ = 1/(η₁λπρ²) so that η₁ = π₀/(π₀ + π₁).
///
/// Just above the threshold (π₀ < 1/(λπρ² − 1)) the Jensen value of π₁ exceeds one;
/// it is reported as computed.
fn battery_aware_jensen(pi0: f64, m: f64) -> Result<SteadyState> {
    let threshold = 1.0 / m;
    if pi0 < threshold {
        return Err(Error::BatteryStarved { pi0, threshold });
    }
    let eta1 = 1.0 - threshold / pi0;
    if eta1 == 0.0 {
        return Ok(SteadyState {
            pi0,
            pi1: f64::INFINITY,
            eta0: 1.0,
            eta1: 0.0,
        });
    }
    Ok(SteadyState {
        pi0,
        pi1: 1.0 / (eta1 * m),
        eta0: threshold / pi0,
        eta1,
    })
}

/// Solves η₁ = π₀/(π₀ + E[1/N']) with N' ~ Poisson(η₁λπρ²) by bisection.
/// η(π₀ + E[1/N'(η)]) − π₀ is increasing in η, negative at 0 and nonnegative at 1.
fn battery_aware_exact(pi0: f64, m: f64) -> Result<SteadyState> {
    let residual = |eta: f64| -> Result<f64> { Ok(eta * (pi0 + expected_inverse_count(eta * m)?) - pi0) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 {
            break;
        }
    }
    let eta1 = 0.5 * (lo + hi);
    Ok(SteadyState::from_transitions(pi0, expected_inverse_count(eta1 * m)?))
}

/// E[1/N]·1{N ≥ 1} for N ~ Poisson(mean): e^(−m) Σ_{k≥1} m^k/(k·k!).
pub fn expected_inverse_count(mean: f64) -> Result<f64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::Domain("Poisson mean must be nonnegative and finite"));
    }
    if mean == 0.0 {
        return Ok(0.0);
    }
    // pmf terms are formed in log space so large means neither overflow nor underflow early
    let k_max = (mean + 40.0 * sqrt(mean) + 60.0) as u64;
    let log_mean = log(mean);
    let mut sum = 0.0;
    for k in 1..=k_max {
        let kf = k as f64;
        let pmf = exp(kf * log_mean - mean - lgamma(kf + 1.0));
        sum += pmf / kf;
        if kf > mean && pmf < 1e-18 * sum {
            return Ok(sum);
        }
    }
    Err(Error::SeriesTruncated(k_max as usize))
}

/// λπρ² for a possibly thinned density.
pub(crate) fn disc_mean(lambda: f64, rho: f64) -> f64 {
    lambda * PI * rho * rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> NetworkConfig {
        NetworkConfig {
            alpha: 2.0,
            ..NetworkConfig::default()
        }
    }

    #[test]
    fn charge_probability_reference() {
        let c = reference();
        let oracle = (1.0 / 9.0) * (-0.1f64).exp() * (1.0 - (-0.9f64).exp()) / 0.1;
        let pi0 = charge_probability(&c);
        assert!((pi0 - oracle).abs() < 1e-12);
        assert!((pi0 - 0.5966).abs() < 1e-4);
        assert!((pi0 - (1.0 - crate::model::cdf_u(0.1, &c))).abs() < 1e-15);
    }

    #[test]
    fn charge_probability_limits() {
        let tiny = NetworkConfig {
            psi: 1e-14,
            ..reference()
        };
        assert!((charge_probability(&tiny) - 1.0).abs() < 1e-9);
        let starved = NetworkConfig {
            zeta: 1e-4,
            ..reference()
        };
        assert!(charge_probability(&starved) < 1e-40);
    }

    #[test]
    fn reference_steady_states() {
        let c = reference();
        let rrs = steady_state(SchemeId::Rrs, &c).unwrap();
        assert!((rrs.eta1 - 0.94404).abs() < 1e-5);
        assert!((rrs.pi1 - 1.0 / (9.0 * PI)).abs() < 1e-15);
        let rrsb = steady_state(SchemeId::Rrsb, &c).unwrap();
        assert!((rrsb.eta1 - 0.94072).abs() < 1e-5);
        assert!((rrs.eta1 - 1.0 / (2.0 - rrsb.eta1)).abs() < 1e-12);
        let db = steady_state(SchemeId::Db, &c).unwrap();
        assert!((db.eta1 - 0.37367).abs() < 1e-5);
        assert_eq!(db.pi1, 1.0);
        assert_eq!(steady_state(SchemeId::Rcs, &c).unwrap(), rrs);
        assert_eq!(steady_state(SchemeId::Rcsb, &c).unwrap(), rrsb);
    }

    #[test]
    fn battery_starved_regime_is_an_error() {
        let c = NetworkConfig {
            lambda: 0.01,
            ..NetworkConfig::default()
        };
        match steady_state(SchemeId::Rrsb, &c) {
            Err(Error::BatteryStarved { pi0, threshold }) => assert!(pi0 < threshold),
            other => panic!("expected starvation, got {other:?}"),
        }
        // the exact-E[1/N'] fixed point always exists
        let exact = steady_state_with(SchemeId::Rrsb, &c, SelectionApprox::ExactPoisson).unwrap();
        assert!(exact.eta1 > 0.0 && exact.eta1 < 1.0);
    }

    #[test]
    fn expected_inverse_count_matches_direct_sum() {
        for m in [0.3f64, 2.0, 14.137, 28.27] {
            let mut pmf = (-m).exp();
            let mut direct = 0.0;
            for k in 1..400 {
                pmf *= m / k as f64;
                direct += pmf / k as f64;
            }
            let v = expected_inverse_count(m).unwrap();
            assert!((v - direct).abs() < 1e-14 * direct.max(1e-300), "{m}: {v} vs {direct}");
            if m > 10.0 {
                assert!(v >= 1.0 / m);
            }
        }
        assert_eq!(expected_inverse_count(0.0).unwrap(), 0.0);
        assert!(expected_inverse_count(5000.0).unwrap() > 1.0 / 5000.0);
    }

    #[test]
    fn exact_variant_is_below_jensen_and_gap_shrinks() {
        let mut last_gap = f64::INFINITY;
        for lambda in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let c = NetworkConfig {
                lambda,
                ..NetworkConfig::default()
            };
            let jensen = steady_state(SchemeId::Rrsb, &c).unwrap().eta1;
            let exact = steady_state_with(SchemeId::Rrsb, &c, SelectionApprox::ExactPoisson)
                .unwrap()
                .eta1;
            let gap = jensen - exact;
            assert!(gap >= 0.0 && gap < last_gap, "lambda {lambda}: gap {gap}");
            last_gap = gap;
        }
    }

    #[test]
    fn eta_rrs_approaches_one_for_dense_networks() {
        let c = NetworkConfig {
            lambda: 1e3,
            ..reference()
        };
        assert!(steady_state(SchemeId::Rrs, &c).unwrap().eta1 > 0.999);
    }

    #[test]
    fn eta_rrs_decreases_in_psi() {
        let mut last = 1.0;
        for i in 1..60 {
            let psi = i as f64 * 0.016;
            let eta = steady_state(SchemeId::Rrs, &NetworkConfig { psi, ..reference() })
                .unwrap()
                .eta1;
            assert!(eta < last);
            last = eta;
        }
    }

    #[test]
    fn eta_db_is_lambda_invariant() {
        let base = steady_state(SchemeId::Db, &reference()).unwrap().eta1;
        for lambda in [0.01, 0.3, 1.0, 7.0, 250.0] {
            let eta = steady_state(SchemeId::Db, &NetworkConfig { lambda, ..reference() })
                .unwrap()
                .eta1;
            assert!((eta - base).abs() <= 1e-12);
        }
    }

    fn config_strategy() -> impl Strategy<Value = NetworkConfig> {
        (0.05f64..5.0, 0.5f64..8.0, 2.0f64..5.0, 0.001f64..0.99).prop_map(|(lambda, rho, alpha, psi)| NetworkConfig {
            lambda,
            rho,
            alpha,
            psi,
            ..NetworkConfig::default()
        })
    }

    proptest! {
        #[test]
        fn stationary_for_every_scheme(c in config_strategy()) {
            for scheme in SchemeId::ALL {
                let Ok(s) = steady_state(scheme, &c) else { continue };
                prop_assert!((s.eta0 + s.eta1 - 1.0).abs() < 1e-14);
                prop_assert!((0.0..=1.0).contains(&s.eta1));
                if s.pi1.is_finite() {
                    prop_assert!(s.stationarity_residual() < 1e-14);
                    prop_assert!((s.eta1 - s.pi0 / (s.pi0 + s.pi1)).abs() < 1e-14);
                }
                // the Jensen π₁ = 1/(η₁λπρ²) exceeds one for sparse networks
                let m = c.mean_count();
                let dense = if scheme.battery_aware() { s.pi0 * (m - 1.0) >= 1.0 } else { m >= 1.0 };
                if dense || scheme == SchemeId::Db {
                    prop_assert!((0.0..=1.0).contains(&s.pi1));
                }
            }
        }

        #[test]
        fn battery_aware_never_beats_rrs(c in config_strategy()) {
            let rrs = steady_state(SchemeId::Rrs, &c).unwrap().eta1;
            if let Ok(rrsb) = steady_state(SchemeId::Rrsb, &c) {
                prop_assert!(rrsb.eta1 <= rrs + 1e-15);
                prop_assert!((rrs - 1.0 / (2.0 - rrsb.eta1)).abs() < 1e-12);
            }
            prop_assert!(steady_state(SchemeId::Db, &c).unwrap().eta1 <= 0.5);
        }
    }
}
