//! Poisson relay placements on the disc.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::sqrt;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::model::NetworkConfig;

/// Polar position of a relay relative to the AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPosition {
    pub distance: f64,
    pub angle: f64,
}

impl RelayPosition {
    /// Uniform point on the disc of radius `rho` (radius by inverse CDF √U·ρ).
    pub fn sample_uniform<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Self {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Self {
            distance: rho * sqrt(u),
            angle: 2.0 * PI * v,
        }
    }
}

/// One draw of the relay point process inside the disc.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopologyRealization {
    pub relays: Vec<RelayPosition>,
    pub destination_distance: f64,
}

impl TopologyRealization {
    pub fn count(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }
}

/// Samples N ~ Poisson(λπρ²) relays i.i.d. uniform on the disc.
pub fn sample_topology<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> TopologyRealization {
    let n = sample_count(config.mean_count(), rng);
    TopologyRealization {
        relays: (0..n).map(|_| RelayPosition::sample_uniform(config.rho, rng)).collect(),
        destination_distance: config.d0,
    }
}

pub(crate) fn sample_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng) as usize,
        Err(_) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::replication_rng;

    #[test]
    fn count_is_poisson_with_disc_mean() {
        let c = NetworkConfig::default();
        let mut rng = replication_rng(1, 0);
        let draws = 100_000;
        let total: usize = (0..draws).map(|_| sample_count(c.mean_count(), &mut rng)).sum();
        let mean = total as f64 / draws as f64;
        let se = (c.mean_count() / draws as f64).sqrt();
        assert!((mean - c.mean_count()).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn radial_law_passes_ks() {
        let c = NetworkConfig::default();
        let mut rng = replication_rng(2, 0);
        let mut r: Vec<f64> = (0..20_000)
            .map(|_| RelayPosition::sample_uniform(c.rho, &mut rng).distance)
            .collect();
        r.sort_by(f64::total_cmp);
        let n = r.len() as f64;
        let d = r
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = (x / c.rho).powi(2);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // Kolmogorov critical value at 1%
        assert!(d < 1.628 / n.sqrt(), "{d}");
    }

    #[test]
    fn positions_stay_on_disc_and_are_reproducible() {
        let c = NetworkConfig::default();
        let a = sample_topology(&c, &mut replication_rng(5, 1));
        let b = sample_topology(&c, &mut replication_rng(5, 1));
        assert_eq!(a, b);
        assert!(a
            .relays
            .iter()
            .all(|p| (0.0..=c.rho).contains(&p.distance) && (0.0..2.0 * PI).contains(&p.angle)));
        assert_eq!(a.destination_distance, c.d0);
    }
}
