//! Monte Carlo estimators built on [`run_slot`](super::slot::run_slot).
//!
//! A replication runs `burn_in_slots` unrecorded slots and then `measure_slots`
//! recorded ones. Counters are integers, so merging replications in index order
//! gives bit-identical totals whatever the scheduling.

use alloc::vec::Vec;

use libm::{ceil, sqrt};
use rand::Rng;

use super::rng::{replication_rng, SimRng};
use super::slot::{run_slot, run_slot_multicell, Battery, BatteryState, InterferenceSampler, LinkBudget};
use super::topology::{sample_count, sample_topology, RelayPosition, TopologyRealization};
use crate::model::{MultiCellConfig, NetworkConfig, SchemeId};
use crate::outage::OutageEstimate;
use crate::{Error, Result};

/// How relay positions evolve across slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ensemble {
    /// Every slot draws a fresh Poisson set of relays out of a persistent pool,
    /// so a relay keeps its battery while its position is redrawn. Outage and
    /// battery statistics are then averages over the point process.
    #[default]
    Mobile,
    /// One fixed placement per replication, held for all its slots.
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub burn_in_slots: u64,
    pub measure_slots: u64,
    /// Number of independent replications (one placement each under `Static`).
    pub topology_draws: u64,
    pub exact_relay_dest_distance: bool,
    pub ensemble: Ensemble,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            burn_in_slots: 1000,
            measure_slots: 5000,
            topology_draws: 200,
            exact_relay_dest_distance: true,
            ensemble: Ensemble::Mobile,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.measure_slots == 0 || self.topology_draws == 0 {
            return Err(Error::InvalidConfig(
                "simulation needs at least one replication and one measured slot",
            ));
        }
        Ok(())
    }

    pub fn total_slots(&self) -> u64 {
        self.measure_slots * self.topology_draws
    }
}

/// Integer counters from recorded slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub slots: u64,
    pub outages: u64,
    pub no_relay_slots: u64,
    /// Present relays summed over slots.
    pub relay_slots: u64,
    /// Present relays that started the slot empty, and how many of them charged.
    pub empty_visits: u64,
    pub charge_events: u64,
    /// Present relays that started the slot charged, and how many of them drained.
    pub charged_visits: u64,
    pub discharge_events: u64,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        self.slots += other.slots;
        self.outages += other.outages;
        self.no_relay_slots += other.no_relay_slots;
        self.relay_slots += other.relay_slots;
        self.empty_visits += other.empty_visits;
        self.charge_events += other.charge_events;
        self.charged_visits += other.charged_visits;
        self.discharge_events += other.discharge_events;
    }

    pub fn total<'a>(tallies: impl IntoIterator<Item = &'a Tally>) -> Tally {
        tallies.into_iter().fold(Tally::default(), |mut acc, t| {
            acc.merge(t);
            acc
        })
    }

    pub fn outage_rate(&self) -> f64 {
        ratio(self.outages, self.slots)
    }

    pub fn pi0(&self) -> f64 {
        ratio(self.charge_events, self.empty_visits)
    }

    pub fn pi1(&self) -> f64 {
        ratio(self.discharge_events, self.charged_visits)
    }

    /// Time-averaged fraction of present relays that are charged.
    pub fn eta1(&self) -> f64 {
        ratio(self.charged_visits, self.relay_slots)
    }

    /// Outage frequency with its binomial standard error.
    pub fn outage_estimate(&self, scheme: SchemeId) -> OutageEstimate {
        let p = self.outage_rate();
        let n = self.slots.max(1) as f64;
        OutageEstimate::simulated(scheme, p, sqrt(p * (1.0 - p) / n), self.slots)
    }

    fn record(&mut self, before: &[Battery], after: &[Battery], outage: bool) {
        self.slots += 1;
        self.outages += u64::from(outage);
        self.no_relay_slots += u64::from(before.is_empty());
        self.relay_slots += before.len() as u64;
        for (b, a) in before.iter().zip(after) {
            match (b, a) {
                (Battery::Empty, a) => {
                    self.empty_visits += 1;
                    self.charge_events += u64::from(*a == Battery::Charged);
                }
                (Battery::Charged, a) => {
                    self.charged_visits += 1;
                    self.discharge_events += u64::from(*a == Battery::Empty);
                }
            }
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Empirical battery statistics with a batch-means standard error on η₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateEstimate {
    pub pi0: f64,
    pub pi1: f64,
    pub eta1: f64,
    pub eta1_stderr: f64,
    pub replications: u64,
    pub relay_slots: u64,
}

impl SteadyStateEstimate {
    pub fn from_tallies(tallies: &[Tally]) -> Self {
        let total = Tally::total(tallies);
        let batches: Vec<f64> = tallies.iter().filter(|t| t.relay_slots > 0).map(Tally::eta1).collect();
        let r = batches.len();
        let eta1_stderr = if r > 1 {
            let mean = batches.iter().sum::<f64>() / r as f64;
            let var = batches.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64;
            sqrt(var / r as f64)
        } else {
            0.0
        };
        Self {
            pi0: total.pi0(),
            pi1: total.pi1(),
            eta1: total.eta1(),
            eta1_stderr,
            replications: tallies.len() as u64,
            relay_slots: total.relay_slots,
        }
    }
}

enum Channel {
    Single,
    Multi { sampler: InterferenceSampler, epsilon: f64 },
}

struct Engine<'a> {
    scheme: SchemeId,
    config: &'a NetworkConfig,
    sim: &'a SimConfig,
    budget: LinkBudget,
    channel: Channel,
}

impl Engine<'_> {
    fn step(&self, topology: &TopologyRealization, battery: &mut BatteryState, rng: &mut SimRng) -> Result<bool> {
        Ok(match &self.channel {
            Channel::Single => run_slot(self.scheme, topology, battery, &self.budget, rng).outage,
            Channel::Multi { sampler, epsilon } => {
                run_slot_multicell(self.scheme, topology, battery, &self.budget, sampler, *epsilon, rng)?.outage
            }
        })
    }

    fn replicate(&self, index: u64) -> Result<Tally> {
        let mut rng = replication_rng(self.sim.seed, index);
        match self.sim.ensemble {
            Ensemble::Mobile => self.replicate_mobile(&mut rng),
            Ensemble::Static => self.replicate_static(&mut rng),
        }
    }

    fn replicate_static(&self, rng: &mut SimRng) -> Result<Tally> {
        let topology = sample_topology(self.config, rng);
        let mut battery = BatteryState::empty(topology.count());
        let mut before = battery.clone();
        let mut tally = Tally::default();
        for slot in 0..self.sim.burn_in_slots + self.sim.measure_slots {
            before.clone_from(&battery);
            let outage = self.step(&topology, &mut battery, rng)?;
            if slot >= self.sim.burn_in_slots {
                tally.record(before.as_slice(), battery.as_slice(), outage);
            }
        }
        Ok(tally)
    }

    fn replicate_mobile(&self, rng: &mut SimRng) -> Result<Tally> {
        let m = self.config.mean_count();
        let size = pool_size(m);
        let mut pool = alloc::vec![Battery::Empty; size];
        let mut order: Vec<usize> = (0..size).collect();
        let mut topology = TopologyRealization {
            relays: Vec::with_capacity(size),
            destination_distance: self.config.d0,
        };
        let mut battery = BatteryState::empty(0);
        let mut before = Vec::with_capacity(size);
        let mut tally = Tally::default();
        for slot in 0..self.sim.burn_in_slots + self.sim.measure_slots {
            let n = sample_count(m, rng).min(size);
            // partial Fisher-Yates: order[..n] is a uniform n-subset of the pool
            for j in 0..n {
                let k = rng.random_range(j..size);
                order.swap(j, k);
            }
            topology.relays.clear();
            topology
                .relays
                .extend((0..n).map(|_| RelayPosition::sample_uniform(self.config.rho, rng)));
            before.clear();
            before.extend(order[..n].iter().map(|&i| pool[i]));
            let b = battery.as_mut_vec();
            b.clear();
            b.extend_from_slice(&before);

            let outage = self.step(&topology, &mut battery, rng)?;
            for (&i, &state) in order[..n].iter().zip(battery.as_slice()) {
                pool[i] = state;
            }
            if slot >= self.sim.burn_in_slots {
                tally.record(&before, battery.as_slice(), outage);
            }
        }
        Ok(tally)
    }
}

/// Pool large enough that a Poisson(m) draw essentially never exceeds it.
pub fn pool_size(mean: f64) -> usize {
    let wide = ceil(4.0 * mean) as usize;
    let tail = ceil(mean + 10.0 * sqrt(mean)) as usize + 16;
    wide.max(tail)
}

fn single_engine<'a>(scheme: SchemeId, config: &'a NetworkConfig, sim: &'a SimConfig) -> Result<Engine<'a>> {
    config.validate()?;
    sim.validate()?;
    Ok(Engine {
        scheme,
        config,
        sim,
        budget: LinkBudget::new(config, sim.exact_relay_dest_distance),
        channel: Channel::Single,
    })
}

fn multi_engine<'a>(scheme: SchemeId, config: &'a MultiCellConfig, sim: &'a SimConfig) -> Result<Engine<'a>> {
    if scheme == SchemeId::Db {
        return Err(Error::UnsupportedScheme(scheme));
    }
    let base = config.base();
    base.validate()?;
    sim.validate()?;
    Ok(Engine {
        scheme,
        config: base,
        sim,
        budget: LinkBudget::new(base, sim.exact_relay_dest_distance),
        channel: Channel::Multi {
            sampler: InterferenceSampler::for_cell(config)?,
            epsilon: base.derive().epsilon,
        },
    })
}

/// Runs replication `index` of the single-cell model.
pub fn simulate_replication(scheme: SchemeId, config: &NetworkConfig, sim: &SimConfig, index: u64) -> Result<Tally> {
    single_engine(scheme, config, sim)?.replicate(index)
}

/// Runs replication `index` of the multi-cell model.
pub fn simulate_replication_multicell(
    scheme: SchemeId,
    config: &MultiCellConfig,
    sim: &SimConfig,
    index: u64,
) -> Result<Tally> {
    multi_engine(scheme, config, sim)?.replicate(index)
}

fn run_all(engine: &Engine<'_>) -> Result<Vec<Tally>> {
    (0..engine.sim.topology_draws).map(|i| engine.replicate(i)).collect()
}

/// Serial outage estimate over all replications.
pub fn estimate_outage(scheme: SchemeId, config: &NetworkConfig, sim: &SimConfig) -> Result<OutageEstimate> {
    let tallies = run_all(&single_engine(scheme, config, sim)?)?;
    Ok(Tally::total(&tallies).outage_estimate(scheme))
}

pub fn estimate_outage_multicell(
    scheme: SchemeId,
    config: &MultiCellConfig,
    sim: &SimConfig,
) -> Result<OutageEstimate> {
    let tallies = run_all(&multi_engine(scheme, config, sim)?)?;
    Ok(Tally::total(&tallies).outage_estimate(scheme))
}

pub fn estimate_steady_state(scheme: SchemeId, config: &NetworkConfig, sim: &SimConfig) -> Result<SteadyStateEstimate> {
    let tallies = run_all(&single_engine(scheme, config, sim)?)?;
    Ok(SteadyStateEstimate::from_tallies(&tallies))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            burn_in_slots: 200,
            measure_slots: 2000,
            topology_draws: 8,
            ..SimConfig::default()
        }
    }

    #[test]
    fn replications_are_deterministic() {
        let c = NetworkConfig::default();
        let a = simulate_replication(SchemeId::Rrsb, &c, &small(), 3).unwrap();
        let b = simulate_replication(SchemeId::Rrsb, &c, &small(), 3).unwrap();
        let d = simulate_replication(SchemeId::Rrsb, &c, &small(), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn merge_order_does_not_matter() {
        let c = NetworkConfig::default();
        let t: Vec<Tally> = (0..4)
            .map(|i| simulate_replication(SchemeId::Rcs, &c, &small(), i).unwrap())
            .collect();
        let fwd = Tally::total(&t);
        let rev = Tally::total(t.iter().rev());
        assert_eq!(fwd, rev);
    }

    #[test]
    fn db_always_drains_charged_relays() {
        let c = NetworkConfig::default().with_power_db(30.0);
        let s = estimate_steady_state(SchemeId::Db, &c, &small()).unwrap();
        assert_eq!(s.pi1, 1.0);
    }

    #[test]
    fn rrs_discharge_rate_is_near_one_over_mean_count() {
        let c = NetworkConfig::default();
        let s = estimate_steady_state(SchemeId::Rrs, &c, &small()).unwrap();
        let m = c.mean_count();
        // selection among N present relays: E[1/N | N ≥ 1] sits slightly above 1/m
        assert!(s.pi1 > 0.9 / m && s.pi1 < 1.3 / m, "{} vs {}", s.pi1, 1.0 / m);
    }

    #[test]
    fn outage_is_at_least_no_relay_probability() {
        let c = NetworkConfig {
            lambda: 0.05,
            ..NetworkConfig::default()
        }
        .with_power_db(50.0);
        let t = Tally::total(
            &(0..4)
                .map(|i| simulate_replication(SchemeId::Rcsb, &c, &small(), i).unwrap())
                .collect::<Vec<_>>(),
        );
        assert!(t.outages >= t.no_relay_slots);
        let empty = t.no_relay_slots as f64 / t.slots as f64;
        assert!((empty - (-c.mean_count()).exp()).abs() < 0.02, "{empty}");
    }

    #[test]
    fn static_ensemble_runs_and_conserves_counts() {
        let c = NetworkConfig::default();
        let sim = SimConfig {
            ensemble: Ensemble::Static,
            ..small()
        };
        let t = simulate_replication(SchemeId::Rrsb, &c, &sim, 0).unwrap();
        assert_eq!(t.slots, sim.measure_slots);
        assert_eq!(t.empty_visits + t.charged_visits, t.relay_slots);
        assert_eq!(t.relay_slots % t.slots, 0);
    }

    #[test]
    fn pool_covers_poisson_tail() {
        for m in [0.1, 1.0, 28.27, 300.0, 3000.0] {
            let p = pool_size(m) as f64;
            assert!(p >= m + 10.0 * m.sqrt());
        }
    }

    #[test]
    fn multicell_db_is_unsupported() {
        let mc = MultiCellConfig::new(NetworkConfig::default(), 0.005).unwrap();
        assert_eq!(
            simulate_replication_multicell(SchemeId::Db, &mc, &small(), 0),
            Err(Error::UnsupportedScheme(SchemeId::Db))
        );
    }

    #[test]
    fn rejects_empty_run() {
        let sim = SimConfig {
            measure_slots: 0,
            ..SimConfig::default()
        };
        assert!(estimate_outage(SchemeId::Rrs, &NetworkConfig::default(), &sim).is_err());
    }
}
