//! One relaying slot of the harvest-then-forward protocol.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{pow, sqrt};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::topology::{RelayPosition, TopologyRealization};
use crate::model::{bounded_path_loss, relay_dest_distance, MultiCellConfig, NetworkConfig, SchemeId};
use crate::multicell::InterferenceSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Battery {
    #[default]
    Empty,
    Charged,
}

/// Battery flags of the relays in a topology, index-aligned with its `relays`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatteryState(Vec<Battery>);

impl BatteryState {
    pub fn empty(n: usize) -> Self {
        Self(alloc::vec![Battery::Empty; n])
    }

    pub fn from_vec(v: Vec<Battery>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Battery {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, b: Battery) {
        self.0[i] = b;
    }

    pub fn charged_count(&self) -> usize {
        self.0.iter().filter(|&&b| b == Battery::Charged).count()
    }

    pub fn as_slice(&self) -> &[Battery] {
        &self.0
    }

    pub(crate) fn as_mut_vec(&mut self) -> &mut Vec<Battery> {
        &mut self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    None,
    Relay(usize),
    /// Distributed beamforming: every relay that tried to decode.
    Group(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    pub outage: bool,
    pub selected: Selection,
    pub first_hop_ok: bool,
    pub second_hop_ok: bool,
}

/// Per-configuration thresholds, all on the normalized gains |h|²/L and |g|²/L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Decoding threshold Ξ = ε/(P/σ²).
    pub xi: f64,
    /// Relay-hop threshold Ξ/Ψ.
    pub relay_threshold: f64,
    /// Harvesting threshold Ψ/ζ.
    pub harvest_threshold: f64,
    pub alpha: f64,
    pub d0: f64,
    /// Use the cosine-law relay-destination distance instead of d0.
    pub exact_distance: bool,
}

impl LinkBudget {
    pub fn new(config: &NetworkConfig, exact_distance: bool) -> Self {
        let d = config.derive();
        Self {
            xi: d.xi,
            relay_threshold: d.xi / config.psi,
            harvest_threshold: config.psi / config.zeta,
            alpha: config.alpha,
            d0: config.d0,
            exact_distance,
        }
    }

    fn relay_loss(&self, p: &RelayPosition) -> f64 {
        let c = if self.exact_distance {
            relay_dest_distance(p.distance, p.angle, self.d0)
        } else {
            self.d0
        };
        bounded_path_loss(c, self.alpha)
    }
}

/// Draws the aggregate out-of-cell interference (normalized by P) seen by a relay.
///
/// Interferers live on the annulus [ρ, R] around the relay; the mean of the
/// part beyond R is added back as a constant.
#[derive(Debug, Clone, Copy)]
pub struct InterferenceSampler {
    spec: InterferenceSpec,
    outer: f64,
    count: Option<Poisson<f64>>,
    tail: f64,
}

impl InterferenceSampler {
    pub fn new(spec: InterferenceSpec, outer: f64) -> Result<Self> {
        let inner = spec.exclusion_radius;
        if !(outer >= inner) {
            return Err(Error::InvalidConfig(
                "truncation radius must be at least the exclusion radius",
            ));
        }
        let mean = spec.mu * PI * (outer * outer - inner * inner);
        Ok(Self {
            spec,
            outer,
            count: Poisson::new(mean).ok(),
            tail: spec.mean_beyond(outer),
        })
    }

    pub fn for_cell(config: &MultiCellConfig) -> Result<Self> {
        Self::new(InterferenceSpec::for_cell(config), config.truncation_radius())
    }

    /// Interference from the annulus only.
    pub fn sample_truncated<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let Some(count) = self.count else { return 0.0 };
        let n = count.sample(rng) as usize;
        let inner2 = self.spec.exclusion_radius * self.spec.exclusion_radius;
        let span = self.outer * self.outer - inner2;
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let h: f64 = rng.sample(Exp1);
                h * pow(sqrt(inner2 + u * span), -self.spec.alpha)
            })
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_truncated(rng) + self.tail
    }

    pub fn tail_mean(&self) -> f64 {
        self.tail
    }
}

/// Plays one slot under the single-cell model, updating `battery` in place.
pub fn run_slot<R: Rng + ?Sized>(
    scheme: SchemeId,
    topology: &TopologyRealization,
    battery: &mut BatteryState,
    budget: &LinkBudget,
    rng: &mut R,
) -> SlotOutcome {
    let xi = budget.xi;
    let alpha = budget.alpha;
    play(scheme, topology, battery, budget, rng, |p, rng| {
        let h: f64 = rng.sample(Exp1);
        h / bounded_path_loss(p.distance, alpha) >= xi
    })
}

/// Multi-cell slot: the first hop sees the unbounded path loss and sampled
/// interference; harvesting and the second hop behave as in the single cell.
pub fn run_slot_multicell<R: Rng + ?Sized>(
    scheme: SchemeId,
    topology: &TopologyRealization,
    battery: &mut BatteryState,
    budget: &LinkBudget,
    interference: &InterferenceSampler,
    epsilon: f64,
    rng: &mut R,
) -> Result<SlotOutcome> {
    if scheme == SchemeId::Db {
        return Err(Error::UnsupportedScheme(scheme));
    }
    let xi = budget.xi;
    let alpha = budget.alpha;
    Ok(play(scheme, topology, battery, budget, rng, |p, rng| {
        let h: f64 = rng.sample(Exp1);
        let i = interference.sample(rng);
        h * pow(p.distance, -alpha) >= epsilon * i + xi
    }))
}

fn play<R: Rng + ?Sized>(
    scheme: SchemeId,
    topology: &TopologyRealization,
    battery: &mut BatteryState,
    budget: &LinkBudget,
    rng: &mut R,
    mut decodes: impl FnMut(&RelayPosition, &mut R) -> bool,
) -> SlotOutcome {
    let relays = &topology.relays;
    debug_assert_eq!(relays.len(), battery.len());
    let charged = |b: &BatteryState, i: usize| b.get(i) == Battery::Charged;

    let mut out = SlotOutcome {
        outage: true,
        ..SlotOutcome::default()
    };
    // empties present at the start of the slot harvest from this broadcast
    let was_empty: Vec<bool> = (0..relays.len()).map(|i| !charged(battery, i)).collect();

    if scheme == SchemeId::Db {
        let group: Vec<usize> = (0..relays.len()).filter(|&i| charged(battery, i)).collect();
        let mut snr = 0.0;
        let mut any = false;
        for &i in &group {
            if decodes(&relays[i], rng) {
                any = true;
                let g: f64 = rng.sample(Exp1);
                snr += g / budget.relay_loss(&relays[i]);
            }
            battery.set(i, Battery::Empty);
        }
        out.first_hop_ok = any;
        out.second_hop_ok = any && snr >= budget.relay_threshold;
        out.outage = !out.second_hop_ok;
        if !group.is_empty() {
            out.selected = Selection::Group(group);
        }
    } else if let Some(s) = select(scheme, relays, battery, rng) {
        out.selected = Selection::Relay(s);
        if charged(battery, s) {
            out.first_hop_ok = decodes(&relays[s], rng);
            if out.first_hop_ok {
                let g: f64 = rng.sample(Exp1);
                out.second_hop_ok = g / budget.relay_loss(&relays[s]) >= budget.relay_threshold;
            }
            out.outage = !out.second_hop_ok;
            battery.set(s, Battery::Empty);
        }
    }

    for (i, p) in relays.iter().enumerate() {
        if was_empty[i] {
            let h: f64 = rng.sample(Exp1);
            if h / bounded_path_loss(p.distance, budget.alpha) >= budget.harvest_threshold {
                battery.set(i, Battery::Charged);
            }
        }
    }
    out
}

fn select<R: Rng + ?Sized>(
    scheme: SchemeId,
    relays: &[RelayPosition],
    battery: &BatteryState,
    rng: &mut R,
) -> Option<usize> {
    let eligible = |i: &usize| !scheme.battery_aware() || battery.get(*i) == Battery::Charged;
    if scheme.closest() {
        // strict comparison keeps the lowest index on ties
        (0..relays.len())
            .filter(eligible)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if relays[b].distance <= relays[i].distance => Some(b),
                _ => Some(i),
            })
    } else if scheme.battery_aware() {
        let n = battery.charged_count();
        if n == 0 {
            return None;
        }
        let k = rng.random_range(0..n);
        (0..relays.len()).filter(eligible).nth(k)
    } else if relays.is_empty() {
        None
    } else {
        Some(rng.random_range(0..relays.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::replication_rng;

    fn topo(d: &[f64]) -> TopologyRealization {
        TopologyRealization {
            relays: d
                .iter()
                .map(|&distance| RelayPosition { distance, angle: 0.0 })
                .collect(),
            destination_distance: 6.0,
        }
    }

    fn budget() -> LinkBudget {
        LinkBudget::new(&NetworkConfig::default(), false)
    }

    #[test]
    fn no_relays_is_outage_for_every_scheme() {
        let mut rng = replication_rng(1, 0);
        for s in SchemeId::ALL {
            let mut b = BatteryState::empty(0);
            let o = run_slot(s, &topo(&[]), &mut b, &budget(), &mut rng);
            assert!(o.outage);
            assert_eq!(o.selected, Selection::None);
        }
    }

    #[test]
    fn battery_aware_with_all_empty_is_outage_and_harvests() {
        let mut rng = replication_rng(2, 0);
        let t = topo(&[0.1, 0.2, 0.3]);
        for s in [SchemeId::Rrsb, SchemeId::Rcsb, SchemeId::Db] {
            let mut b = BatteryState::empty(3);
            let o = run_slot(s, &t, &mut b, &budget(), &mut rng);
            assert!(o.outage && !o.first_hop_ok);
            assert_eq!(o.selected, Selection::None);
        }
        // Ψ/ζ = 0.1 at distance ≈ 0 charges with probability e^(-0.1) per slot
        let mut charged = 0;
        for _ in 0..200 {
            let mut b = BatteryState::empty(3);
            run_slot(SchemeId::Rrsb, &t, &mut b, &budget(), &mut rng);
            charged += b.charged_count();
        }
        assert!(charged > 480, "{charged}");
    }

    #[test]
    fn closest_picks_lowest_index_on_ties() {
        let mut rng = replication_rng(3, 0);
        let t = topo(&[0.5, 0.2, 0.2, 0.9]);
        let mut b = BatteryState::from_vec(alloc::vec![Battery::Charged; 4]);
        let o = run_slot(SchemeId::Rcs, &t, &mut b, &budget(), &mut rng);
        assert_eq!(o.selected, Selection::Relay(1));
        assert_eq!(b.get(1), Battery::Empty);
        assert_eq!(b.get(0), Battery::Charged);
    }

    #[test]
    fn rcsb_skips_empty_nearest() {
        let mut rng = replication_rng(4, 0);
        let t = topo(&[0.1, 0.4, 0.3]);
        let mut b = BatteryState::from_vec(alloc::vec![Battery::Empty, Battery::Charged, Battery::Charged]);
        let o = run_slot(SchemeId::Rcsb, &t, &mut b, &budget(), &mut rng);
        assert_eq!(o.selected, Selection::Relay(2));
    }

    #[test]
    fn db_drains_every_charged_relay() {
        let mut rng = replication_rng(5, 0);
        let t = topo(&[2.9, 2.9, 2.9]);
        let mut b = BatteryState::from_vec(alloc::vec![Battery::Charged, Battery::Empty, Battery::Charged]);
        let o = run_slot(SchemeId::Db, &t, &mut b, &budget(), &mut rng);
        assert_eq!(o.selected, Selection::Group(alloc::vec![0, 2]));
        assert_eq!(b.get(0), Battery::Empty);
        assert_eq!(b.get(2), Battery::Empty);
    }

    #[test]
    fn db_with_one_relay_matches_single_selection_draw_for_draw() {
        // with one charged relay DB and closest selection consume the same draws in order
        let t = topo(&[1.3]);
        let bud = budget();
        let mut r1 = replication_rng(6, 0);
        let mut r2 = replication_rng(6, 0);
        for _ in 0..2000 {
            let mut a = BatteryState::from_vec(alloc::vec![Battery::Charged]);
            let mut b = a.clone();
            let oa = run_slot(SchemeId::Db, &t, &mut a, &bud, &mut r1);
            let ob = single_selection(&t, &mut b, &bud, &mut r2);
            assert_eq!(oa.outage, ob.outage);
            assert_eq!(a, b);
        }
    }

    fn single_selection<R: Rng>(
        t: &TopologyRealization,
        b: &mut BatteryState,
        bud: &LinkBudget,
        rng: &mut R,
    ) -> SlotOutcome {
        let xi = bud.xi;
        let alpha = bud.alpha;
        play(SchemeId::Rcs, t, b, bud, rng, |p, rng| {
            let h: f64 = rng.sample(Exp1);
            h / bounded_path_loss(p.distance, alpha) >= xi
        })
    }

    #[test]
    fn selected_empty_relay_still_harvests_under_rrs() {
        let mut rng = replication_rng(7, 0);
        let t = topo(&[0.0]);
        let mut charged = 0;
        for _ in 0..1000 {
            let mut b = BatteryState::empty(1);
            let o = run_slot(SchemeId::Rrs, &t, &mut b, &budget(), &mut rng);
            assert!(o.outage);
            assert_eq!(o.selected, Selection::Relay(0));
            charged += b.charged_count();
        }
        // P(|h|² ≥ 0.1) = e^(-0.1) ≈ 0.905
        assert!((charged as f64 / 1000.0 - (-0.1f64).exp()).abs() < 0.03);
    }

    #[test]
    fn interference_mean_matches_campbell() {
        let mc = MultiCellConfig::new(NetworkConfig::default(), 0.005).unwrap();
        let s = InterferenceSampler::for_cell(&mc).unwrap();
        let spec = InterferenceSpec::for_cell(&mc);
        let mut rng = replication_rng(8, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - spec.mean()).abs() < 4.0 * se, "{mean} vs {}", spec.mean());
    }

    #[test]
    fn multicell_rejects_db() {
        let mc = MultiCellConfig::new(NetworkConfig::default(), 0.005).unwrap();
        let s = InterferenceSampler::for_cell(&mc).unwrap();
        let bud = LinkBudget::new(mc.base(), true);
        let mut b = BatteryState::empty(0);
        let e = run_slot_multicell(
            SchemeId::Db,
            &topo(&[]),
            &mut b,
            &bud,
            &s,
            1.0,
            &mut replication_rng(1, 1),
        );
        assert_eq!(e, Err(Error::UnsupportedScheme(SchemeId::Db)));
    }
}
