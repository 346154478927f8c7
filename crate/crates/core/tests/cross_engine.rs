//! Simulator against closed forms at a few points, at a scale that runs in seconds.

use wpcrelay_core::multicell::outage_multicell;
use wpcrelay_core::outage::{outage, outage_db};
use wpcrelay_core::sim::{
    estimate_outage, estimate_outage_multicell, estimate_steady_state, simulate_replication, Ensemble, SimConfig, Tally,
};
use wpcrelay_core::steady_state::{charge_probability, steady_state};
use wpcrelay_core::{MultiCellConfig, NetworkConfig, SchemeId};

fn sim(draws: u64, slots: u64) -> SimConfig {
    SimConfig {
        seed: 11,
        burn_in_slots: 500,
        measure_slots: slots,
        topology_draws: draws,
        ..SimConfig::default()
    }
}

fn fig4(lambda: f64, db: f64) -> NetworkConfig {
    NetworkConfig {
        lambda,
        ..NetworkConfig::default()
    }
    .with_power_db(db)
}

#[test]
fn single_relay_schemes_match_at_20db() {
    let c = fig4(1.0, 20.0);
    for scheme in SchemeId::SINGLE_RELAY {
        let a = outage(scheme, &c).unwrap().value;
        let e = estimate_outage(scheme, &c, &sim(40, 5000)).unwrap();
        let se = e.stderr.unwrap();
        assert!(
            (e.value - a).abs() <= 3.0 * se,
            "{scheme}: sim {} analytic {a} se {se}",
            e.value
        );
    }
}

#[test]
fn clamped_db_matches_series() {
    let c = fig4(0.5, 20.0);
    let s = SimConfig {
        exact_relay_dest_distance: false,
        ..sim(40, 5000)
    };
    let a = outage_db(&c, 60, 1e-12).unwrap().estimate.value;
    let e = estimate_outage(SchemeId::Db, &c, &s).unwrap();
    assert!(
        (e.value - a).abs() <= 3.0 * e.stderr.unwrap(),
        "sim {} analytic {a}",
        e.value
    );
}

#[test]
fn multicell_rcsb_matches() {
    let base = NetworkConfig {
        lambda: 0.5,
        rate: 0.001,
        ..NetworkConfig::default()
    }
    .with_power_db(20.0);
    let mc = MultiCellConfig::new(base, 0.005).unwrap();
    let a = outage_multicell(SchemeId::Rcsb, &mc).unwrap().value;
    let e = estimate_outage_multicell(SchemeId::Rcsb, &mc, &sim(20, 5000)).unwrap();
    assert!(
        (e.value - a).abs() <= 3.0 * e.stderr.unwrap(),
        "sim {} analytic {a}",
        e.value
    );
}

#[test]
fn charge_transitions_are_binomial_around_pi0() {
    // under the mobile ensemble each harvest attempt sees a fresh position and fading
    let c = fig4(1.0, 30.0);
    let t = Tally::total(
        &(0..10)
            .map(|i| simulate_replication(SchemeId::Rrsb, &c, &sim(10, 3000), i).unwrap())
            .collect::<Vec<_>>(),
    );
    let p = charge_probability(&c);
    let se = (p * (1.0 - p) / t.empty_visits as f64).sqrt();
    assert!((t.pi0() - p).abs() <= 3.0 * se, "{} vs {p}", t.pi0());
}

#[test]
fn steady_state_eta1_tracks_closed_form() {
    let c = fig4(1.0, 30.0);
    for scheme in [SchemeId::Rrs, SchemeId::Db] {
        let e = estimate_steady_state(scheme, &c, &sim(40, 3000)).unwrap();
        let a = steady_state(scheme, &c).unwrap().eta1;
        assert!(
            (e.eta1 - a).abs() <= 3.0 * e.eta1_stderr + 1e-3,
            "{scheme}: {} vs {a}",
            e.eta1
        );
    }
}

#[test]
fn outage_is_certain_without_power() {
    let c = NetworkConfig {
        power: 1e-9,
        ..NetworkConfig::default()
    };
    for scheme in SchemeId::ALL {
        assert_eq!(estimate_outage(scheme, &c, &sim(2, 500)).unwrap().value, 1.0);
    }
}

#[test]
fn static_ensemble_is_reproducible() {
    let c = fig4(0.5, 30.0);
    let s = SimConfig {
        ensemble: Ensemble::Static,
        ..sim(8, 1000)
    };
    let a = estimate_outage(SchemeId::Rcs, &c, &s).unwrap();
    let b = estimate_outage(SchemeId::Rcs, &c, &s).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert!((0.0..=1.0).contains(&a.value));
}
