//! Runs simulator replications, in parallel when asked, and merges them in index order.

use rayon::prelude::*;
use wpcrelay_core::multicell::{outage_multicell, outage_multicell_floor};
use wpcrelay_core::outage::{
    outage_asymptote_moderate, outage_db_asymptote, outage_floor, outage_with, OutageEstimate,
};
use wpcrelay_core::sim::{simulate_replication, simulate_replication_multicell, SimConfig, SteadyStateEstimate, Tally};
use wpcrelay_core::{EstimateMode, MultiCellConfig, NetworkConfig, SchemeId};

use crate::config::Scenario;

fn collect<F>(draws: u64, parallel: bool, run: F) -> wpcrelay_core::Result<Vec<Tally>>
where
    F: Fn(u64) -> wpcrelay_core::Result<Tally> + Sync,
{
    if parallel {
        (0..draws).into_par_iter().map(&run).collect()
    } else {
        (0..draws).map(run).collect()
    }
}

pub fn single_cell_tallies(
    scheme: SchemeId,
    network: &NetworkConfig,
    sim: &SimConfig,
    parallel: bool,
) -> wpcrelay_core::Result<Vec<Tally>> {
    collect(sim.topology_draws, parallel, |i| {
        simulate_replication(scheme, network, sim, i)
    })
}

pub fn multicell_tallies(
    scheme: SchemeId,
    config: &MultiCellConfig,
    sim: &SimConfig,
    parallel: bool,
) -> wpcrelay_core::Result<Vec<Tally>> {
    collect(sim.topology_draws, parallel, |i| {
        simulate_replication_multicell(scheme, config, sim, i)
    })
}

pub fn simulate_outage(
    scheme: SchemeId,
    network: &NetworkConfig,
    sim: &SimConfig,
    parallel: bool,
) -> wpcrelay_core::Result<OutageEstimate> {
    Ok(Tally::total(&single_cell_tallies(scheme, network, sim, parallel)?).outage_estimate(scheme))
}

pub fn simulate_outage_multicell(
    scheme: SchemeId,
    config: &MultiCellConfig,
    sim: &SimConfig,
    parallel: bool,
) -> wpcrelay_core::Result<OutageEstimate> {
    Ok(Tally::total(&multicell_tallies(scheme, config, sim, parallel)?).outage_estimate(scheme))
}

pub fn simulate_steady_state(
    scheme: SchemeId,
    network: &NetworkConfig,
    sim: &SimConfig,
    parallel: bool,
) -> wpcrelay_core::Result<SteadyStateEstimate> {
    Ok(SteadyStateEstimate::from_tallies(&single_cell_tallies(
        scheme, network, sim, parallel,
    )?))
}

/// One outage number for `scheme` in `mode`.
///
/// In asymptotic mode RRS/RCS use the moderate-SNR expansion, DB its high-SNR
/// Bessel form, and RRSB/RCSB (and every multi-cell scheme) the outage floor.
pub fn evaluate(scheme: SchemeId, mode: EstimateMode, scenario: &Scenario) -> anyhow::Result<OutageEstimate> {
    let net = &scenario.network;
    if let Some(mc) = scenario.multicell_config()? {
        let r = match mode {
            EstimateMode::Analytic => outage_multicell(scheme, &mc),
            EstimateMode::Asymptotic => outage_multicell_floor(scheme, &mc),
            EstimateMode::Simulated => simulate_outage_multicell(scheme, &mc, &scenario.sim, scenario.parallel),
        };
        return Ok(r?);
    }
    let r = match mode {
        EstimateMode::Analytic => outage_with(scheme, net, &scenario.analytic),
        EstimateMode::Asymptotic => match scheme {
            SchemeId::Rrs | SchemeId::Rcs => outage_asymptote_moderate(scheme, net),
            SchemeId::Db => outage_db_asymptote(net),
            SchemeId::Rrsb | SchemeId::Rcsb => outage_floor(scheme, net),
        },
        EstimateMode::Simulated => simulate_outage(scheme, net, &scenario.sim, scenario.parallel),
    };
    Ok(r?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_serial_tallies_match() {
        let sim = SimConfig {
            burn_in_slots: 50,
            measure_slots: 300,
            topology_draws: 6,
            ..SimConfig::default()
        };
        let net = NetworkConfig::default();
        let a = single_cell_tallies(SchemeId::Rcsb, &net, &sim, true).unwrap();
        let b = single_cell_tallies(SchemeId::Rcsb, &net, &sim, false).unwrap();
        assert_eq!(a, b);
    }
}
