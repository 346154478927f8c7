//! Slot-level Monte Carlo simulation of the protocol.

pub mod estimate;
pub mod rng;
pub mod slot;
pub mod topology;

pub use estimate::{
    estimate_outage, estimate_outage_multicell, estimate_steady_state, simulate_replication,
    simulate_replication_multicell, Ensemble, SimConfig, SteadyStateEstimate, Tally,
};
pub use rng::{replication_rng, SimRng};
pub use slot::{
    run_slot, run_slot_multicell, Battery, BatteryState, InterferenceSampler, LinkBudget, Selection, SlotOutcome,
};
pub use topology::{sample_topology, RelayPosition, TopologyRealization};
