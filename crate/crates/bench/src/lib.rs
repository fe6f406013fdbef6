//! Shared fixtures for the benchmarks.

use risctl_core::{ControlMessage, SchemeParams, SimulationSetup};

/// Default setup with `n_trials` trials under seed 1.
pub fn setup(n_trials: usize) -> SimulationSetup {
    SimulationSetup {
        n_trials,
        seed: 1,
        ..SimulationSetup::default()
    }
}

pub fn catalog(params: &SchemeParams) -> Vec<ControlMessage> {
    SimulationSetup::default()
        .catalog(params)
        .expect("default catalog is valid")
}
