//! Link- and protocol-level simulation of control planes for
//! RIS-aided uplink.
//!
//! - [`channel`]: cascaded Rayleigh channel, phase codebooks and SNR.
//! - [`control`]: the four-message control catalog and its reliability.
//! - [`protocol`]: INI/ALG/SET/PAY frame timelines and causality checks.
//! - [`metrics`]: Monte Carlo goodput sweeps and reliability grids.

pub mod channel;
pub mod control;
mod error;
pub mod metrics;
pub mod protocol;

pub use channel::{
    effective_snr, make_codebook, make_codebook_with, optimal_config, sample_realization, BswConstruction,
    ChannelRealization, Codebook, CodebookRole, RisConfiguration,
};
pub use control::{
    control_reliability, message_catalog, min_snr_for_reliability, msg_success_prob, CatalogParams,
    ControlChannelState, ControlMessage, ControlMode, Recipient, Scheme, SignalingPhase, SnrAxis, SnrSearch,
};
pub use error::{Error, Result};
pub use metrics::{
    crossover_frame, goodput, goodput_sweep, reliability_grid, GoodputResult, ReliabilityCell,
    SimulationSetup,
};
pub use protocol::{
    build_frame, overhead_ms, validate_causality, CausalityViolation, ChannelUsage, FramePlan, Phase,
    PhaseKind, SchemeParams,
};
