//! Frequency-entangled photon teleportation on discretized spectral grids.
//!
//! The crate models a Gaussian EPR photon pair, an input photon, the
//! entangled time/frequency measurement between photons 1 and 3, and the
//! resulting conditional state of photon 2.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dense;
pub mod error;
pub mod grid;
pub mod povm;
pub mod states;
pub mod sweep;
pub mod teleport;

pub use config::{ConfigError, Pairing, SweepConfig};
pub use error::{Error, Result};
pub use grid::{inner_product, norm_sqr, Fourier, FrequencyGrid, TimeGrid};
pub use num_complex::Complex64;
pub use povm::{MeasurementOutcome, OutcomeGrid, OutcomeIndex};
pub use states::{normalize, BiphotonAmplitude, GaussianEprParams, WavePacket};
pub use sweep::{run_sweep, verify, CheckResult, RecordFlag, SweepRecord, VerificationReport};
pub use teleport::{
    channel_metrics, fidelity, ideal_limit_state, reconstruction_map, teleport_once, AcceptanceWindow,
    ChannelMetrics, MirrorConvention, OutcomeMap, Protocol, Reconstruction, ReconstructionParams,
    TeleportResult,
};
