//! Deterministic discrete-event simulation: latency models, probes, the
//! event loop and characterization runs.
//!
//! Every node reads the one global simulation clock, so clock skew between
//! talkers, bridges and listeners is exactly zero by construction.

pub mod characterize;
pub mod distribution;
pub mod probe;
pub mod profile;
pub mod run;

pub use characterize::{
    characterize, characterize_sized, CalibrationCheck, CharacterizationReport,
};
pub use distribution::{
    sample_at, substream_rng, Distribution, DistributionError, DistributionKind,
};
pub use probe::{PointProbe, ProbeConfig, ProbeError, ProbeMethod, TsPoint};
pub use profile::{LatencyModel, PlatformProfile};
pub use run::{run, run_seeds, EngineError, FaultSpec, SimInput};
