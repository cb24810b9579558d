//! Simulation of a teleportation-based quantum key distribution scheme over
//! qudits that needs no basis sifting and recycles its entanglement.
//!
//! Layers, bottom-up:
//!
//! - [`state`]: dense pure-state engine over labeled qudits.
//! - [`bases`]: generalized Paulis, mutually unbiased bases, Bell and GHZ bases.
//! - [`teleport`]: Bell-basis teleportation, byproduct correction, recycling.
//! - [`channel`]: channel models, eavesdropper attacks and detection statistics.
//! - [`protocol`]: executable two-party, pre-check, third-party and multi-hop
//!   sessions with full classical transcripts.

pub mod bases;
pub mod channel;
pub mod error;
pub mod protocol;
pub mod rng;
pub mod state;
pub mod teleport;

pub use error::{Error, Result};
pub use rng::Rng;
pub use state::{fidelity, tensor, Amplitude, MeasurementBasis, StateVector, Subsystem, UnitaryOp};
