//! Batch experiment runner for the `teleqkd` simulator.
//!
//! An [`ExperimentSpec`] names a protocol mode, session parameters, a
//! channel and a number of trials. Each trial gets a seed derived from the
//! master seed, trials run in parallel, and results are reported in trial
//! order, so a spec and its master seed determine every output byte.

pub mod error;
pub mod run;
pub mod spec;

pub use error::HarnessError;
pub use run::{emit_transcript, run_experiment, run_trial, write_outputs, Aggregates, ExperimentSummary, TrialRecord};
pub use spec::{ChannelKind, ExperimentSpec, Mode, Settings};
