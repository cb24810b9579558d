//! Runs seeded trial ensembles and writes their summaries.
//!
//! Summary document (JSON, keys sorted):
//!
//! ```text
//! {
//!   "aggregates": { "abort_fraction", "agreement_fraction", "mean_error",
//!                   "mean_eve_match", "stddev_error" },
//!   "format": "teleqkd-summary", "version": 1,
//!   "spec": { "channel", "check_mode", "d", "hops", "m", "master_seed",
//!             "mode", "n", "noise_p", "noisy_hop", "threshold", "trials" },
//!   "trials": [ { "aborted", "agreement", "error_rate", "eve_match",
//!                 "recycled", "seed", "trial" }, ... ]
//! }
//! ```
//!
//! Reals are written with 17 significant digits, so they read back to the
//! same `f64` and the aggregates can be recomputed from the trial rows
//! bit for bit.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Map, Number, Value};
use teleqkd::channel::attack_report;
use teleqkd::protocol::{run_chain, run_pre_check, run_third_party, run_two_party, CheckMode, KeyResult};
use teleqkd::Rng;

use crate::error::HarnessError;
use crate::spec::{ExperimentSpec, Mode};

pub const CSV_HEADER: [&str; 7] = [
    "trial",
    "seed",
    "error_rate",
    "aborted",
    "agreement",
    "eve_match",
    "recycled",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub error_rate: f64,
    pub aborted: bool,
    /// Keys were produced and are identical.
    pub agreement: bool,
    /// Fraction of Alice's digits Eve decoded correctly, `1/d` when she
    /// could not decode at all.
    pub eve_match: f64,
    pub recycled: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub mean_error: f64,
    /// Population standard deviation.
    pub stddev_error: f64,
    pub abort_fraction: f64,
    pub agreement_fraction: f64,
    pub mean_eve_match: f64,
}

impl Aggregates {
    /// Sums run in trial order, so the result depends only on the records.
    pub fn from_records(records: &[TrialRecord]) -> Aggregates {
        let n = records.len() as f64;
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        let mean_error = mean(&|r| r.error_rate);
        let variance = mean(&|r| (r.error_rate - mean_error).powi(2));
        Aggregates {
            mean_error,
            stddev_error: variance.sqrt(),
            abort_fraction: mean(&|r| f64::from(u8::from(r.aborted))),
            agreement_fraction: mean(&|r| f64::from(u8::from(r.agreement))),
            mean_eve_match: mean(&|r| r.eve_match),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

/// Scientific notation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn real(x: f64) -> Value {
    Value::Number(Number::from_str(&format_real(x)).expect("formatted finite real"))
}

/// Seed of trial `index`, derived from the master seed.
pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    Rng::new(master_seed).child_seed(index as u64)
}

/// Runs one trial of `spec` with its derived seed.
pub fn run_trial(spec: &ExperimentSpec, index: usize) -> Result<(TrialRecord, KeyResult), HarnessError> {
    let seed = trial_seed(spec.master_seed, index);
    let result = match spec.mode {
        Mode::TwoParty => run_two_party(&spec.session(seed)),
        Mode::PreCheck => run_pre_check(&spec.session(seed)),
        Mode::ThirdPartyUntrusted => run_third_party(&spec.session(seed), false),
        Mode::ThirdPartyTrusted => run_third_party(&spec.session(seed), true),
        Mode::Chain => run_chain(&spec.chain(seed)),
    }?;
    let report = attack_report(&result, result.eve_digits.as_deref());
    let record = TrialRecord {
        trial: index,
        seed,
        error_rate: result.observed_error_rate,
        aborted: result.aborted,
        agreement: result.keys_agree(),
        eve_match: report.eve_alice_match_rate,
        recycled: result.recycled_pairs,
    };
    Ok((record, result))
}

/// Runs every trial (in parallel) and aggregates them in trial order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary, HarnessError> {
    spec.validate()?;
    let records = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, i).map(|(record, _)| record))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregates = Aggregates::from_records(&records);
    Ok(ExperimentSummary {
        spec: spec.clone(),
        records,
        aggregates,
    })
}

impl ExperimentSummary {
    pub fn to_json(&self) -> String {
        let s = &self.spec;
        let spec = json!({
            "mode": s.mode.as_str(),
            "d": s.d,
            "m": s.m,
            "n": s.n,
            "trials": s.trials,
            "master_seed": s.master_seed,
            "channel": s.channel.as_str(),
            "noise_p": real(s.noise_p),
            "hops": s.hops,
            "noisy_hop": s.noisy_hop,
            "threshold": real(s.threshold),
            "check_mode": match s.check_mode {
                CheckMode::FinalDigits => "final_digits",
                CheckMode::PreMeasurement => "pre_measurement",
            },
        });
        let a = &self.aggregates;
        let aggregates = json!({
            "mean_error": real(a.mean_error),
            "stddev_error": real(a.stddev_error),
            "abort_fraction": real(a.abort_fraction),
            "agreement_fraction": real(a.agreement_fraction),
            "mean_eve_match": real(a.mean_eve_match),
        });
        let trials: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "trial": r.trial,
                    "seed": r.seed,
                    "error_rate": real(r.error_rate),
                    "aborted": r.aborted,
                    "agreement": r.agreement,
                    "eve_match": real(r.eve_match),
                    "recycled": r.recycled,
                })
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("format".into(), "teleqkd-summary".into());
        doc.insert("version".into(), 1.into());
        doc.insert("spec".into(), spec);
        doc.insert("aggregates".into(), aggregates);
        doc.insert("trials".into(), Value::Array(trials));
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                format_real(r.error_rate),
                r.aborted.to_string(),
                r.agreement.to_string(),
                format_real(r.eve_match),
                r.recycled.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Writes the classical transcript of trial `trial_index`, one message per
/// line.
pub fn emit_transcript(spec: &ExperimentSpec, trial_index: usize, path: &Path) -> Result<(), HarnessError> {
    if trial_index >= spec.trials {
        return Err(HarnessError::config(
            "transcript_trial",
            format!("{trial_index} is not below trials = {}", spec.trials),
        ));
    }
    let (_, result) = run_trial(spec, trial_index)?;
    write(path, &result.transcript.to_text())
}

/// Writes the summary, and the CSV and transcript when requested.
pub fn write_outputs(summary: &ExperimentSummary) -> Result<(), HarnessError> {
    let spec = &summary.spec;
    write(&spec.output_path, &summary.to_json())?;
    if let Some(csv) = &spec.csv_path {
        write(csv, &summary.to_csv())?;
    }
    if let Some(transcript) = &spec.transcript_path {
        emit_transcript(spec, spec.transcript_trial, transcript)?;
    }
    Ok(())
}
