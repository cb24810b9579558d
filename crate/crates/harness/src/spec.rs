//! Experiment specification: a flat `key = value` file, overridable key by
//! key from the command line.
//!
//! ```text
//! # two-party run under a substituted attack
//! mode = two_party
//! d = 2
//! n = 512
//! trials = 20
//! channel = substituted
//! out = summary.json
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use teleqkd::channel::ChannelModel;
use teleqkd::protocol::{ChainConfig, CheckMode, SessionConfig, DEFAULT_ABORT_THRESHOLD};

use crate::error::HarnessError;

/// Every key the file and the flags accept.
pub const KEYS: [&str; 16] = [
    "mode",
    "d",
    "m",
    "n",
    "trials",
    "seed",
    "channel",
    "noise_p",
    "hops",
    "noisy_hop",
    "threshold",
    "check_mode",
    "out",
    "csv",
    "transcript",
    "transcript_trial",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    TwoParty,
    PreCheck,
    ThirdPartyUntrusted,
    ThirdPartyTrusted,
    Chain,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TwoParty => "two_party",
            Mode::PreCheck => "pre_check",
            Mode::ThirdPartyUntrusted => "third_party_untrusted",
            Mode::ThirdPartyTrusted => "third_party_trusted",
            Mode::Chain => "chain",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Mode::TwoParty,
            Mode::PreCheck,
            Mode::ThirdPartyUntrusted,
            Mode::ThirdPartyTrusted,
            Mode::Chain,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| {
            format!("unknown mode `{s}` (two_party, pre_check, third_party_untrusted, third_party_trusted, chain)")
        })
    }
}

/// Channel names accepted by `channel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Ideal,
    Depolarizing,
    Loss,
    /// Eve keeps the genuine half and forwards half of a Haar-random state.
    Substituted,
    /// Purified attack with a controlled-shift coupling, ancilla read in the
    /// computational basis.
    Cnot,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Ideal => "ideal",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Loss => "loss",
            ChannelKind::Substituted => "substituted",
            ChannelKind::Cnot => "cnot",
        }
    }

    fn model(self, d: usize, p: f64) -> ChannelModel {
        match self {
            ChannelKind::Ideal => ChannelModel::Ideal,
            ChannelKind::Depolarizing => ChannelModel::Depolarizing { p },
            ChannelKind::Loss => ChannelModel::Loss { p },
            ChannelKind::Substituted => ChannelModel::substituted(d),
            ChannelKind::Cnot => ChannelModel::cnot_attack(d),
        }
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal" => Ok(ChannelKind::Ideal),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "loss" => Ok(ChannelKind::Loss),
            "substituted" => Ok(ChannelKind::Substituted),
            "cnot" => Ok(ChannelKind::Cnot),
            _ => Err(format!(
                "unknown channel `{s}` (ideal, depolarizing, loss, substituted, cnot)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub channel: ChannelKind,
    pub noise_p: f64,
    /// Chain length; only read in chain mode.
    pub hops: usize,
    /// In chain mode, put the channel on this link only (`0..hops`) and
    /// leave the others ideal.
    pub noisy_hop: Option<usize>,
    pub threshold: f64,
    pub check_mode: CheckMode,
    pub output_path: PathBuf,
    pub csv_path: Option<PathBuf>,
    pub transcript_path: Option<PathBuf>,
    pub transcript_trial: usize,
}

/// Raw `key -> value` settings, later sources overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses the flat file format. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Settings, HarnessError> {
        let mut settings = Settings::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::config(
                    "config",
                    format!("line {}: expected `key = value`", number + 1),
                ));
            };
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(HarnessError::config(key, "unknown setting"));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn parsed<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, HarnessError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| HarnessError::config(key, format!("`{v}`: {e}"))),
        }
    }
}

impl ExperimentSpec {
    pub fn from_settings(s: &Settings) -> Result<ExperimentSpec, HarnessError> {
        let mode: Mode = s.parsed("mode", Mode::TwoParty)?;
        let default_check = match mode {
            Mode::PreCheck => "pre_measurement",
            _ => "final_digits",
        };
        let check_mode = match s.get("check_mode").unwrap_or(default_check) {
            "final_digits" => CheckMode::FinalDigits,
            "pre_measurement" => CheckMode::PreMeasurement,
            other => {
                return Err(HarnessError::config(
                    "check_mode",
                    format!("`{other}` (final_digits or pre_measurement)"),
                ))
            }
        };
        let spec = ExperimentSpec {
            mode,
            d: s.parsed("d", 2)?,
            m: s.parsed("m", 2)?,
            n: s.parsed("n", 16)?,
            trials: s.parsed("trials", 1)?,
            master_seed: s.parsed("seed", 0)?,
            channel: s.parsed("channel", ChannelKind::Ideal)?,
            noise_p: s.parsed("noise_p", 0.0)?,
            hops: s.parsed("hops", 1)?,
            noisy_hop: match s.get("noisy_hop") {
                None => None,
                Some(_) => Some(s.parsed("noisy_hop", 0)?),
            },
            threshold: s.parsed("threshold", DEFAULT_ABORT_THRESHOLD)?,
            check_mode,
            output_path: s
                .get("out")
                .map(PathBuf::from)
                .ok_or_else(|| HarnessError::config("out", "an output path is required"))?,
            csv_path: s.get("csv").map(PathBuf::from),
            transcript_path: s.get("transcript").map(PathBuf::from),
            transcript_trial: s.parsed("transcript_trial", 0)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        if self.transcript_trial >= self.trials {
            return Err(HarnessError::config(
                "transcript_trial",
                format!("{} is not below trials = {}", self.transcript_trial, self.trials),
            ));
        }
        match self.mode {
            Mode::PreCheck if self.check_mode != CheckMode::PreMeasurement => {
                return Err(HarnessError::config(
                    "check_mode",
                    "pre_check mode measures before teleporting",
                ));
            }
            Mode::TwoParty if self.check_mode != CheckMode::FinalDigits => {
                return Err(HarnessError::config(
                    "check_mode",
                    "use mode = pre_check for pre-measurement checks",
                ));
            }
            Mode::ThirdPartyTrusted | Mode::ThirdPartyUntrusted if self.d != 2 => {
                return Err(HarnessError::config("d", "third-party modes are defined for d = 2"));
            }
            Mode::Chain => {
                if self.hops == 0 {
                    return Err(HarnessError::config("hops", "must be at least 1"));
                }
                if let Some(h) = self.noisy_hop {
                    if h >= self.hops {
                        return Err(HarnessError::config(
                            "noisy_hop",
                            format!("{h} is not below hops = {}", self.hops),
                        ));
                    }
                }
            }
            _ => {}
        }
        if self.noisy_hop.is_some() && self.mode != Mode::Chain {
            return Err(HarnessError::config("noisy_hop", "only meaningful in chain mode"));
        }
        let p_ok = match self.channel {
            ChannelKind::Depolarizing => (0.0..=1.0).contains(&self.noise_p),
            ChannelKind::Loss => (0.0..1.0).contains(&self.noise_p),
            _ => true,
        };
        if !p_ok {
            return Err(HarnessError::config(
                "noise_p",
                format!("{} is not a valid {} probability", self.noise_p, self.channel.as_str()),
            ));
        }
        self.session(0).validate().map_err(HarnessError::from)?;
        Ok(())
    }

    /// Session configuration for one trial.
    pub fn session(&self, seed: u64) -> SessionConfig {
        SessionConfig {
            d: self.d,
            m: self.m,
            n: self.n,
            abort_threshold: self.threshold,
            check_mode: self.check_mode,
            seed,
            channel: self.channel.model(self.d, self.noise_p),
        }
    }

    pub fn chain(&self, seed: u64) -> ChainConfig {
        let base = self.session(seed);
        let per_hop_channel = (0..self.hops)
            .map(|h| match self.noisy_hop {
                Some(noisy) if noisy != h => ChannelModel::Ideal,
                _ => base.channel.clone(),
            })
            .collect();
        ChainConfig {
            base,
            hops: self.hops,
            per_hop_channel,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(text: &str) -> Settings {
        Settings::parse(text).unwrap()
    }

    #[test]
    fn defaults_fill_gaps() {
        let spec = ExperimentSpec::from_settings(&settings("out = x.json")).unwrap();
        assert_eq!(spec.mode, Mode::TwoParty);
        assert_eq!((spec.d, spec.m, spec.n, spec.trials), (2, 2, 16, 1));
        assert_eq!(spec.threshold, 0.05);
        assert_eq!(spec.check_mode, CheckMode::FinalDigits);
    }

    #[test]
    fn comments_and_dashes() {
        let s = settings("# header\nnoise-p = 0.25 # trailing\n\nout=a\nmode = pre_check\n");
        let spec = ExperimentSpec::from_settings(&s).unwrap();
        assert_eq!(spec.noise_p, 0.25);
        assert_eq!(spec.check_mode, CheckMode::PreMeasurement);
    }

    #[test]
    fn later_values_win() {
        let mut base = settings("d = 3\nout = a");
        base.merge(&settings("d = 5"));
        assert_eq!(ExperimentSpec::from_settings(&base).unwrap().d, 5);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("out = a\nd = 4", "d"),
            ("out = a\nd = two", "d"),
            ("out = a\ntrials = 0", "trials"),
            ("out = a\nmode = chain\nhops = 0", "hops"),
            ("out = a\nchannel = fog", "channel"),
            ("out = a\nmode = third_party_trusted\nd = 3", "d"),
            ("out = a\nthreshold = 2", "threshold"),
            ("out = a\nm = 9", "m"),
            ("d = 2", "out"),
            ("out = a\nchannel = loss\nnoise_p = 1", "noise_p"),
        ];
        for (text, field) in cases {
            match ExperimentSpec::from_settings(&settings(text)) {
                Err(HarnessError::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            Settings::parse("colour = red"),
            Err(HarnessError::Config { ref field, .. }) if field == "colour"
        ));
    }

    #[test]
    fn noisy_hop_isolates_one_link() {
        let s = settings("out = a\nmode = chain\nhops = 3\nnoisy_hop = 1\nchannel = depolarizing\nnoise_p = 0.2");
        let chain = ExperimentSpec::from_settings(&s).unwrap().chain(0);
        assert_eq!(chain.per_hop_channel[0], ChannelModel::Ideal);
        assert_eq!(chain.per_hop_channel[1], ChannelModel::Depolarizing { p: 0.2 });
        assert_eq!(chain.per_hop_channel[2], ChannelModel::Ideal);
    }
}
