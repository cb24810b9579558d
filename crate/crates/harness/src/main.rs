use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use teleqkd_harness::{run_experiment, write_outputs, ExperimentSpec, HarnessError, Settings};

/// Run seeded ensembles of key-distribution sessions.
///
/// Settings come from an optional `key = value` file; flags override it.
#[derive(Debug, Parser)]
#[command(name = "teleqkd", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// two_party, pre_check, third_party_untrusted, third_party_trusted or chain.
    #[arg(long)]
    mode: Option<String>,
    /// Qudit dimension (prime).
    #[arg(short, long)]
    d: Option<String>,
    /// Number of mutually unbiased bases.
    #[arg(short, long)]
    m: Option<String>,
    /// Key length in dits.
    #[arg(short, long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// ideal, depolarizing, loss, substituted or cnot.
    #[arg(long)]
    channel: Option<String>,
    /// Depolarizing or loss probability.
    #[arg(long)]
    noise_p: Option<String>,
    #[arg(long)]
    hops: Option<String>,
    /// Chain link that carries the channel; the others are ideal.
    #[arg(long)]
    noisy_hop: Option<String>,
    /// Abort when the check error rate exceeds this.
    #[arg(long)]
    threshold: Option<String>,
    /// final_digits or pre_measurement.
    #[arg(long)]
    check_mode: Option<String>,
    /// Summary output path.
    #[arg(long)]
    out: Option<String>,
    /// Per-trial CSV output path.
    #[arg(long)]
    csv: Option<String>,
    /// Transcript output path.
    #[arg(long)]
    transcript: Option<String>,
    /// Trial whose transcript is written.
    #[arg(long)]
    transcript_trial: Option<String>,
}

impl Cli {
    fn settings(&self) -> Result<Settings, HarnessError> {
        let mut settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::config("config", format!("{}: {e}", path.display())))?;
                Settings::parse(&text)?
            }
            None => Settings::default(),
        };
        let flags = [
            ("mode", &self.mode),
            ("d", &self.d),
            ("m", &self.m),
            ("n", &self.n),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("channel", &self.channel),
            ("noise_p", &self.noise_p),
            ("hops", &self.hops),
            ("noisy_hop", &self.noisy_hop),
            ("threshold", &self.threshold),
            ("check_mode", &self.check_mode),
            ("out", &self.out),
            ("csv", &self.csv),
            ("transcript", &self.transcript),
            ("transcript_trial", &self.transcript_trial),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.set(key, v)?;
            }
        }
        Ok(settings)
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let spec = ExperimentSpec::from_settings(&cli.settings()?)?;
    let summary = run_experiment(&spec)?;
    write_outputs(&summary)?;
    let a = &summary.aggregates;
    println!(
        "{} trials: mean error {:.4} (sd {:.4}), aborted {:.3}, agreement {:.3}",
        spec.trials, a.mean_error, a.stddev_error, a.abort_fraction, a.agreement_fraction
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("teleqkd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
