//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use teleqkd::bases::{bell_pair, ghz_state, max_mubs, mub_family, pauli_matrix, plus_state, GHZ_OUTCOMES};
use teleqkd::channel::{
    attack_report, bb84_correspondence_check, controlled_shift, haar_state, haar_unitary, proposition_monte_carlo,
    ChannelModel,
};
use teleqkd::protocol::{
    run_chain, run_pre_check, run_third_party, run_two_party, ChainConfig, CheckMode, KeyResult, SessionConfig,
};
use teleqkd::teleport::{correction_op, ghz_measure, recycle_ghz, teleport, teleport_forced, Outcome, PairSign};
use teleqkd::{fidelity, Amplitude, Rng, StateVector, Subsystem};
use teleqkd_harness::{write_outputs, ExperimentSpec, Settings};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn within(observed: f64, expected: f64, n: usize, k: f64, what: &str) -> Result<(), String> {
    let tol = k * sigma(expected, n);
    if (observed - expected).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: {observed:.5} outside {expected:.5} ± {tol:.5}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: teleqkd::Error) -> String {
    err.to_string()
}

fn teleportation_round_trip() -> Check {
    let mut rng = Rng::new(1);
    let mut worst: f64 = 1.0;
    for d in [2, 3, 5] {
        let pair = bell_pair(d, "A", "B").map_err(e)?;
        for k in 0..d {
            for l in 0..d {
                for _ in 0..50 {
                    let input = haar_state(vec![Subsystem::new("A'", d)], &mut rng).map_err(e)?;
                    let out = teleport_forced(&input, &pair, k, l).map_err(e)?;
                    let fixed = out
                        .receiver_state
                        .apply_unitary(&correction_op(d, k, l).map_err(e)?, &["B"])
                        .map_err(e)?;
                    let f = fidelity(&fixed, &input.relabel("A'", "B").map_err(e)?).map_err(e)?;
                    worst = worst.min(f);
                }
            }
        }
    }
    ensure(worst >= 1.0 - 1e-9, || format!("worst fidelity {worst}"))?;
    Ok(format!(
        "3 dimensions, all outcomes x 50 inputs, worst fidelity 1 - {:.1e}",
        1.0 - worst
    ))
}

fn outcome_uniformity() -> Check {
    let d = 3;
    let samples = 10_000;
    let mut rng = Rng::new(2);
    let pair = bell_pair(d, "A", "B").map_err(e)?;
    let mut counts = vec![0usize; d * d];
    for _ in 0..samples {
        let input = haar_state(vec![Subsystem::new("A'", d)], &mut rng).map_err(e)?;
        let out = teleport(&input, &pair, &mut rng).map_err(e)?;
        counts[out.k * d + out.l] += 1;
    }
    let mut worst = 0.0f64;
    for (i, &c) in counts.iter().enumerate() {
        let freq = c as f64 / samples as f64;
        within(freq, 1.0 / 9.0, samples, 5.0, &format!("outcome {i}"))?;
        worst = worst.max((freq - 1.0 / 9.0).abs() / sigma(1.0 / 9.0, samples));
    }
    Ok(format!(
        "10^4 teleportations at d = 3, largest deviation {worst:.2} sigma"
    ))
}

fn mub_families() -> Check {
    let mut notes = Vec::new();
    for d in [2, 3, 5, 7] {
        let m = max_mubs(d);
        let family = mub_family(d, m).map_err(e)?;
        ensure(family.len() == d + 1, || format!("d = {d}: {} bases", family.len()))?;
        let mut worst = 0.0f64;
        for (i, a) in family.bases().iter().enumerate() {
            for b in &family.bases()[i + 1..] {
                for u in a.vectors() {
                    for v in b.vectors() {
                        let overlap: Amplitude = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                        worst = worst.max((overlap.norm_sqr() - 1.0 / d as f64).abs());
                    }
                }
            }
            worst = worst.max(a.orthonormality_deviation());
        }
        ensure(worst <= 1e-9, || format!("d = {d}: deviation {worst}"))?;
        notes.push(format!("d={d}:{m}"));
    }
    Ok(format!(
        "bases per dimension {}, all overlaps 1/d within 1e-9",
        notes.join(" ")
    ))
}

fn clean(r: &KeyResult, n: usize, recycled: usize, what: &str) -> Result<(), String> {
    ensure(!r.aborted && r.observed_error_rate == 0.0, || {
        format!("{what}: error {}", r.observed_error_rate)
    })?;
    ensure(r.alice_key == r.bob_key && r.alice_key.len() == n, || {
        format!("{what}: keys differ")
    })?;
    ensure(r.recycled_pairs == recycled, || {
        format!("{what}: recycled {} not {recycled}", r.recycled_pairs)
    })
}

fn noiseless_completeness() -> Check {
    let mut sessions = 0;
    let mut seed = 0;
    for d in [2, 3] {
        for m in [2, 3] {
            for n in [1, 16, 128] {
                seed += 1;
                let cfg = SessionConfig::new(d, m, n, seed);
                clean(&run_two_party(&cfg).map_err(e)?, n, 2 * n, "two-party")?;
                clean(&run_pre_check(&cfg).map_err(e)?, n, n, "pre-check")?;
                sessions += 2;
                for hops in 1..=5 {
                    let r = run_chain(&ChainConfig::uniform(cfg.clone(), hops)).map_err(e)?;
                    clean(&r, n, 2 * n * hops, &format!("chain hops={hops}"))?;
                    sessions += 1;
                }
                if d == 2 {
                    for trusted in [false, true] {
                        for mode in [CheckMode::FinalDigits, CheckMode::PreMeasurement] {
                            let r = run_third_party(&cfg.clone().with_check_mode(mode), trusted).map_err(e)?;
                            clean(&r, n, 2 * n, &format!("third-party trusted={trusted}"))?;
                            sessions += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{sessions} ideal sessions across all modes, zero error, exact recycling counts"
    ))
}

fn substituted_attack() -> Check {
    let mut notes = Vec::new();
    for d in [2, 3] {
        let cfg = SessionConfig::new(d, 2, 512, 500 + d as u64).with_channel(ChannelModel::substituted(d));
        let r = run_two_party(&cfg).map_err(e)?;
        let expected = 1.0 - 1.0 / d as f64;
        within(
            r.observed_error_rate,
            expected,
            512,
            3.0,
            &format!("d = {d} check error"),
        )?;
        ensure(r.aborted, || format!("d = {d}: not aborted"))?;
        let report = attack_report(&r, r.eve_digits.as_deref());
        ensure(report.eve_alice_match_rate >= 0.99, || {
            format!("d = {d}: Eve matched {}", report.eve_alice_match_rate)
        })?;
        notes.push(format!(
            "d={d} error {:.4} (expect {expected:.4}), eve {:.3}",
            r.observed_error_rate, report.eve_alice_match_rate
        ));
    }
    Ok(notes.join("; "))
}

fn guessing_monte_carlo() -> Check {
    let mut notes = Vec::new();
    for d in [2, 3] {
        let rate = proposition_monte_carlo(d, 200, 500, &mut Rng::new(600 + d as u64)).map_err(e)?;
        within(rate, 1.0 / d as f64, 100_000, 3.0, &format!("d = {d}"))?;
        notes.push(format!("d={d} rate {rate:.4}"));
    }
    Ok(format!("10^5 samples each: {}", notes.join(", ")))
}

fn purified_correspondence() -> Check {
    let family = mub_family(2, 2).map_err(e)?;
    let mut rng = Rng::new(7);
    let mut worst: f64 = 1.0;
    for _ in 0..20 {
        let u_e = haar_unitary(4, &mut rng);
        for i in 0..2 {
            for s in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        worst = worst.min(bb84_correspondence_check(&family, &u_e, 2, s, i, k, l).map_err(e)?);
                    }
                }
            }
        }
    }
    ensure(worst >= 1.0 - 1e-9, || format!("worst fidelity {worst}"))?;
    let cfg = SessionConfig::new(2, 2, 512, 8).with_channel(ChannelModel::PurifiedAttack {
        u_e: controlled_shift(2),
        e_dim: 2,
        readout: teleqkd::channel::AncillaReadout::Computational,
    });
    let r = run_two_party(&cfg).map_err(e)?;
    within(r.observed_error_rate, 0.25, 512, 3.0, "controlled-shift check error")?;
    Ok(format!(
        "20 couplings x 16 outcomes, worst fidelity 1 - {:.1e}; controlled-shift error {:.4}",
        1.0 - worst,
        r.observed_error_rate
    ))
}

fn ghz_expansion() -> Check {
    let h = 1.0 / 2f64.sqrt();
    let amp = |x: f64| Amplitude::new(x, 0.0);
    let ab = vec![Subsystem::new("A", 2), Subsystem::new("B", 2)];
    let phi_plus = StateVector::new(ab.clone(), vec![amp(h), amp(0.0), amp(0.0), amp(h)]).map_err(e)?;
    let phi_minus = StateVector::new(ab, vec![amp(h), amp(0.0), amp(0.0), amp(-h)]).map_err(e)?;
    let flying = plus_state("C1").tensor(&plus_state("C2")).map_err(e)?;
    let joint = flying.tensor(&ghz_state(["C", "A", "B"])).map_err(e)?;
    let targets = ["C1", "C2", "C"];
    let canonical = ghz_state(targets);
    for (outcome, &name) in GHZ_OUTCOMES.iter().enumerate() {
        let m = ghz_measure(&joint, targets, Outcome::Force(outcome)).map_err(e)?;
        ensure((m.probability - 0.125).abs() <= 1e-9, || {
            format!("{name}: probability {}", m.probability)
        })?;
        let plus = matches!(name, 'a' | 'b' | 'e' | 'f');
        let expected = if plus { &phi_plus } else { &phi_minus };
        let f = fidelity(&m.rest.reorder(&["A", "B"]).map_err(e)?, expected).map_err(e)?;
        ensure(f >= 1.0 - 1e-9, || format!("{name}: pair fidelity {f}"))?;
        ensure(
            m.sign == if plus { PairSign::PhiPlus } else { PairSign::PhiMinus },
            || format!("{name}: sign {:?}", m.sign),
        )?;
        let restored = recycle_ghz(&m.residual, outcome).map_err(e)?;
        let fr = fidelity(&restored, &canonical).map_err(e)?;
        ensure(fr >= 1.0 - 1e-9, || format!("{name}: recycled fidelity {fr}"))?;
    }
    let samples = 8000;
    let mut rng = Rng::new(9);
    let mut counts = [0usize; 8];
    for _ in 0..samples {
        counts[ghz_measure(&joint, targets, Outcome::Sample(&mut rng))
            .map_err(e)?
            .outcome] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        within(
            c as f64 / samples as f64,
            0.125,
            samples,
            5.0,
            &format!("sampled {}", GHZ_OUTCOMES[i]),
        )?;
    }
    Ok(format!(
        "8 outcomes at 1/8 exactly, sign classes and recycling verified; sampled counts {counts:?}"
    ))
}

/// Probability that a uniformly random qubit Pauli (identity included) flips
/// the decoded digit, averaged over the two bases and the digit.
fn qubit_flip_oracle() -> Result<f64, String> {
    let family = mub_family(2, 2).map_err(e)?;
    let mut total = 0.0;
    for u in family.unitaries() {
        for a in 0..2 {
            for b in 0..2 {
                let conj = u
                    .adjoint()
                    .compose(&pauli_matrix(2, a, b).map_err(e)?)
                    .map_err(e)?
                    .compose(u)
                    .map_err(e)?;
                total += (0..2).map(|x| 1.0 - conj.get(x, x).norm_sqr()).sum::<f64>();
            }
        }
    }
    Ok(total / 16.0)
}

fn depolarizing_calibration() -> Check {
    let flip = qubit_flip_oracle()?;
    ensure((flip - 0.5).abs() < 1e-12, || format!("flip oracle {flip}"))?;
    let mut notes = Vec::new();
    for p in [0.1, 0.3] {
        let cfg = SessionConfig::new(2, 2, 512, 77).with_channel(ChannelModel::Depolarizing { p });
        let r = run_two_party(&cfg).map_err(e)?;
        within(r.observed_error_rate, p * flip, 512, 3.0, &format!("p = {p}"))?;
        notes.push(format!(
            "p={p} error {:.4} (expect {:.3})",
            r.observed_error_rate,
            p * flip
        ));
    }
    Ok(notes.join(", "))
}

fn determinism() -> Check {
    let specs = [
        "mode = two_party\nd = 3\nm = 3\nn = 32\ntrials = 6\nseed = 11\nchannel = depolarizing\nnoise_p = 0.2",
        "mode = pre_check\nn = 64\ntrials = 4\nseed = 12\nchannel = substituted",
        "mode = third_party_untrusted\nn = 16\ntrials = 4\nseed = 13\nchannel = loss\nnoise_p = 0.3",
        "mode = third_party_trusted\nn = 16\ntrials = 3\nseed = 14\nchannel = cnot",
        "mode = chain\nhops = 3\nd = 3\nn = 16\ntrials = 4\nseed = 15\nchannel = depolarizing\nnoise_p = 0.1\nnoisy_hop = 1",
    ];
    let dir = tempfile::tempdir().map_err(|x| x.to_string())?;
    for (i, text) in specs.iter().enumerate() {
        let mut files = Vec::new();
        for rep in 0..2 {
            let mut settings = Settings::parse(text).map_err(|x| x.to_string())?;
            let path = |ext: &str| dir.path().join(format!("{i}-{rep}.{ext}")).display().to_string();
            settings.set("out", &path("json")).map_err(|x| x.to_string())?;
            settings.set("csv", &path("csv")).map_err(|x| x.to_string())?;
            settings.set("transcript", &path("txt")).map_err(|x| x.to_string())?;
            settings.set("transcript_trial", "1").map_err(|x| x.to_string())?;
            let spec = ExperimentSpec::from_settings(&settings).map_err(|x| x.to_string())?;
            write_outputs(&teleqkd_harness::run_experiment(&spec).map_err(|x| x.to_string())?)
                .map_err(|x| x.to_string())?;
            let read = |p: String| fs::read(Path::new(&p)).map_err(|x| x.to_string());
            files.push([read(path("json"))?, read(path("csv"))?, read(path("txt"))?]);
        }
        ensure(files[0] == files[1], || {
            format!("spec {i}: outputs differ between runs")
        })?;
    }
    Ok(format!(
        "{} specs run twice, summary, CSV and transcript byte-identical",
        specs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("teleportation round trip", teleportation_round_trip),
        ("Bell outcome uniformity", outcome_uniformity),
        ("complete MUB families", mub_families),
        ("noiseless completeness", noiseless_completeness),
        ("substituted-attack detection", substituted_attack),
        ("guessing-bound Monte Carlo", guessing_monte_carlo),
        ("purified-attack correspondence", purified_correspondence),
        ("GHZ expansion and recycling", ghz_expansion),
        ("depolarizing calibration", depolarizing_calibration),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
