//! Key distribution with GHZ states supplied by a third party, Charlie.
//!
//! Charlie holds qubit `C` of each `(C, A, B)` GHZ state and teleports
//! `|+⟩|+⟩` into it; the GHZ-basis outcome leaves `(A, B)` in `Φ⁺` or `Φ⁻`
//! and Charlie publishes only that sign class. Alice and Bob then run the
//! key rounds through unrotated pairs: Alice teleports `U_{b_r}|s_r⟩`, and
//! Bob undoes the byproduct and the rotation once `k`, `l` and `b` are
//! public.

use crate::bases::{ghz_state, mub_family, pauli_matrix, plus_state, MubFamily};
use crate::channel::ChannelModel;
use crate::error::{invalid, Result};
use crate::state::{fidelity, Amplitude, MeasurementBasis, StateVector, UnitaryOp, TOLERANCE};
use crate::teleport::{bell_measure, correction_op, ghz_measure, recycle_ghz, Outcome, PairSign};

use super::transcript::{from_payload, to_payload};
use super::{
    entanglement_check, final_digit_check, transmit, CheckMode, KeyResult, MessageKind, PairSlot, Party, SessionConfig,
    Streams, Transcript, ALICE_HALF, BOB_HALF, INPUT,
};

const CHARLIE: &str = "C";
const FLYING: [&str; 2] = ["C1", "C2"];

fn hadamard() -> UnitaryOp {
    let h = 1.0 / 2f64.sqrt();
    UnitaryOp::new(
        2,
        vec![
            Amplitude::new(h, 0.0),
            Amplitude::new(h, 0.0),
            Amplitude::new(h, 0.0),
            Amplitude::new(-h, 0.0),
        ],
    )
    .expect("Hadamard is unitary")
}

/// Bob's register plus the genuine half Eve kept, if any: she repeats every
/// step Bob takes once the information for it is public.
fn bob_side(slot: &PairSlot) -> Vec<&str> {
    std::iter::once(BOB_HALF).chain(slot.eve.held.as_deref()).collect()
}

fn apply_bob_side(slot: &mut PairSlot, op: &UnitaryOp) -> Result<()> {
    let mut state = slot.state.clone();
    for label in bob_side(slot) {
        state = state.apply_unitary(op, &[label])?;
    }
    slot.state = state;
    Ok(())
}

struct Rounds {
    alice: Vec<usize>,
    bob: Vec<usize>,
    eve: Option<Vec<usize>>,
}

/// Key rounds through unrotated `(A, B)` pairs `slots[rounds]`.
fn restated_rounds(
    config: &SessionConfig,
    family: &MubFamily,
    slots: &mut [Option<PairSlot>],
    rounds: &[usize],
    streams: &mut Streams,
    transcript: &mut Transcript,
) -> Result<Rounds> {
    let d = config.d;
    let computational = MeasurementBasis::computational(d);

    // Alice
    let b: Vec<usize> = rounds.iter().map(|_| streams.alice.below(config.m)).collect();
    let s: Vec<usize> = rounds.iter().map(|_| streams.alice.below(d)).collect();
    let (mut k, mut l) = (Vec::with_capacity(rounds.len()), Vec::with_capacity(rounds.len()));
    let mut received = Vec::with_capacity(rounds.len());
    for (idx, &r) in rounds.iter().enumerate() {
        let slot = slots[r].take().expect("each pair is used once");
        let input = StateVector::basis_state(INPUT, d, s[idx])?.apply_unitary(family.unitary(b[idx]), &[INPUT])?;
        let m = bell_measure(
            &input.tensor(&slot.state)?,
            INPUT,
            ALICE_HALF,
            Outcome::Sample(&mut streams.quantum),
        )?;
        k.push(m.k);
        l.push(m.l);
        received.push(PairSlot {
            state: m.rest,
            eve: slot.eve,
        });
    }
    transcript.push(Party::Alice, Party::All, MessageKind::PublishK, to_payload(&k));
    transcript.push(Party::Alice, Party::All, MessageKind::PublishL, to_payload(&l));
    transcript.push(Party::Alice, Party::All, MessageKind::PublishB, to_payload(&b));

    // Bob, mirrored by Eve on the half she kept
    let heard_k = from_payload(transcript.published(Party::Alice, MessageKind::PublishK)?)?;
    let heard_l = from_payload(transcript.published(Party::Alice, MessageKind::PublishL)?)?;
    let heard_b = from_payload(transcript.published(Party::Alice, MessageKind::PublishB)?)?;
    let mut bob = Vec::with_capacity(rounds.len());
    let mut eve = Vec::new();
    for (idx, slot) in received.iter_mut().enumerate() {
        let undo = family
            .unitary(heard_b[idx])
            .adjoint()
            .compose(&correction_op(d, heard_k[idx], heard_l[idx])?)?;
        apply_bob_side(slot, &undo)?;
        let m = slot.state.measure(&[BOB_HALF], &computational, &mut streams.quantum)?;
        slot.state = m.post_state;
        bob.push(m.outcome);
        if let Some(held) = slot.eve.held.as_deref() {
            eve.push(slot.state.measure(&[held], &computational, &mut streams.eve)?.outcome);
        }
    }
    let eve = matches!(config.channel, ChannelModel::SubstitutedAttack { .. }).then_some(eve);
    Ok(Rounds { alice: s, bob, eve })
}

/// Third-party protocol for qubits. In trusted mode Charlie also hides each
/// half behind a random Hadamard mask and reveals the masks to their
/// holders after both have acknowledged receipt.
pub fn run_third_party(config: &SessionConfig, trusted: bool) -> Result<KeyResult> {
    config.validate()?;
    if config.d != 2 {
        return Err(invalid(
            "d",
            format!("the third-party protocol is defined for qubits, got d = {}", config.d),
        ));
    }
    let family = mub_family(config.d, config.m)?;
    let mut streams = Streams::new(config.seed);
    let mut transcript = Transcript::default();
    let total = 2 * config.n;
    let h = hadamard();

    // Charlie prepares and sends; only the B half crosses the modeled channel.
    let (mask_a, mask_b): (Vec<usize>, Vec<usize>) = if trusted {
        (0..total)
            .map(|_| (streams.charlie.below(2), streams.charlie.below(2)))
            .unzip()
    } else {
        (vec![0; total], vec![0; total])
    };
    let mut slots = Vec::with_capacity(total);
    for r in 0..total {
        let mut prepare = || {
            let mut ghz = ghz_state([CHARLIE, ALICE_HALF, BOB_HALF]);
            if mask_a[r] == 1 {
                ghz = ghz.apply_unitary(&h, &[ALICE_HALF])?;
            }
            if mask_b[r] == 1 {
                ghz = ghz.apply_unitary(&h, &[BOB_HALF])?;
            }
            Ok(ghz)
        };
        slots.push(transmit(
            &mut prepare,
            BOB_HALF,
            &config.channel,
            r,
            Party::Charlie,
            Party::Bob,
            &mut streams.channel,
            &mut transcript,
        )?);
    }
    transcript.push(
        Party::Alice,
        Party::Charlie,
        MessageKind::AckReceived,
        vec![total as i64],
    );
    transcript.push(Party::Bob, Party::Charlie, MessageKind::AckReceived, vec![total as i64]);

    if trusted {
        transcript.push(
            Party::Charlie,
            Party::Alice,
            MessageKind::CharlieMaskReveal,
            to_payload(&mask_a),
        );
        transcript.push(
            Party::Charlie,
            Party::Bob,
            MessageKind::CharlieMaskReveal,
            to_payload(&mask_b),
        );
        let for_alice =
            from_payload(transcript.received(Party::Charlie, Party::Alice, MessageKind::CharlieMaskReveal)?)?;
        let for_bob = from_payload(transcript.received(Party::Charlie, Party::Bob, MessageKind::CharlieMaskReveal)?)?;
        for (r, slot) in slots.iter_mut().enumerate() {
            if for_alice[r] == 1 {
                slot.state = slot.state.apply_unitary(&h, &[ALICE_HALF])?;
            }
            if for_bob[r] == 1 {
                apply_bob_side(slot, &h)?;
            }
        }
    }

    // Charlie teleports |+⟩|+⟩ into C and recycles the measured qubits.
    let flying = plus_state(FLYING[0]).tensor(&plus_state(FLYING[1]))?;
    let canonical = ghz_state([FLYING[0], FLYING[1], CHARLIE]);
    let mut classes = Vec::with_capacity(total);
    let mut recycled = 0;
    for slot in &mut slots {
        let joint = flying.tensor(&slot.state)?;
        let m = ghz_measure(
            &joint,
            [FLYING[0], FLYING[1], CHARLIE],
            Outcome::Sample(&mut streams.quantum),
        )?;
        let restored = recycle_ghz(&m.residual, m.outcome)?;
        recycled += usize::from(fidelity(&restored, &canonical)? >= 1.0 - TOLERANCE);
        classes.push(m.sign.code());
        slot.state = m.rest;
    }
    transcript.push(Party::Charlie, Party::All, MessageKind::PublishClass, classes);

    // Bob turns every Φ⁻ into Φ⁺.
    let heard = transcript
        .published(Party::Charlie, MessageKind::PublishClass)?
        .to_vec();
    let z = pauli_matrix(2, 1, 0)?;
    for (slot, code) in slots.iter_mut().zip(heard) {
        if PairSign::from_code(code) == Some(PairSign::PhiMinus) {
            apply_bob_side(slot, &z)?;
        }
    }

    match config.check_mode {
        CheckMode::FinalDigits => {
            let mut slots: Vec<Option<PairSlot>> = slots.into_iter().map(Some).collect();
            let all: Vec<usize> = (0..total).collect();
            let rounds = restated_rounds(config, &family, &mut slots, &all, &mut streams, &mut transcript)?;
            final_digit_check(
                config,
                rounds.alice,
                rounds.bob,
                rounds.eve,
                recycled,
                &mut streams.alice,
                transcript,
            )
        }
        CheckMode::PreMeasurement => {
            let check = entanglement_check(
                config,
                &family,
                &mut slots,
                None,
                ALICE_HALF,
                BOB_HALF,
                &mut streams,
                &mut transcript,
            )?;
            let mut result = KeyResult {
                d: config.d,
                aborted: check.aborted,
                alice_key: Vec::new(),
                bob_key: Vec::new(),
                observed_error_rate: check.error_rate,
                transcript: Transcript::default(),
                recycled_pairs: recycled,
                alice_digits: Vec::new(),
                bob_digits: Vec::new(),
                eve_digits: None,
                check_positions: check.positions,
            };
            if !check.aborted {
                let mut slots: Vec<Option<PairSlot>> = slots.into_iter().map(Some).collect();
                let rounds = restated_rounds(
                    config,
                    &family,
                    &mut slots,
                    &check.survivors,
                    &mut streams,
                    &mut transcript,
                )?;
                result.alice_key = rounds.alice.clone();
                result.bob_key = rounds.bob.clone();
                result.alice_digits = rounds.alice;
                result.bob_digits = rounds.bob;
                result.eve_digits = rounds.eve;
            }
            result.transcript = transcript;
            Ok(result)
        }
    }
}
