use crate::bases::{bell_pair, mub_family, MubFamily};
use crate::channel::AncillaReadout;
use crate::channel::ChannelModel;
use crate::error::Result;
use crate::rng::Rng;
use crate::state::{MeasurementBasis, StateVector};
use crate::teleport::{bell_measure, Outcome};

use super::transcript::{from_payload, to_payload};
use super::{
    entanglement_check, final_digit_check, read_digit, recycle_verified, transmit, KeyResult, MessageKind, PairSlot,
    Party, SessionConfig, Streams, Transcript, ALICE_HALF, BOB_HALF, INPUT,
};

/// Prepares `2N` pairs, rotates Bob's half of pair `r` by `U_{b_r}` and
/// sends it through the configured channel.
fn distribute_rotated(
    config: &SessionConfig,
    family: &MubFamily,
    b: &[usize],
    streams: &mut Streams,
    transcript: &mut Transcript,
) -> Result<Vec<PairSlot>> {
    let d = config.d;
    let mut slots = Vec::with_capacity(b.len());
    for (r, &basis) in b.iter().enumerate() {
        let mut prepare = || bell_pair(d, ALICE_HALF, BOB_HALF)?.apply_unitary(family.unitary(basis), &[BOB_HALF]);
        slots.push(transmit(
            &mut prepare,
            BOB_HALF,
            &config.channel,
            r,
            Party::Alice,
            Party::Bob,
            &mut streams.channel,
            transcript,
        )?);
    }
    transcript.push(Party::Bob, Party::Alice, MessageKind::AckReceived, vec![b.len() as i64]);
    Ok(slots)
}

struct Rounds {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
    pub eve: Option<Vec<usize>>,
    pub recycled: usize,
}

/// Steps 6 to 9 on the rotated pairs `slots[rounds]`: Alice teleports fresh
/// random dits, publishes `l` then `b` for those rounds, and Bob (and Eve,
/// when she can) decodes.
fn rotated_rounds(
    config: &SessionConfig,
    family: &MubFamily,
    slots: Vec<PairSlot>,
    rounds: &[usize],
    b: &[usize],
    streams: &mut Streams,
    transcript: &mut Transcript,
) -> Result<Rounds> {
    let d = config.d;
    let computational = MeasurementBasis::computational(d);

    // Alice
    let s: Vec<usize> = rounds.iter().map(|_| streams.alice.below(d)).collect();
    let mut received = Vec::with_capacity(rounds.len());
    let mut l = Vec::with_capacity(rounds.len());
    let mut recycled = 0;
    let mut slots: Vec<Option<PairSlot>> = slots.into_iter().map(Some).collect();
    for (idx, &r) in rounds.iter().enumerate() {
        let slot = slots[r].take().expect("each pair is used once");
        let joint = StateVector::basis_state(INPUT, d, s[idx])?.tensor(&slot.state)?;
        let m = bell_measure(&joint, INPUT, ALICE_HALF, Outcome::Sample(&mut streams.quantum))?;
        recycled += usize::from(recycle_verified(&m.residual, m.k, m.l)?);
        l.push(m.l);
        received.push(PairSlot {
            state: m.rest,
            eve: slot.eve,
        });
    }
    transcript.push(Party::Alice, Party::All, MessageKind::PublishL, to_payload(&l));
    let rotations: Vec<usize> = rounds.iter().map(|&r| b[r]).collect();
    transcript.push(Party::Alice, Party::All, MessageKind::PublishB, to_payload(&rotations));

    // Bob
    let heard_l = from_payload(transcript.published(Party::Alice, MessageKind::PublishL)?)?;
    let heard_b = from_payload(transcript.published(Party::Alice, MessageKind::PublishB)?)?;
    let mut bob = Vec::with_capacity(rounds.len());
    for (idx, slot) in received.iter_mut().enumerate() {
        let undone = slot
            .state
            .apply_unitary(&family.unitary(heard_b[idx]).adjoint(), &[BOB_HALF])?;
        let m = undone.measure(&[BOB_HALF], &computational, &mut streams.quantum)?;
        slot.state = m.post_state;
        bob.push((m.outcome + d - heard_l[idx]) % d);
    }

    // Eve, after the same announcements
    let eve = eve_decode_rotated(config, family, &received, &heard_l, &heard_b, &mut streams.eve)?;

    Ok(Rounds {
        alice: s,
        bob,
        eve,
        recycled,
    })
}

fn eve_decode_rotated(
    config: &SessionConfig,
    family: &MubFamily,
    received: &[PairSlot],
    l: &[usize],
    b: &[usize],
    rng: &mut Rng,
) -> Result<Option<Vec<usize>>> {
    let d = config.d;
    match &config.channel {
        ChannelModel::SubstitutedAttack { .. } => received
            .iter()
            .enumerate()
            .map(|(idx, slot)| {
                let held = slot.eve.held.as_deref().expect("substituted attack keeps the half");
                let undone = slot.state.apply_unitary(&family.unitary(b[idx]).adjoint(), &[held])?;
                let (outcome, _) = read_digit(&undone, held, rng)?;
                Ok((outcome + d - l[idx]) % d)
            })
            .collect::<Result<Vec<_>>>()
            .map(Some),
        ChannelModel::PurifiedAttack {
            readout: AncillaReadout::Computational,
            ..
        } => received
            .iter()
            .enumerate()
            .map(|(idx, slot)| {
                let ancilla = slot.eve.ancilla.as_deref().expect("purified attack keeps an ancilla");
                let (outcome, _) = read_digit(&slot.state, ancilla, rng)?;
                Ok((outcome + d - l[idx]) % d)
            })
            .collect::<Result<Vec<_>>>()
            .map(Some),
        _ => Ok(None),
    }
}

/// The ten-step protocol with the check on `N` of the `2N` decoded digits.
pub fn run_two_party(config: &SessionConfig) -> Result<KeyResult> {
    config.validate()?;
    let family = mub_family(config.d, config.m)?;
    let mut streams = Streams::new(config.seed);
    let mut transcript = Transcript::default();
    let total = 2 * config.n;

    let b: Vec<usize> = (0..total).map(|_| streams.alice.below(config.m)).collect();
    let slots = distribute_rotated(config, &family, &b, &mut streams, &mut transcript)?;
    let all: Vec<usize> = (0..total).collect();
    let rounds = rotated_rounds(config, &family, slots, &all, &b, &mut streams, &mut transcript)?;
    final_digit_check(
        config,
        rounds.alice,
        rounds.bob,
        rounds.eve,
        rounds.recycled,
        &mut streams.alice,
        transcript,
    )
}

/// Variant that checks `N` of the pairs by direct measurement before any
/// teleportation and uses the remaining `N` for the key.
pub fn run_pre_check(config: &SessionConfig) -> Result<KeyResult> {
    config.validate()?;
    let family = mub_family(config.d, config.m)?;
    let mut streams = Streams::new(config.seed);
    let mut transcript = Transcript::default();
    let total = 2 * config.n;

    let b: Vec<usize> = (0..total).map(|_| streams.alice.below(config.m)).collect();
    let mut slots = distribute_rotated(config, &family, &b, &mut streams, &mut transcript)?;
    let check = entanglement_check(
        config,
        &family,
        &mut slots,
        Some(&b),
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
        recycled_pairs: 0,
        alice_digits: Vec::new(),
        bob_digits: Vec::new(),
        eve_digits: None,
        check_positions: check.positions,
    };
    if !check.aborted {
        let rounds = rotated_rounds(
            config,
            &family,
            slots,
            &check.survivors,
            &b,
            &mut streams,
            &mut transcript,
        )?;
        result.alice_key = rounds.alice.clone();
        result.bob_key = rounds.bob.clone();
        result.alice_digits = rounds.alice;
        result.bob_digits = rounds.bob;
        result.eve_digits = rounds.eve;
        result.recycled_pairs = rounds.recycled;
    }
    result.transcript = transcript;
    Ok(result)
}
