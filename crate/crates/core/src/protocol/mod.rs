//! Executable key-distribution sessions.
//!
//! Every session is a single causally ordered run. Quantum states live in
//! per-pair slots; classical information only moves between parties through
//! the [`Transcript`], and each role reads what the others announced from
//! it, never from another role's private variables.
//!
//! Random streams are derived from the session seed by role (Alice's
//! choices, channel noise, measurement outcomes, Eve, Charlie), so two
//! session kinds that make the same choices in the same order (for example
//! a one-hop chain and the two-party protocol) draw identical digits.

mod chain;
mod third_party;
pub mod transcript;
mod two_party;

pub use chain::{run_chain, ChainConfig};
pub use third_party::run_third_party;
pub use transcript::{ClassicalMessage, MessageKind, Party, Transcript};
pub use two_party::{run_pre_check, run_two_party};

use crate::bases::{bell_pair, is_prime, max_mubs, MubFamily};
use crate::channel::{apply_channel, ChannelModel, EveRegisters};
use crate::error::{invalid, Error, Result};
use crate::rng::Rng;
use crate::state::{fidelity, MeasurementBasis, StateVector, TOLERANCE};
use crate::teleport::recycle;
use transcript::{from_payload, to_payload};

/// Default error rate above which a session aborts.
pub const DEFAULT_ABORT_THRESHOLD: f64 = 0.05;

/// Where the eavesdropping check happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Sacrifice `N` of the `2N` teleported digits after Bob decodes.
    FinalDigits,
    /// Measure `N` of the `2N` pairs in random unbiased bases before any
    /// teleportation; the other `N` carry the key unchecked.
    PreMeasurement,
}

impl CheckMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckMode::FinalDigits => "final_digits",
            CheckMode::PreMeasurement => "pre_measurement",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Qudit dimension (prime).
    pub d: usize,
    /// Number of mutually unbiased bases in use.
    pub m: usize,
    /// Key length in dits; `2N` pairs are distributed.
    pub n: usize,
    pub abort_threshold: f64,
    pub check_mode: CheckMode,
    pub seed: u64,
    pub channel: ChannelModel,
}

impl SessionConfig {
    /// Ideal channel, final-digit checking, default threshold.
    pub fn new(d: usize, m: usize, n: usize, seed: u64) -> Self {
        Self {
            d,
            m,
            n,
            abort_threshold: DEFAULT_ABORT_THRESHOLD,
            check_mode: CheckMode::FinalDigits,
            seed,
            channel: ChannelModel::Ideal,
        }
    }

    pub fn with_channel(mut self, channel: ChannelModel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.abort_threshold = threshold;
        self
    }

    pub fn with_check_mode(mut self, mode: CheckMode) -> Self {
        self.check_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.d) {
            return Err(Error::NotPrime(self.d));
        }
        if self.m < 2 || self.m > max_mubs(self.d) {
            return Err(invalid(
                "m",
                format!("need 2 <= m <= {} for d = {}, got {}", max_mubs(self.d), self.d, self.m),
            ));
        }
        if self.n == 0 {
            return Err(invalid("n", "key length must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(invalid("threshold", format!("{} outside [0, 1]", self.abort_threshold)));
        }
        self.channel.validate(self.d)
    }
}

/// Outcome of one session.
#[derive(Debug, Clone)]
pub struct KeyResult {
    pub d: usize,
    pub aborted: bool,
    /// Raw key; empty when the session aborted.
    pub alice_key: Vec<usize>,
    pub bob_key: Vec<usize>,
    /// Mismatch fraction over the checked positions.
    pub observed_error_rate: f64,
    pub transcript: Transcript,
    /// Pairs (or GHZ states, for the third-party protocol) restored to their
    /// standard form and verified.
    pub recycled_pairs: usize,
    /// Every digit Alice teleported, in round order.
    pub alice_digits: Vec<usize>,
    /// Bob's decoded digit for each teleported round.
    pub bob_digits: Vec<usize>,
    /// Eve's decoded digit for each round, when her attack lets her decode.
    pub eve_digits: Option<Vec<usize>>,
    /// Round indices (or pair indices, for pre-measurement checks) sacrificed
    /// for checking.
    pub check_positions: Vec<usize>,
}

impl KeyResult {
    pub fn keys_agree(&self) -> bool {
        !self.aborted && self.alice_key == self.bob_key
    }
}

/// Dispatches on `config.check_mode`.
pub fn run_session(config: &SessionConfig) -> Result<KeyResult> {
    match config.check_mode {
        CheckMode::FinalDigits => run_two_party(config),
        CheckMode::PreMeasurement => run_pre_check(config),
    }
}

pub(crate) const INPUT: &str = "A'";
pub(crate) const ALICE_HALF: &str = "A";
pub(crate) const BOB_HALF: &str = "B";

pub(crate) struct Streams {
    pub alice: Rng,
    pub channel: Rng,
    pub quantum: Rng,
    pub eve: Rng,
    pub charlie: Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let master = Rng::new(seed);
        Self {
            alice: master.derive(0),
            channel: master.derive(1),
            quantum: master.derive(2),
            eve: master.derive(3),
            charlie: master.derive(4),
        }
    }
}

/// One distributed entangled resource and whatever Eve attached to it.
#[derive(Debug, Clone)]
pub(crate) struct PairSlot {
    pub state: StateVector,
    pub eve: EveRegisters,
}

/// Sends `rx` of freshly prepared resources through `channel` until one
/// arrives, logging losses and retransmissions.
#[allow(clippy::too_many_arguments)]
pub(crate) fn transmit(
    prepare: &mut dyn FnMut() -> Result<StateVector>,
    rx: &str,
    channel: &ChannelModel,
    round: usize,
    sender: Party,
    receiver: Party,
    rng: &mut Rng,
    transcript: &mut Transcript,
) -> Result<PairSlot> {
    loop {
        let out = apply_channel(&prepare()?, rx, channel, rng)?;
        if !out.lost {
            return Ok(PairSlot {
                state: out.state,
                eve: out.eve,
            });
        }
        transcript.push(receiver, sender, MessageKind::PairLost, vec![round as i64]);
        transcript.push(sender, receiver, MessageKind::PairRetransmitted, vec![round as i64]);
    }
}

/// Rotates a measured pair back to `|ψ_{0,0}⟩` and verifies it.
pub(crate) fn recycle_verified(residual: &StateVector, k: usize, l: usize) -> Result<bool> {
    let labels = residual.labels();
    let d = residual.dims()[0];
    let restored = recycle(residual, k, l)?;
    Ok(fidelity(&restored, &bell_pair(d, labels[0], labels[1])?)? >= 1.0 - TOLERANCE)
}

/// For each basis `i` and Alice outcome `j`, the outcome Bob is certain to
/// get on the ideal pair `|ψ_{0,0}⟩` when measuring in the conjugate basis.
/// Computed from the state rather than assumed.
pub(crate) fn expected_check_outcomes(family: &MubFamily) -> Result<Vec<Vec<usize>>> {
    let d = family.d();
    let ideal = bell_pair(d, ALICE_HALF, BOB_HALF)?;
    family
        .bases()
        .iter()
        .map(|basis| {
            let bob_basis = basis.conjugate();
            (0..d)
                .map(|j| {
                    let (post, _) = ideal.measure_forced(&[ALICE_HALF], basis, j)?;
                    let probs = post.outcome_probabilities(&[BOB_HALF], &bob_basis)?;
                    probs
                        .iter()
                        .position(|&p| p >= 1.0 - TOLERANCE)
                        .ok_or_else(|| invalid("m", "basis without deterministic pair correlations"))
                })
                .collect()
        })
        .collect()
}

pub(crate) struct CheckOutcome {
    pub positions: Vec<usize>,
    pub survivors: Vec<usize>,
    pub error_rate: f64,
    pub aborted: bool,
}

/// Entanglement check on `n` of the slots: Alice measures her half of each
/// chosen pair in a random family basis and announces positions, bases and
/// outcomes (and the pair rotations `b`, when the pairs were rotated); Bob
/// undoes the rotation and measures in the conjugate basis.
#[allow(clippy::too_many_arguments)]
pub(crate) fn entanglement_check(
    config: &SessionConfig,
    family: &MubFamily,
    slots: &mut [PairSlot],
    rotations: Option<&[usize]>,
    alice_label: &str,
    bob_label: &str,
    streams: &mut Streams,
    transcript: &mut Transcript,
) -> Result<CheckOutcome> {
    let expected = expected_check_outcomes(family)?;
    let positions = streams.alice.subset(slots.len(), config.n);

    // Alice
    let mut announced = Vec::with_capacity(2 * positions.len());
    for &pos in &positions {
        let basis = streams.alice.below(config.m);
        let m = slots[pos]
            .state
            .measure(&[alice_label], family.basis(basis), &mut streams.quantum)?;
        slots[pos].state = m.post_state;
        announced.extend([basis as i64, m.outcome as i64]);
    }
    transcript.push(
        Party::Alice,
        Party::All,
        MessageKind::CheckPositions,
        to_payload(&positions),
    );
    if let Some(b) = rotations {
        let checked: Vec<usize> = positions.iter().map(|&p| b[p]).collect();
        transcript.push(Party::Alice, Party::All, MessageKind::PublishB, to_payload(&checked));
    }
    transcript.push(Party::Alice, Party::All, MessageKind::CheckValues, announced);

    // Bob
    let heard_positions = from_payload(transcript.published(Party::Alice, MessageKind::CheckPositions)?)?;
    let heard_rotations = match rotations {
        Some(_) => Some(from_payload(
            transcript.published(Party::Alice, MessageKind::PublishB)?,
        )?),
        None => None,
    };
    let heard_values = from_payload(transcript.published(Party::Alice, MessageKind::CheckValues)?)?;
    let mut bob_values = Vec::with_capacity(heard_positions.len());
    let mut errors = 0usize;
    for (idx, &pos) in heard_positions.iter().enumerate() {
        let (basis, alice_outcome) = (heard_values[2 * idx], heard_values[2 * idx + 1]);
        let mut state = slots[pos].state.clone();
        if let Some(b) = &heard_rotations {
            state = state.apply_unitary(&family.unitary(b[idx]).adjoint(), &[bob_label])?;
        }
        let m = state.measure(&[bob_label], &family.basis(basis).conjugate(), &mut streams.quantum)?;
        slots[pos].state = m.post_state;
        errors += usize::from(m.outcome != expected[basis][alice_outcome]);
        bob_values.push(m.outcome);
    }
    transcript.push(
        Party::Bob,
        Party::All,
        MessageKind::CheckValues,
        to_payload(&bob_values),
    );

    let error_rate = errors as f64 / positions.len() as f64;
    let aborted = error_rate > config.abort_threshold;
    let verdict = if aborted {
        MessageKind::Abort
    } else {
        MessageKind::Proceed
    };
    transcript.push(
        Party::Alice,
        Party::All,
        verdict,
        vec![errors as i64, positions.len() as i64],
    );

    let survivors = (0..slots.len())
        .filter(|p| positions.binary_search(p).is_err())
        .collect();
    Ok(CheckOutcome {
        positions,
        survivors,
        error_rate,
        aborted,
    })
}

/// Final-digit check: Alice picks `n` of the rounds after Bob has decoded
/// everything, both announce their digits there, and the rest is the key.
pub(crate) fn final_digit_check(
    config: &SessionConfig,
    alice_digits: Vec<usize>,
    bob_digits: Vec<usize>,
    eve_digits: Option<Vec<usize>>,
    recycled_pairs: usize,
    alice_rng: &mut Rng,
    mut transcript: Transcript,
) -> Result<KeyResult> {
    let positions = alice_rng.subset(alice_digits.len(), config.n);
    transcript.push(
        Party::Alice,
        Party::All,
        MessageKind::CheckPositions,
        to_payload(&positions),
    );
    let alice_values: Vec<usize> = positions.iter().map(|&p| alice_digits[p]).collect();
    transcript.push(
        Party::Alice,
        Party::All,
        MessageKind::CheckValues,
        to_payload(&alice_values),
    );

    let heard = from_payload(transcript.published(Party::Alice, MessageKind::CheckPositions)?)?;
    let bob_values: Vec<usize> = heard.iter().map(|&p| bob_digits[p]).collect();
    transcript.push(
        Party::Bob,
        Party::All,
        MessageKind::CheckValues,
        to_payload(&bob_values),
    );

    let errors = alice_values.iter().zip(&bob_values).filter(|(a, b)| a != b).count();
    let observed_error_rate = errors as f64 / positions.len() as f64;
    let aborted = observed_error_rate > config.abort_threshold;
    let verdict = if aborted {
        MessageKind::Abort
    } else {
        MessageKind::Proceed
    };
    transcript.push(
        Party::Alice,
        Party::All,
        verdict,
        vec![errors as i64, positions.len() as i64],
    );

    let (alice_key, bob_key) = if aborted {
        (Vec::new(), Vec::new())
    } else {
        let keep: Vec<usize> = (0..alice_digits.len())
            .filter(|p| positions.binary_search(p).is_err())
            .collect();
        (
            keep.iter().map(|&p| alice_digits[p]).collect(),
            keep.iter().map(|&p| bob_digits[p]).collect(),
        )
    };
    Ok(KeyResult {
        d: config.d,
        aborted,
        alice_key,
        bob_key,
        observed_error_rate,
        transcript,
        recycled_pairs,
        alice_digits,
        bob_digits,
        eve_digits,
        check_positions: positions,
    })
}

/// Measures `label` in the computational basis.
pub(crate) fn read_digit(state: &StateVector, label: &str, rng: &mut Rng) -> Result<(usize, StateVector)> {
    let d = state.dim_of(label)?;
    let m = state.measure(&[label], &MeasurementBasis::computational(d), rng)?;
    Ok((m.outcome, m.post_state))
}
