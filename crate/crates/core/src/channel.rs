//! Quantum channel models for the transmitted half of each pair, the two
//! eavesdropping attacks, and the statistics used to judge them.
//!
//! Noise is simulated as stochastic pure-state trajectories: a depolarizing
//! channel applies, with probability `p`, one of the `d²` generalized Paulis
//! (identity included) drawn uniformly.

use rand_distr::{Distribution, StandardNormal};

use crate::bases::{bell_pair, GeneralizedPauli, MubFamily};
use crate::error::{invalid, Error, Result};
use crate::protocol::KeyResult;
use crate::rng::Rng;
use crate::state::{fidelity, Amplitude, MeasurementBasis, StateVector, Subsystem, UnitaryOp};
use crate::teleport::{bell_measure, Outcome};

/// What Eve sends Bob in place of the genuine half.
#[derive(Debug, Clone, PartialEq)]
pub enum EveStrategy {
    /// The first half of a fresh Haar-random state on `B ⊗ C`, with `C` of
    /// dimension `kept_dim` staying with Eve.
    HaarSubstitute { kept_dim: usize },
    /// The first half of a fixed two-qudit state; Eve keeps the second.
    FixedSubstitute(StateVector),
}

/// How Eve reads her purified-attack ancilla once `b` and `l` are public.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaReadout {
    /// She never measures; her guesses are blind.
    Blind,
    /// Measure the ancilla in the computational basis and subtract `l`.
    Computational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Ideal,
    Depolarizing {
        p: f64,
    },
    /// The half is lost with probability `p`; the session retransmits.
    Loss {
        p: f64,
    },
    /// Eve keeps the genuine half and forwards one of her own.
    SubstitutedAttack {
        strategy: EveStrategy,
    },
    /// Eve entangles an ancilla `E` (initially `|0⟩`) with the half via
    /// `u_e` on `(B, E)` and forwards it.
    PurifiedAttack {
        u_e: UnitaryOp,
        e_dim: usize,
        readout: AncillaReadout,
    },
}

impl ChannelModel {
    /// Checks the model against the qudit dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ChannelModel::Ideal => Ok(()),
            ChannelModel::Depolarizing { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(invalid(
                        "channel",
                        format!("depolarizing probability {p} outside [0, 1]"),
                    ));
                }
                Ok(())
            }
            ChannelModel::Loss { p } => {
                if !(0.0..1.0).contains(p) {
                    return Err(invalid("channel", format!("loss probability {p} outside [0, 1)")));
                }
                Ok(())
            }
            ChannelModel::SubstitutedAttack { strategy } => match strategy {
                EveStrategy::HaarSubstitute { kept_dim } if *kept_dim == 0 => {
                    Err(invalid("channel", "substitute ancilla dimension must be positive"))
                }
                EveStrategy::FixedSubstitute(s) if s.subsystems().len() != 2 || s.dims()[0] != d => Err(invalid(
                    "channel",
                    format!("substitute state must be two qudits with the first of dimension {d}"),
                )),
                _ => Ok(()),
            },
            ChannelModel::PurifiedAttack { u_e, e_dim, .. } => {
                if u_e.dim() != d * e_dim {
                    return Err(Error::DimensionMismatch {
                        expected: d * e_dim,
                        actual: u_e.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Controlled-shift purified attack: `|b⟩|e⟩ ↦ |b⟩|e + b⟩`, ancilla read
    /// in the computational basis.
    pub fn cnot_attack(d: usize) -> ChannelModel {
        ChannelModel::PurifiedAttack {
            u_e: controlled_shift(d),
            e_dim: d,
            readout: AncillaReadout::Computational,
        }
    }

    pub fn substituted(d: usize) -> ChannelModel {
        ChannelModel::SubstitutedAttack {
            strategy: EveStrategy::HaarSubstitute { kept_dim: d },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Ideal => "ideal",
            ChannelModel::Depolarizing { .. } => "depolarizing",
            ChannelModel::Loss { .. } => "loss",
            ChannelModel::SubstitutedAttack { .. } => "substituted",
            ChannelModel::PurifiedAttack { .. } => "purified",
        }
    }

    pub fn is_attack(&self) -> bool {
        matches!(
            self,
            ChannelModel::SubstitutedAttack { .. } | ChannelModel::PurifiedAttack { .. }
        )
    }
}

/// Labels of the registers Eve holds after a channel use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EveRegisters {
    /// The genuine half she kept (substituted attack).
    pub held: Option<String>,
    /// Her coupled ancilla (purified attack).
    pub ancilla: Option<String>,
    /// The partner of the substitute she sent; nothing later reads it.
    pub scratch: Option<String>,
}

impl EveRegisters {
    pub fn labels(&self) -> Vec<&str> {
        [&self.held, &self.ancilla, &self.scratch]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.held.is_none() && self.ancilla.is_none() && self.scratch.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct ChannelOutput {
    pub state: StateVector,
    pub eve: EveRegisters,
    /// The half never arrived; the state is unchanged and must be discarded.
    pub lost: bool,
}

pub fn held_label(b_label: &str) -> String {
    format!("{b_label}~eve")
}

pub fn ancilla_label(b_label: &str) -> String {
    format!("{b_label}~eve.e")
}

pub fn scratch_label(b_label: &str) -> String {
    format!("{b_label}~eve.c")
}

/// Sends subsystem `b_label` of `state` through `model`.
pub fn apply_channel(state: &StateVector, b_label: &str, model: &ChannelModel, rng: &mut Rng) -> Result<ChannelOutput> {
    let d = state.dim_of(b_label)?;
    model.validate(d)?;
    let unchanged = |lost| ChannelOutput {
        state: state.clone(),
        eve: EveRegisters::default(),
        lost,
    };
    match model {
        ChannelModel::Ideal => Ok(unchanged(false)),
        ChannelModel::Depolarizing { p } => {
            if !rng.chance(*p) {
                return Ok(unchanged(false));
            }
            let which = rng.below(d * d);
            let pauli = GeneralizedPauli::new(d, (which / d) as i64, (which % d) as i64)?;
            Ok(ChannelOutput {
                state: state.apply_unitary(&pauli.matrix(), &[b_label])?,
                eve: EveRegisters::default(),
                lost: false,
            })
        }
        ChannelModel::Loss { p } => Ok(unchanged(rng.chance(*p))),
        ChannelModel::SubstitutedAttack { strategy } => {
            let held = held_label(b_label);
            let scratch = scratch_label(b_label);
            let substitute = match strategy {
                EveStrategy::HaarSubstitute { kept_dim } => haar_state(
                    vec![Subsystem::new(b_label, d), Subsystem::new(scratch.clone(), *kept_dim)],
                    rng,
                )?,
                EveStrategy::FixedSubstitute(s) => StateVector::new(
                    vec![Subsystem::new(b_label, d), Subsystem::new(scratch.clone(), s.dims()[1])],
                    s.amplitudes().to_vec(),
                )?,
            };
            let state = state.relabel(b_label, &held)?.tensor(&substitute)?;
            Ok(ChannelOutput {
                state,
                eve: EveRegisters {
                    held: Some(held),
                    ancilla: None,
                    scratch: Some(scratch),
                },
                lost: false,
            })
        }
        ChannelModel::PurifiedAttack { u_e, e_dim, .. } => {
            let ancilla = ancilla_label(b_label);
            let state = state
                .tensor(&StateVector::basis_state(ancilla.clone(), *e_dim, 0)?)?
                .apply_unitary(u_e, &[b_label, &ancilla])?;
            Ok(ChannelOutput {
                state,
                eve: EveRegisters {
                    held: None,
                    ancilla: Some(ancilla),
                    scratch: None,
                },
                lost: false,
            })
        }
    }
}

/// `|b⟩|e⟩ ↦ |b⟩|e + b mod d⟩` on two qudits of dimension `d`.
pub fn controlled_shift(d: usize) -> UnitaryOp {
    UnitaryOp::from_fn(d * d, |row, col| {
        let (b, e) = (col / d, col % d);
        if row == b * d + (e + b) % d {
            Amplitude::new(1.0, 0.0)
        } else {
            Amplitude::new(0.0, 0.0)
        }
    })
    .expect("permutation matrix is unitary")
}

fn gaussian(rng: &mut Rng) -> Amplitude {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Amplitude::new(re, im)
}

/// Haar-random pure state on the given subsystems.
pub fn haar_state(subsystems: Vec<Subsystem>, rng: &mut Rng) -> Result<StateVector> {
    let total: usize = subsystems.iter().map(|s| s.dim).product();
    let amps = (0..total).map(|_| gaussian(rng)).collect();
    StateVector::normalized(subsystems, amps)
}

/// Haar-random unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_unitary(dim: usize, rng: &mut Rng) -> UnitaryOp {
    loop {
        let mut columns: Vec<Vec<Amplitude>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v: Vec<Amplitude> = (0..dim).map(|_| gaussian(rng)).collect();
            for q in &columns {
                let ip: Amplitude = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= ip * qi);
            }
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            columns.push(v);
        }
        if !degenerate {
            if let Ok(u) = UnitaryOp::from_columns(&columns) {
                return u;
            }
        }
    }
}

/// One way for Bob and Eve to play the guessing game behind the
/// substituted-attack bound: they share `η` on `(B, C)`, each measures
/// locally, and Bob maps his outcome to a guess of Eve's digit.
#[derive(Debug, Clone)]
pub struct GuessingStrategy {
    d: usize,
    eta: StateVector,
    bob: MeasurementBasis,
    eve: MeasurementBasis,
    guess: Vec<usize>,
}

impl GuessingStrategy {
    /// Haar-random shared state and Haar-random projective measurements.
    pub fn haar(d: usize, rng: &mut Rng) -> Result<Self> {
        let eta = haar_state(vec![Subsystem::new("B", d), Subsystem::new("C", d)], rng)?;
        Ok(Self {
            d,
            eta,
            bob: MeasurementBasis::from_unitary(&haar_unitary(d, rng)),
            eve: MeasurementBasis::from_unitary(&haar_unitary(d, rng)),
            guess: (0..d).collect(),
        })
    }

    /// Bob ignores his measurement and always answers `guess`.
    pub fn constant_guess(d: usize, guess: usize) -> Result<Self> {
        if guess >= d {
            return Err(invalid("guess", format!("{guess} out of range for d = {d}")));
        }
        Ok(Self {
            d,
            eta: bell_pair(d, "B", "C")?,
            bob: MeasurementBasis::computational(d),
            eve: MeasurementBasis::computational(d),
            guess: vec![guess; d],
        })
    }

    /// Plays one round: Eve draws `s`, both measure, Bob guesses.
    /// Returns `(s, guess)`.
    pub fn play(&self, rng: &mut Rng) -> Result<(usize, usize)> {
        let s = rng.below(self.d);
        let after_eve = self.eta.measure(&["C"], &self.eve, rng)?;
        let bob = after_eve.post_state.measure(&["B"], &self.bob, rng)?;
        Ok((s, self.guess[bob.outcome]))
    }
}

/// Pooled success rate of `trials_per` rounds for each strategy.
pub fn guessing_success_rate(strategies: &[GuessingStrategy], trials_per: usize, rng: &mut Rng) -> Result<f64> {
    let mut wins = 0usize;
    let mut total = 0usize;
    for strategy in strategies {
        for _ in 0..trials_per {
            let (s, guess) = strategy.play(rng)?;
            wins += usize::from(s == guess);
            total += 1;
        }
    }
    if total == 0 {
        return Err(invalid("trials", "no rounds played"));
    }
    Ok(wins as f64 / total as f64)
}

/// Monte Carlo estimate of Bob's chance of matching Eve's uniformly chosen
/// digit without any channel between them, pooled over `n_strategies`
/// Haar-random strategies.
pub fn proposition_monte_carlo(d: usize, n_strategies: usize, trials_per: usize, rng: &mut Rng) -> Result<f64> {
    let strategies = (0..n_strategies)
        .map(|_| GuessingStrategy::haar(d, rng))
        .collect::<Result<Vec<_>>>()?;
    guessing_success_rate(&strategies, trials_per, rng)
}

/// Fidelity between Bob⊗Eve's state after teleporting `|s⟩` through a pair
/// rotated by `family.unitary(i)` and attacked with `u_e` (Bell outcome
/// `(k, l)` imposed), and the prepare-and-measure form
/// `u_e[U_i|s + l⟩_B |0⟩_E]`.
pub fn bb84_correspondence_check(
    family: &MubFamily,
    u_e: &UnitaryOp,
    e_dim: usize,
    s: usize,
    i: usize,
    k: usize,
    l: usize,
) -> Result<f64> {
    let d = family.d();
    if u_e.dim() != d * e_dim {
        return Err(Error::DimensionMismatch {
            expected: d * e_dim,
            actual: u_e.dim(),
        });
    }
    if i >= family.len() || s >= d || k >= d || l >= d {
        return Err(invalid("outcome", "basis index or digit out of range"));
    }
    let rotation = family.unitary(i);
    let attacked = bell_pair(d, "A", "B")?
        .apply_unitary(rotation, &["B"])?
        .tensor(&StateVector::basis_state("E", e_dim, 0)?)?
        .apply_unitary(u_e, &["B", "E"])?;
    let joint = StateVector::basis_state("A'", d, s)?.tensor(&attacked)?;
    let protocol_state = bell_measure(&joint, "A'", "A", Outcome::Force(k * d + l))?.rest;

    let prepared = StateVector::basis_state("B", d, (s + l) % d)?
        .apply_unitary(rotation, &["B"])?
        .tensor(&StateVector::basis_state("E", e_dim, 0)?)?
        .apply_unitary(u_e, &["B", "E"])?;
    fidelity(&protocol_state, &prepared)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackReport {
    pub bob_alice_match_rate: f64,
    pub eve_alice_match_rate: f64,
    pub detected: bool,
}

fn match_rate(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

/// Match rates over every teleported digit of a session. Without decoded
/// digits Eve is credited with blind guessing, `1/d`.
pub fn attack_report(result: &KeyResult, eve_decoded_digits: Option<&[usize]>) -> AttackReport {
    AttackReport {
        bob_alice_match_rate: match_rate(&result.alice_digits, &result.bob_digits),
        eve_alice_match_rate: eve_decoded_digits
            .map(|eve| match_rate(&result.alice_digits, eve))
            .unwrap_or(1.0 / result.d as f64),
        detected: result.aborted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::mub_family;

    #[test]
    fn depolarizing_zero_is_identity() {
        let pair = bell_pair(3, "A", "B").unwrap();
        let mut rng = Rng::new(8);
        for _ in 0..200 {
            let out = apply_channel(&pair, "B", &ChannelModel::Depolarizing { p: 0.0 }, &mut rng).unwrap();
            assert_eq!(out.state, pair);
            assert!(!out.lost && out.eve.is_empty());
        }
    }

    #[test]
    fn depolarizing_one_always_applies_a_pauli() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let bell = crate::bases::bell_basis(2).unwrap();
        let mut rng = Rng::new(9);
        let mut seen = [0usize; 4];
        for _ in 0..400 {
            let out = apply_channel(&pair, "B", &ChannelModel::Depolarizing { p: 1.0 }, &mut rng).unwrap();
            let probs = out.state.outcome_probabilities(&["A", "B"], bell.basis()).unwrap();
            let hit = probs.iter().position(|&p| (p - 1.0).abs() < 1e-9).unwrap();
            seen[hit] += 1;
        }
        // identity included: every Bell state shows up
        assert!(seen.iter().all(|&n| n > 50), "{seen:?}");
    }

    #[test]
    fn loss_flags_but_keeps_state() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let mut rng = Rng::new(1);
        let lost = (0..1000)
            .filter(|_| {
                apply_channel(&pair, "B", &ChannelModel::Loss { p: 0.3 }, &mut rng)
                    .unwrap()
                    .lost
            })
            .count();
        assert!((250..350).contains(&lost), "{lost}");
        assert!(apply_channel(&pair, "B", &ChannelModel::Loss { p: 1.0 }, &mut rng).is_err());
    }

    #[test]
    fn substituted_attack_moves_genuine_half_to_eve() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let mut rng = Rng::new(3);
        let out = apply_channel(&pair, "B", &ChannelModel::substituted(2), &mut rng).unwrap();
        assert_eq!(out.state.labels(), vec!["A", "B~eve", "B", "B~eve.c"]);
        // A and Eve's copy are still the original pair
        let (_, kept) = out.state.factor_out(&["A", "B~eve"]).unwrap();
        assert!((fidelity(&kept, &bell_pair(2, "A", "B~eve").unwrap()).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(out.eve.held.as_deref(), Some("B~eve"));
    }

    #[test]
    fn fixed_substitute_is_spliced_in() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let eta = bell_pair(2, "x", "y").unwrap();
        let model = ChannelModel::SubstitutedAttack {
            strategy: EveStrategy::FixedSubstitute(eta),
        };
        let out = apply_channel(&pair, "B", &model, &mut Rng::new(0)).unwrap();
        let (_, sent) = out.state.factor_out(&["B", "B~eve.c"]).unwrap();
        assert!((fidelity(&sent, &bell_pair(2, "B", "B~eve.c").unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purified_identity_coupling_is_harmless() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let model = ChannelModel::PurifiedAttack {
            u_e: UnitaryOp::identity(4),
            e_dim: 2,
            readout: AncillaReadout::Blind,
        };
        let out = apply_channel(&pair, "B", &model, &mut Rng::new(0)).unwrap();
        let (rest, anc) = out.state.factor_out(&["B~eve.e"]).unwrap();
        assert!((fidelity(&rest, &pair).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&anc, &StateVector::basis_state("B~eve.e", 2, 0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purified_dimension_checked() {
        let pair = bell_pair(2, "A", "B").unwrap();
        let model = ChannelModel::PurifiedAttack {
            u_e: UnitaryOp::identity(6),
            e_dim: 2,
            readout: AncillaReadout::Blind,
        };
        assert!(matches!(
            apply_channel(&pair, "B", &model, &mut Rng::new(0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn controlled_shift_action() {
        let u = controlled_shift(3);
        for b in 0..3 {
            for e in 0..3 {
                let mut v = vec![Amplitude::new(0.0, 0.0); 9];
                v[b * 3 + e] = Amplitude::new(1.0, 0.0);
                let out = u.apply(&v);
                assert!((out[b * 3 + (e + b) % 3] - Amplitude::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = Rng::new(5);
        for dim in [2, 3, 4, 9] {
            assert!(haar_unitary(dim, &mut rng).unitarity_deviation() < 1e-9);
        }
    }

    #[test]
    fn constant_guess_hits_one_in_d() {
        let mut rng = Rng::new(12);
        let strat = GuessingStrategy::constant_guess(3, 0).unwrap();
        let n = 30_000;
        let rate = guessing_success_rate(&[strat], n, &mut rng).unwrap();
        let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
        assert!((rate - 1.0 / 3.0).abs() < 3.0 * sigma, "{rate}");
    }

    #[test]
    fn correspondence_trivial_coupling() {
        let fam = mub_family(2, 2).unwrap();
        for s in 0..2 {
            for i in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let f = bb84_correspondence_check(&fam, &UnitaryOp::identity(4), 2, s, i, k, l).unwrap();
                        assert!((f - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }

    /// Oracle: with `U_0 = I` and a controlled shift, the prepared state is
    /// `|s+l⟩_B |s+l⟩_E` with every other amplitude zero.
    #[test]
    fn correspondence_controlled_shift_direct_amplitudes() {
        let fam = mub_family(2, 2).unwrap();
        let u = controlled_shift(2);
        for s in 0..2 {
            for l in 0..2 {
                let f = bb84_correspondence_check(&fam, &u, 2, s, 0, 1, l).unwrap();
                assert!((f - 1.0).abs() < 1e-9);
                let v = (s + l) % 2;
                let mut amps = vec![Amplitude::new(0.0, 0.0); 4];
                amps[v * 2 + v] = Amplitude::new(1.0, 0.0);
                let oracle = StateVector::new(vec![Subsystem::new("B", 2), Subsystem::new("E", 2)], amps).unwrap();
                let attacked = bell_pair(2, "A", "B")
                    .unwrap()
                    .tensor(&StateVector::basis_state("E", 2, 0).unwrap())
                    .unwrap()
                    .apply_unitary(&u, &["B", "E"])
                    .unwrap();
                let joint = StateVector::basis_state("A'", 2, s).unwrap().tensor(&attacked).unwrap();
                let rest = bell_measure(&joint, "A'", "A", Outcome::Force(2 + l)).unwrap().rest;
                assert!((fidelity(&rest, &oracle).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }
}
