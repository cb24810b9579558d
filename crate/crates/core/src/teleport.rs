//! Qudit teleportation through generalized Bell pairs.
//!
//! With the standard pair `|ψ_{0,0}⟩` and Bell outcome `(k, l)` on the
//! sender's two qudits, the receiver holds `X^l Z^{-k}|φ⟩` up to a global
//! phase; `Z^k X^{-l}` undoes it. The sender's measured pair is left in
//! `|ψ_{k,l}⟩` and can be rotated back to `|ψ_{0,0}⟩` locally.

use crate::bases::{bell_basis, ghz_basis, ghz_recycle_ops, GeneralizedPauli};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::state::{Measurement, MeasurementBasis, StateVector, UnitaryOp};

#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub k: usize,
    pub l: usize,
    pub probability: f64,
    /// The sender's measured pair (input qudit, sender half).
    pub sender_residual: StateVector,
    /// The receiver's qudit, before any correction.
    pub receiver_state: StateVector,
}

/// Bell measurement on two subsystems of a larger joint state.
#[derive(Debug, Clone)]
pub struct BellMeasurement {
    pub k: usize,
    pub l: usize,
    pub probability: f64,
    /// The measured pair, `|ψ_{k,l}⟩` on `(input, sender)`.
    pub residual: StateVector,
    /// Everything else.
    pub rest: StateVector,
}

/// Either sample an outcome or impose one.
#[derive(Debug)]
pub enum Outcome<'a> {
    Sample(&'a mut Rng),
    Force(usize),
}

fn run_measurement(
    state: &StateVector,
    targets: &[&str],
    basis: &MeasurementBasis,
    how: Outcome<'_>,
) -> Result<Measurement> {
    match how {
        Outcome::Sample(rng) => state.measure(targets, basis, rng),
        Outcome::Force(outcome) => {
            let (post_state, probability) = state.measure_forced(targets, basis, outcome)?;
            Ok(Measurement {
                outcome,
                probability,
                post_state,
            })
        }
    }
}

/// Measures `(input, sender)` of `state` in the generalized Bell basis and
/// splits the measured pair off.
pub fn bell_measure(state: &StateVector, input: &str, sender: &str, how: Outcome<'_>) -> Result<BellMeasurement> {
    let d = state.dim_of(input)?;
    let ds = state.dim_of(sender)?;
    if ds != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: ds,
        });
    }
    let bell = bell_basis(d)?;
    let m = run_measurement(state, &[input, sender], bell.basis(), how)?;
    let (k, l) = bell.outcome(m.outcome);
    let (rest, residual) = m.post_state.factor_out(&[input, sender])?;
    Ok(BellMeasurement {
        k,
        l,
        probability: m.probability,
        residual,
        rest,
    })
}

fn teleport_with(input: &StateVector, pair: &StateVector, how: Outcome<'_>) -> Result<TeleportOutcome> {
    if input.subsystems().len() != 1 || pair.subsystems().len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: input.subsystems().len() + pair.subsystems().len(),
        });
    }
    let d = input.dims()[0];
    if let Some(&bad) = pair.dims().iter().find(|&&x| x != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad,
        });
    }
    let joint = input.tensor(pair)?;
    let labels = pair.labels();
    let m = bell_measure(&joint, input.labels()[0], labels[0], how)?;
    Ok(TeleportOutcome {
        k: m.k,
        l: m.l,
        probability: m.probability,
        sender_residual: m.residual,
        receiver_state: m.rest,
    })
}

/// Teleports the single-qudit `input` through `pair` (sender half listed
/// first).
pub fn teleport(input: &StateVector, pair: &StateVector, rng: &mut Rng) -> Result<TeleportOutcome> {
    teleport_with(input, pair, Outcome::Sample(rng))
}

/// [`teleport`] with the Bell outcome `(k, l)` imposed.
pub fn teleport_forced(input: &StateVector, pair: &StateVector, k: usize, l: usize) -> Result<TeleportOutcome> {
    let d = input.dims().first().copied().unwrap_or(0);
    if k >= d || l >= d {
        return Err(crate::error::invalid(
            "outcome",
            format!("({k}, {l}) out of range for d = {d}"),
        ));
    }
    teleport_with(input, pair, Outcome::Force(k * d + l))
}

/// The receiver's byproduct `X^l Z^{-k}`, as a Pauli up to phase.
pub fn byproduct(d: usize, k: usize, l: usize) -> Result<GeneralizedPauli> {
    let x = GeneralizedPauli::new(d, 0, l as i64)?;
    let z = GeneralizedPauli::new(d, -(k as i64), 0)?;
    Ok(x.compose(&z).0)
}

/// `Z^k X^{-l}`, the inverse of the byproduct.
pub fn correction_pauli(d: usize, k: usize, l: usize) -> Result<GeneralizedPauli> {
    GeneralizedPauli::new(d, k as i64, -(l as i64))
}

pub fn correction_op(d: usize, k: usize, l: usize) -> Result<UnitaryOp> {
    Ok(correction_pauli(d, k, l)?.matrix())
}

/// Rotates the sender's residual `|ψ_{k,l}⟩` back to `|ψ_{0,0}⟩` by applying
/// `X^{-l} Z^{-k}` to its second qudit.
pub fn recycle(sender_residual: &StateVector, k: usize, l: usize) -> Result<StateVector> {
    let subs = sender_residual.subsystems();
    if subs.len() != 2 || subs[0].dim != subs[1].dim {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: subs.len(),
        });
    }
    let d = subs[0].dim;
    let op = GeneralizedPauli::new(d, 0, -(l as i64))?
        .matrix()
        .compose(&GeneralizedPauli::new(d, -(k as i64), 0)?.matrix())?;
    sender_residual.apply_unitary(&op, &[subs[1].label.as_str()])
}

/// Sign of the Bell pair left on `(A, B)` by a GHZ-basis outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairSign {
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|00⟩ − |11⟩)/√2`
    PhiMinus,
}

impl PairSign {
    /// Outcomes `a, b, e, f` leave `Φ⁺`; `c, d, g, h` leave `Φ⁻`.
    pub fn of_outcome(outcome: usize) -> PairSign {
        match outcome {
            0 | 1 | 4 | 5 => PairSign::PhiPlus,
            _ => PairSign::PhiMinus,
        }
    }

    pub fn code(self) -> i64 {
        match self {
            PairSign::PhiPlus => 0,
            PairSign::PhiMinus => 1,
        }
    }

    pub fn from_code(code: i64) -> Option<PairSign> {
        match code {
            0 => Some(PairSign::PhiPlus),
            1 => Some(PairSign::PhiMinus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GhzMeasurement {
    /// Index into [`crate::bases::GHZ_OUTCOMES`].
    pub outcome: usize,
    pub probability: f64,
    pub sign: PairSign,
    /// The measured three qubits, holding the outcome state.
    pub residual: StateVector,
    pub rest: StateVector,
}

/// Measures three qubits of `state` in the GHZ basis `|a⟩…|h⟩` and splits
/// them off.
pub fn ghz_measure(state: &StateVector, targets: [&str; 3], how: Outcome<'_>) -> Result<GhzMeasurement> {
    for t in targets {
        let dim = state.dim_of(t)?;
        if dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: dim,
            });
        }
    }
    let m = run_measurement(state, &targets, &ghz_basis(), how)?;
    let (rest, residual) = m.post_state.factor_out(&targets)?;
    Ok(GhzMeasurement {
        outcome: m.outcome,
        probability: m.probability,
        sign: PairSign::of_outcome(m.outcome),
        residual,
        rest,
    })
}

/// Teleports `flying` (two qubits, normally `|+⟩|+⟩`) into the first qubit
/// of `ghz` by measuring the three in the GHZ basis, leaving the other two
/// qubits of `ghz` in a signed Bell pair.
pub fn teleport_ghz(flying: &StateVector, ghz: &StateVector, how: Outcome<'_>) -> Result<GhzMeasurement> {
    if flying.dims() != [2, 2] || ghz.dims() != [2, 2, 2] {
        return Err(Error::DimensionMismatch {
            expected: 5,
            actual: flying.subsystems().len() + ghz.subsystems().len(),
        });
    }
    let joint = flying.tensor(ghz)?;
    let (f, g) = (flying.labels(), ghz.labels());
    ghz_measure(&joint, [f[0], f[1], g[0]], how)
}

/// Applies the recycling Paulis for `outcome` to the measured GHZ-basis
/// qubits, restoring `|a⟩ = (|000⟩ + |111⟩)/√2`.
pub fn recycle_ghz(residual: &StateVector, outcome: usize) -> Result<StateVector> {
    let labels = residual.labels();
    if labels.len() != 3 || outcome >= 8 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: labels.len(),
        });
    }
    let (p, q) = ghz_recycle_ops()[outcome];
    residual
        .apply_unitary(&p.matrix(), &[labels[1]])?
        .apply_unitary(&q.matrix(), &[labels[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{bell_pair, ghz_state, mub_family, pauli_matrix, plus_state};
    use crate::state::{fidelity, tensor, Amplitude, Subsystem};

    fn random_qudit(label: &str, d: usize, rng: &mut Rng) -> StateVector {
        let amps = (0..d)
            .map(|_| Amplitude::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
            .collect();
        StateVector::normalized(vec![Subsystem::new(label, d)], amps).unwrap()
    }

    #[test]
    fn identity_outcome_on_zero() {
        let input = StateVector::basis_state("A'", 2, 0).unwrap();
        let pair = bell_pair(2, "A", "B").unwrap();
        let out = teleport_forced(&input, &pair, 0, 0).unwrap();
        assert!((out.probability - 0.25).abs() < 1e-12);
        let expected = StateVector::basis_state("B", 2, 0).unwrap();
        assert!((fidelity(&out.receiver_state, &expected).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_forced_outcome_probability() {
        // Born rule by hand: |0⟩|ψ00⟩ = ½ Σ_{kl} |ψ_kl⟩ ⊗ ..., each branch ¼.
        let input = StateVector::basis_state("A'", 2, 0).unwrap();
        let pair = bell_pair(2, "A", "B").unwrap();
        let out = teleport_forced(&input, &pair, 1, 0).unwrap();
        assert!((out.probability - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rotated_pair_delivers_rotated_shifted_digit() {
        for d in [2usize, 3, 5] {
            let fam = mub_family(d, 3).unwrap();
            for b in 0..3 {
                let u = fam.unitary(b);
                let pair = bell_pair(d, "A", "B").unwrap().apply_unitary(u, &["B"]).unwrap();
                for s in 0..d {
                    let input = StateVector::basis_state("A'", d, s).unwrap();
                    for k in 0..d {
                        for l in 0..d {
                            let out = teleport_forced(&input, &pair, k, l).unwrap();
                            let expected = StateVector::basis_state("B", d, (s + l) % d)
                                .unwrap()
                                .apply_unitary(u, &["B"])
                                .unwrap();
                            let f = fidelity(&out.receiver_state, &expected).unwrap();
                            assert!((f - 1.0).abs() < 1e-9, "d={d} b={b} s={s} k={k} l={l}");
                        }
                    }
                }
            }
        }
    }

    /// Independent oracle: project the 3-qubit amplitude vector onto each
    /// Bell vector by explicit index arithmetic, then apply `Z^k X^{-l}` by
    /// hand.
    #[test]
    fn qubit_round_trip_against_direct_projection() {
        let mut rng = Rng::new(11);
        let h = 1.0 / 2f64.sqrt();
        for _ in 0..20 {
            let input = random_qudit("A'", 2, &mut rng);
            let (a0, a1) = (input.amplitudes()[0], input.amplitudes()[1]);
            for k in 0..2 {
                for l in 0..2 {
                    // |ψ_kl⟩ = (|0,l⟩ + (-1)^k |1,1+l⟩)/√2 on A'A; joint index (a', a, b)
                    let sign = if k == 1 { -1.0 } else { 1.0 };
                    let joint = [a0, a1];
                    let mut bob = [Amplitude::new(0.0, 0.0); 2];
                    for (bval, slot) in bob.iter_mut().enumerate() {
                        // ⟨ψ_kl| (Σ_s a_s |s⟩ ⊗ (|00⟩+|11⟩)/√2) restricted to B = bval
                        let mut acc = Amplitude::new(0.0, 0.0);
                        for (j, coef) in [(0usize, 1.0), (1usize, sign)] {
                            let a_idx = (j + l) % 2;
                            // A and B equal in the pair
                            if a_idx == bval {
                                acc += joint[j] * h * h * coef;
                            }
                        }
                        *slot = acc;
                    }
                    let p: f64 = bob.iter().map(|x| x.norm_sqr()).sum();
                    assert!((p - 0.25).abs() < 1e-12);
                    // Z^k X^{-l} (X^{-1} = X for qubits)
                    let mut corrected = if l == 1 { [bob[1], bob[0]] } else { bob };
                    if k == 1 {
                        corrected[1] = -corrected[1];
                    }
                    let oracle = StateVector::normalized(vec![Subsystem::new("B", 2)], corrected.to_vec()).unwrap();
                    assert!((fidelity(&oracle, &input.relabel("A'", "B").unwrap()).unwrap() - 1.0).abs() < 1e-9);

                    let out = teleport_forced(&input, &bell_pair(2, "A", "B").unwrap(), k, l).unwrap();
                    let fixed = out
                        .receiver_state
                        .apply_unitary(&correction_op(2, k, l).unwrap(), &["B"])
                        .unwrap();
                    assert!((fidelity(&fixed, &oracle).unwrap() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn correction_examples() {
        assert_eq!(correction_op(3, 0, 0).unwrap(), UnitaryOp::identity(3));
        let zx = pauli_matrix(2, 1, 0)
            .unwrap()
            .compose(&pauli_matrix(2, 0, 1).unwrap())
            .unwrap();
        assert!(correction_op(2, 1, 1).unwrap().distance_up_to_phase(&zx) < 1e-12);
    }

    #[test]
    fn correction_inverts_byproduct() {
        for d in [2usize, 3, 5] {
            for k in 0..d {
                for l in 0..d {
                    let prod = correction_op(d, k, l)
                        .unwrap()
                        .compose(&byproduct(d, k, l).unwrap().matrix())
                        .unwrap();
                    assert!(prod.distance_up_to_phase(&UnitaryOp::identity(d)) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn qutrit_all_outcomes_round_trip() {
        let mut rng = Rng::new(2);
        let input = random_qudit("A'", 3, &mut rng);
        let pair = bell_pair(3, "A", "B").unwrap();
        for k in 0..3 {
            for l in 0..3 {
                let out = teleport_forced(&input, &pair, k, l).unwrap();
                let fixed = out
                    .receiver_state
                    .apply_unitary(&correction_op(3, k, l).unwrap(), &["B"])
                    .unwrap();
                assert!((fidelity(&fixed, &input).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn residual_is_bell_vector_and_recycles() {
        let mut rng = Rng::new(4);
        for d in [2usize, 3, 5] {
            let bell = bell_basis(d).unwrap();
            let standard = bell_pair(d, "A'", "A").unwrap();
            let input = random_qudit("A'", d, &mut rng);
            let pair = bell_pair(d, "A", "B").unwrap();
            for k in 0..d {
                for l in 0..d {
                    let out = teleport_forced(&input, &pair, k, l).unwrap();
                    let f = fidelity(&out.sender_residual, &bell.state(k, l, "A'", "A").unwrap()).unwrap();
                    assert!((f - 1.0).abs() < 1e-9);
                    let back = recycle(&out.sender_residual, k, l).unwrap();
                    assert!((fidelity(&back, &standard).unwrap() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn standard_residual_recycles_to_itself() {
        let pair = bell_pair(3, "A'", "A").unwrap();
        assert!((fidelity(&recycle(&pair, 0, 0).unwrap(), &pair).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn teleport_rejects_mismatched_dims() {
        let input = StateVector::basis_state("A'", 3, 0).unwrap();
        let pair = bell_pair(2, "A", "B").unwrap();
        let mut rng = Rng::new(0);
        assert!(matches!(
            teleport(&input, &pair, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ghz_forced_branches() {
        let flying = tensor(&[plus_state("C1"), plus_state("C2")]).unwrap();
        let ghz = ghz_state(["C", "A", "B"]);
        let h = 1.0 / 2f64.sqrt();
        let subs = vec![Subsystem::new("A", 2), Subsystem::new("B", 2)];
        let phi_plus = StateVector::new(
            subs.clone(),
            vec![
                Amplitude::new(h, 0.0),
                Amplitude::new(0.0, 0.0),
                Amplitude::new(0.0, 0.0),
                Amplitude::new(h, 0.0),
            ],
        )
        .unwrap();
        let phi_minus = StateVector::new(
            subs,
            vec![
                Amplitude::new(h, 0.0),
                Amplitude::new(0.0, 0.0),
                Amplitude::new(0.0, 0.0),
                Amplitude::new(-h, 0.0),
            ],
        )
        .unwrap();
        for outcome in 0..8 {
            let m = teleport_ghz(&flying, &ghz, Outcome::Force(outcome)).unwrap();
            assert!((m.probability - 0.125).abs() < 1e-12);
            let target = if matches!(outcome, 0 | 1 | 4 | 5) {
                &phi_plus
            } else {
                &phi_minus
            };
            assert_eq!(m.sign, PairSign::of_outcome(outcome));
            assert!(
                (fidelity(&m.rest, target).unwrap() - 1.0).abs() < 1e-12,
                "outcome {outcome}"
            );
            let back = recycle_ghz(&m.residual, outcome).unwrap();
            assert!((fidelity(&back, &ghz_state(["C1", "C2", "C"])).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_rejects_wrong_dims() {
        let flying = tensor(&[plus_state("C1"), plus_state("C2")]).unwrap();
        let not_ghz = tensor(&[
            StateVector::basis_state("C", 3, 0).unwrap(),
            StateVector::basis_state("A", 2, 0).unwrap(),
            StateVector::basis_state("B", 2, 0).unwrap(),
        ])
        .unwrap();
        assert!(teleport_ghz(&flying, &not_ghz, Outcome::Force(0)).is_err());
    }
}
