//! Dense pure-state simulation over labeled qudit subsystems.
//!
//! Amplitudes are stored in mixed-radix order with the first-listed
//! subsystem as the most significant digit: for subsystems `[A (dA), B (dB)]`
//! the amplitude of `|a⟩_A|b⟩_B` sits at index `a * dB + b`. Every routine
//! in the crate (operators on several targets, measurement bases on several
//! targets, tensor products) follows the same convention, with the target
//! list order playing the role of subsystem order.
//!
//! Global phase is never normalized away; only [`fidelity`] ignores it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type Amplitude = Complex64;

/// Largest state the engine will build.
pub const MAX_AMPLITUDES: usize = 1 << 16;
/// Tolerance for algebraic identities (norms, unitarity, orthonormality).
pub const TOLERANCE: f64 = 1e-9;
/// Outcomes below this probability are treated as impossible.
pub const IMPOSSIBLE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    subsystems: Vec<Subsystem>,
    amplitudes: Vec<Amplitude>,
}

/// Result of a sampled projective measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: usize,
    /// Exact Born probability of `outcome`.
    pub probability: f64,
    /// Renormalized post-measurement state; the measured subsystems are kept
    /// and hold the outcome vector.
    pub post_state: StateVector,
}

fn check_layout(subsystems: &[Subsystem]) -> Result<usize> {
    let mut total: usize = 1;
    for (i, s) in subsystems.iter().enumerate() {
        if s.dim == 0 {
            return Err(crate::error::invalid(
                "dim",
                format!("subsystem `{}` has dimension 0", s.label),
            ));
        }
        if subsystems[..i].iter().any(|o| o.label == s.label) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
        total = total
            .checked_mul(s.dim)
            .filter(|&t| t <= MAX_AMPLITUDES)
            .ok_or(Error::TooLarge(total.saturating_mul(s.dim)))?;
    }
    Ok(total)
}

/// Offsets of every configuration of the given `(dim, stride)` digits, the
/// first digit most significant.
fn digit_offsets(digits: &[(usize, usize)]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &(dim, stride) in digits {
        offsets = offsets
            .iter()
            .flat_map(|&o| (0..dim).map(move |v| o + v * stride))
            .collect();
    }
    offsets
}

/// Index bookkeeping for acting on a group of target subsystems.
struct Partition {
    targets: Vec<usize>,
    target_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl StateVector {
    pub fn new(subsystems: Vec<Subsystem>, amplitudes: Vec<Amplitude>) -> Result<Self> {
        let total = check_layout(&subsystems)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { subsystems, amplitudes })
    }

    /// Like [`StateVector::new`] but rescales the amplitudes to unit norm first.
    pub fn normalized(subsystems: Vec<Subsystem>, mut amplitudes: Vec<Amplitude>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(subsystems, amplitudes)
    }

    /// A single qudit holding `amplitudes`.
    pub fn qudit(label: impl Into<String>, amplitudes: Vec<Amplitude>) -> Result<Self> {
        let dim = amplitudes.len();
        Self::new(vec![Subsystem::new(label, dim)], amplitudes)
    }

    /// The computational basis state `|index⟩` of one qudit.
    pub fn basis_state(label: impl Into<String>, dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(crate::error::invalid(
                "index",
                format!("{index} out of range for dimension {dim}"),
            ));
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Self::qudit(label, amps)
    }

    /// Computational basis state over several subsystems, one digit each.
    pub fn product_basis_state(subsystems: Vec<Subsystem>, digits: &[usize]) -> Result<Self> {
        let total = check_layout(&subsystems)?;
        if digits.len() != subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: subsystems.len(),
                actual: digits.len(),
            });
        }
        let mut index = 0;
        for (s, &d) in subsystems.iter().zip(digits) {
            if d >= s.dim {
                return Err(crate::error::invalid(
                    "digits",
                    format!("digit {d} out of range for `{}`", s.label),
                ));
            }
            index = index * s.dim + d;
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); total];
        amps[index] = Amplitude::new(1.0, 0.0);
        Self::new(subsystems, amps)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn has(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    /// Amplitude of the computational basis state with the given digits.
    pub fn amplitude(&self, digits: &[usize]) -> Amplitude {
        let index = digits
            .iter()
            .zip(&self.subsystems)
            .fold(0, |acc, (&d, s)| acc * s.dim + d);
        self.amplitudes[index]
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.subsystems.len()];
        for i in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subsystems[i + 1].dim;
        }
        strides
    }

    fn partition(&self, targets: &[&str]) -> Result<Partition> {
        let mut positions = Vec::with_capacity(targets.len());
        for &t in targets {
            let p = self.position(t)?;
            if positions.contains(&p) {
                return Err(Error::DuplicateLabel(t.to_owned()));
            }
            positions.push(p);
        }
        let strides = self.strides();
        let target_digits: Vec<_> = positions
            .iter()
            .map(|&p| (self.subsystems[p].dim, strides[p]))
            .collect();
        let rest_digits: Vec<_> = (0..self.subsystems.len())
            .filter(|p| !positions.contains(p))
            .map(|p| (self.subsystems[p].dim, strides[p]))
            .collect();
        Ok(Partition {
            targets: positions,
            target_offsets: digit_offsets(&target_digits),
            rest_offsets: digit_offsets(&rest_digits),
        })
    }

    fn with_amplitudes(&self, amplitudes: Vec<Amplitude>) -> Self {
        Self {
            subsystems: self.subsystems.clone(),
            amplitudes,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_layout(&subsystems)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { subsystems, amplitudes })
    }

    /// Applies `op` to `targets` (in the listed order) and the identity
    /// elsewhere.
    pub fn apply_unitary(&self, op: &UnitaryOp, targets: &[&str]) -> Result<StateVector> {
        let part = self.partition(targets)?;
        if part.target_offsets.len() != op.dim {
            return Err(Error::DimensionMismatch {
                expected: op.dim,
                actual: part.target_offsets.len(),
            });
        }
        let mut out = vec![Amplitude::new(0.0, 0.0); self.amplitudes.len()];
        let mut local = vec![Amplitude::new(0.0, 0.0); op.dim];
        for &base in &part.rest_offsets {
            for (slot, &off) in local.iter_mut().zip(&part.target_offsets) {
                *slot = self.amplitudes[base + off];
            }
            for (row, &off) in part.target_offsets.iter().enumerate() {
                out[base + off] = (0..op.dim).map(|col| op.get(row, col) * local[col]).sum();
            }
        }
        Ok(self.with_amplitudes(out))
    }

    /// Projection coefficients `⟨v|_targets |self⟩` for each rest
    /// configuration, and the resulting Born probability.
    fn project(&self, part: &Partition, vector: &[Amplitude]) -> (Vec<Amplitude>, f64) {
        let coeffs: Vec<Amplitude> = part
            .rest_offsets
            .iter()
            .map(|&base| {
                part.target_offsets
                    .iter()
                    .zip(vector)
                    .map(|(&off, v)| v.conj() * self.amplitudes[base + off])
                    .sum()
            })
            .collect();
        let p = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (coeffs, p)
    }

    fn check_basis(&self, part: &Partition, basis: &MeasurementBasis) -> Result<()> {
        if part.target_offsets.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                actual: part.target_offsets.len(),
            });
        }
        Ok(())
    }

    fn collapse(&self, part: &Partition, vector: &[Amplitude], coeffs: &[Amplitude], p: f64) -> StateVector {
        let scale = 1.0 / p.sqrt();
        let mut out = vec![Amplitude::new(0.0, 0.0); self.amplitudes.len()];
        for (&base, &c) in part.rest_offsets.iter().zip(coeffs) {
            for (&off, &v) in part.target_offsets.iter().zip(vector) {
                out[base + off] = v * c * scale;
            }
        }
        self.with_amplitudes(out)
    }

    /// Born probabilities of every outcome of `basis` on `targets`.
    pub fn outcome_probabilities(&self, targets: &[&str], basis: &MeasurementBasis) -> Result<Vec<f64>> {
        let part = self.partition(targets)?;
        self.check_basis(&part, basis)?;
        Ok(basis.vectors().iter().map(|v| self.project(&part, v).1).collect())
    }

    /// Projective measurement of `targets` in `basis`, sampled with `rng`.
    pub fn measure(&self, targets: &[&str], basis: &MeasurementBasis, rng: &mut Rng) -> Result<Measurement> {
        let probabilities = self.outcome_probabilities(targets, basis)?;
        let total: f64 = probabilities.iter().sum();
        let draw = rng.uniform() * total;
        let mut acc = 0.0;
        let mut outcome = None;
        for (i, &p) in probabilities.iter().enumerate() {
            if p < IMPOSSIBLE {
                continue;
            }
            acc += p;
            outcome = Some(i);
            if draw < acc {
                break;
            }
        }
        let outcome = outcome.ok_or(Error::ImpossibleOutcome {
            outcome: 0,
            probability: total,
        })?;
        let (post_state, probability) = self.measure_forced(targets, basis, outcome)?;
        Ok(Measurement {
            outcome,
            probability,
            post_state,
        })
    }

    /// Measurement with the outcome imposed. Fails if the outcome's
    /// probability is below [`IMPOSSIBLE`].
    pub fn measure_forced(
        &self,
        targets: &[&str],
        basis: &MeasurementBasis,
        outcome: usize,
    ) -> Result<(StateVector, f64)> {
        let part = self.partition(targets)?;
        self.check_basis(&part, basis)?;
        let vector = basis.vectors().get(outcome).ok_or(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: outcome,
        })?;
        let (coeffs, p) = self.project(&part, vector);
        if p < IMPOSSIBLE {
            return Err(Error::ImpossibleOutcome {
                outcome,
                probability: p,
            });
        }
        Ok((self.collapse(&part, vector, &coeffs, p), p))
    }

    /// Splits off `labels`, which must be in a product state with the rest.
    /// Returns `(rest, part)`; `part` keeps the order of `labels`. The global
    /// phase is carried by `rest`.
    pub fn factor_out(&self, labels: &[&str]) -> Result<(StateVector, StateVector)> {
        let part = self.partition(labels)?;
        let not_separable = || Error::NotSeparable(labels.iter().map(|l| l.to_string()).collect());
        let rest_subsystems: Vec<Subsystem> = (0..self.subsystems.len())
            .filter(|p| !part.targets.contains(p))
            .map(|p| self.subsystems[p].clone())
            .collect();
        let part_subsystems: Vec<Subsystem> = part.targets.iter().map(|&p| self.subsystems[p].clone()).collect();

        // The largest amplitude picks a rest configuration with a nonzero
        // slice; that slice is proportional to the factored state.
        let best_base = part
            .rest_offsets
            .iter()
            .flat_map(|&b| part.target_offsets.iter().map(move |&o| (b, o)))
            .max_by(|x, y| {
                let ax = self.amplitudes[x.0 + x.1].norm_sqr();
                let ay = self.amplitudes[y.0 + y.1].norm_sqr();
                ax.total_cmp(&ay)
            })
            .map(|(b, _)| b)
            .ok_or_else(not_separable)?;
        let slice: Vec<Amplitude> = part
            .target_offsets
            .iter()
            .map(|&o| self.amplitudes[best_base + o])
            .collect();
        let slice_norm: f64 = slice.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let factor: Vec<Amplitude> = slice.iter().map(|a| a / slice_norm).collect();

        let rest: Vec<Amplitude> = part
            .rest_offsets
            .iter()
            .map(|&b| {
                part.target_offsets
                    .iter()
                    .zip(&factor)
                    .map(|(&o, f)| f.conj() * self.amplitudes[b + o])
                    .sum()
            })
            .collect();

        let mut deviation: f64 = 0.0;
        for (&b, r) in part.rest_offsets.iter().zip(&rest) {
            for (&o, f) in part.target_offsets.iter().zip(&factor) {
                deviation = deviation.max((self.amplitudes[b + o] - r * f).norm());
            }
        }
        if deviation > 1e-7 {
            return Err(not_separable());
        }
        Ok((
            StateVector::normalized(rest_subsystems, rest)?,
            StateVector::normalized(part_subsystems, factor)?,
        ))
    }

    /// Measures `labels` in the computational basis and drops them. Used to
    /// discard registers no later operation touches; the reduced state of the
    /// remaining subsystems is unaffected on average.
    pub fn discard(&self, labels: &[&str], rng: &mut Rng) -> Result<StateVector> {
        let dim: usize = labels.iter().map(|l| self.dim_of(l)).product::<Result<usize>>()?;
        let m = self.measure(labels, &MeasurementBasis::computational(dim), rng)?;
        Ok(m.post_state.factor_out(labels)?.0)
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<StateVector> {
        let p = self.position(from)?;
        if from != to && self.has(to) {
            return Err(Error::DuplicateLabel(to.to_owned()));
        }
        let mut out = self.clone();
        out.subsystems[p].label = to.to_owned();
        Ok(out)
    }

    /// Same state with subsystems listed in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<StateVector> {
        if order.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                actual: order.len(),
            });
        }
        let part = self.partition(order)?;
        let subsystems = part.targets.iter().map(|&p| self.subsystems[p].clone()).collect();
        let amplitudes = part.target_offsets.iter().map(|&o| self.amplitudes[o]).collect();
        Ok(StateVector { subsystems, amplitudes })
    }

    /// `⟨self|other⟩`, matching subsystems by position.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Kronecker product of all parts in order.
pub fn tensor(parts: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| crate::error::invalid("parts", "empty tensor product"))?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.tensor(p))
}

/// `|⟨a|b⟩|²`. When both states carry the same label set, `b` is first
/// brought into `a`'s subsystem order; otherwise subsystems are matched by
/// position.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let mut la = a.labels();
    let mut lb = b.labels();
    la.sort_unstable();
    lb.sort_unstable();
    let overlap = if la == lb && a.labels() != b.labels() {
        a.inner(&b.reorder(&a.labels())?)?
    } else {
        a.inner(b)?
    };
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// Square unitary matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl UnitaryOp {
    pub fn new(dim: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let op = Self { dim, entries };
        let dev = op.unitarity_deviation();
        if dev > TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(op)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Amplitude) -> Result<Self> {
        let entries = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Self::new(dim, entries)
    }

    /// Operator whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<Amplitude>]) -> Result<Self> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: columns.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Self::from_fn(dim, |r, c| columns[c][r])
    }

    pub fn identity(dim: usize) -> Self {
        let entries = (0..dim * dim)
            .map(|i| {
                if i / dim == i % dim {
                    Amplitude::new(1.0, 0.0)
                } else {
                    Amplitude::new(0.0, 0.0)
                }
            })
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn column(&self, col: usize) -> Vec<Amplitude> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn adjoint(&self) -> UnitaryOp {
        let dim = self.dim;
        let entries = (0..dim * dim).map(|i| self.get(i % dim, i / dim).conj()).collect();
        UnitaryOp { dim, entries }
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &UnitaryOp) -> Result<UnitaryOp> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let dim = self.dim;
        let entries = (0..dim * dim)
            .map(|i| {
                let (r, c) = (i / dim, i % dim);
                (0..dim).map(|k| self.get(r, k) * rhs.get(k, c)).sum()
            })
            .collect();
        Ok(UnitaryOp { dim, entries })
    }

    /// `self ⊗ rhs`, with `self` acting on the more significant digit.
    pub fn kron(&self, rhs: &UnitaryOp) -> UnitaryOp {
        let dim = self.dim * rhs.dim;
        let entries = (0..dim * dim)
            .map(|i| {
                let (r, c) = (i / dim, i % dim);
                self.get(r / rhs.dim, c / rhs.dim) * rhs.get(r % rhs.dim, c % rhs.dim)
            })
            .collect();
        UnitaryOp { dim, entries }
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> UnitaryOp {
        UnitaryOp {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn apply(&self, vector: &[Amplitude]) -> Vec<Amplitude> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * vector[c]).sum())
            .collect()
    }

    /// Largest entrywise deviation of `U·U†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let v: Amplitude = (0..dim).map(|k| self.get(r, k) * self.get(c, k).conj()).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to `other` after removing the best global
    /// phase.
    pub fn distance_up_to_phase(&self, other: &UnitaryOp) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let overlap: Amplitude = self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Amplitude::new(1.0, 0.0)
        };
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Ordered orthonormal basis of a `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    dim: usize,
    vectors: Vec<Vec<Amplitude>>,
}

impl MeasurementBasis {
    pub fn new(vectors: Vec<Vec<Amplitude>>) -> Result<Self> {
        let dim = vectors.len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        let basis = Self { dim, vectors };
        let dev = basis.orthonormality_deviation();
        if dev > TOLERANCE {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(basis)
    }

    pub fn computational(dim: usize) -> Self {
        let op = UnitaryOp::identity(dim);
        Self::from_unitary(&op)
    }

    /// The columns of `op`: outcome `j` is `op|j⟩`.
    pub fn from_unitary(op: &UnitaryOp) -> Self {
        Self {
            dim: op.dim(),
            vectors: (0..op.dim()).map(|c| op.column(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<Amplitude>] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> &[Amplitude] {
        &self.vectors[index]
    }

    /// Basis with every vector complex-conjugated.
    pub fn conjugate(&self) -> Self {
        Self {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|a| a.conj()).collect())
                .collect(),
        }
    }

    /// Outcome vector as a state on the given subsystems.
    pub fn state(&self, index: usize, subsystems: Vec<Subsystem>) -> Result<StateVector> {
        StateVector::new(subsystems, self.vectors[index].clone())
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate() {
                let ip: Amplitude = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }
}
