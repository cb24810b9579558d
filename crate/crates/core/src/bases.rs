//! Generalized Pauli operators and the structured bases built from them:
//! Fourier and quadratic-phase mutually unbiased bases, the generalized Bell
//! basis, and the eight-element three-qubit basis used to swap GHZ
//! entanglement onto two parties.
//!
//! Conventions: `ω = exp(2πi/d)`, `X|j⟩ = |j+1 mod d⟩`, `Z|j⟩ = ω^j|j⟩`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::state::{Amplitude, MeasurementBasis, StateVector, Subsystem, UnitaryOp};

/// `ω^k` for `ω = exp(2πi/d)`, reducing `k` mod `d` first so equal
/// exponents produce bit-identical values.
pub fn omega_pow(d: usize, k: i64) -> Amplitude {
    let k = k.rem_euclid(d as i64);
    match (d, k) {
        (_, 0) => Amplitude::new(1.0, 0.0),
        (2, 1) => Amplitude::new(-1.0, 0.0),
        (4, 1) => Amplitude::new(0.0, 1.0),
        (4, 3) => Amplitude::new(0.0, -1.0),
        _ => Amplitude::from_polar(1.0, 2.0 * PI * k as f64 / d as f64),
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

/// `Z^z X^x` in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneralizedPauli {
    d: usize,
    z: usize,
    x: usize,
}

impl GeneralizedPauli {
    /// Exponents are reduced mod `d`.
    pub fn new(d: usize, z: i64, x: i64) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", format!("dimension must be at least 2, got {d}")));
        }
        Ok(Self {
            d,
            z: z.rem_euclid(d as i64) as usize,
            x: x.rem_euclid(d as i64) as usize,
        })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, 0, 0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn matrix(&self) -> UnitaryOp {
        let d = self.d;
        // column j: Z^z X^x |j⟩ = ω^{z(j+x)} |j+x⟩
        UnitaryOp::from_fn(d, |row, col| {
            if row == (col + self.x) % d {
                omega_pow(d, (self.z * row) as i64)
            } else {
                Amplitude::new(0.0, 0.0)
            }
        })
        .expect("generalized Pauli matrices are unitary")
    }

    /// `self · rhs = ω^phase · product`, returned as `(product, phase)`.
    pub fn compose(&self, rhs: &GeneralizedPauli) -> (GeneralizedPauli, usize) {
        assert_eq!(self.d, rhs.d, "composing Paulis of different dimension");
        let d = self.d;
        // X^x Z^z' = ω^{-z'x} Z^z' X^x
        let phase = (d - (rhs.z * self.x) % d) % d;
        let product = GeneralizedPauli {
            d,
            z: (self.z + rhs.z) % d,
            x: (self.x + rhs.x) % d,
        };
        (product, phase)
    }

    /// `self⁻¹ = ω^phase · inverse`, returned as `(inverse, phase)`.
    pub fn inverse(&self) -> (GeneralizedPauli, usize) {
        let d = self.d;
        let inverse = GeneralizedPauli {
            d,
            z: (d - self.z) % d,
            x: (d - self.x) % d,
        };
        (inverse, (d - (self.z * self.x) % d) % d)
    }
}

/// Matrix of `Z^a X^b` in dimension `d`.
pub fn pauli_matrix(d: usize, a: i64, b: i64) -> Result<UnitaryOp> {
    Ok(GeneralizedPauli::new(d, a, b)?.matrix())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(invalid("d", format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// Vector `j` has amplitude `ω^{ij}/√d` at position `i`.
pub fn fourier_basis(d: usize) -> Result<MeasurementBasis> {
    check_dim(d)?;
    quadratic_phase_basis(d, 0)
}

/// Vector `j` has amplitude `ω^{t i² + j i}/√d` at position `i`.
fn quadratic_phase_basis(d: usize, t: usize) -> Result<MeasurementBasis> {
    let norm = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|j| {
            (0..d)
                .map(|i| omega_pow(d, (t * i * i + j * i) as i64) * norm)
                .collect()
        })
        .collect();
    MeasurementBasis::new(vectors)
}

fn qubit_y_basis() -> MeasurementBasis {
    let h = 1.0 / 2f64.sqrt();
    MeasurementBasis::new(vec![
        vec![Amplitude::new(h, 0.0), Amplitude::new(0.0, h)],
        vec![Amplitude::new(h, 0.0), Amplitude::new(0.0, -h)],
    ])
    .expect("Y eigenbasis is orthonormal")
}

/// A set of pairwise mutually unbiased bases together with the unitaries
/// `U_i` mapping the computational basis onto each (`U_i|j⟩` is vector `j`
/// of basis `i`). Basis 0 is always the computational basis.
#[derive(Debug, Clone)]
pub struct MubFamily {
    d: usize,
    bases: Vec<MeasurementBasis>,
    unitaries: Vec<UnitaryOp>,
}

impl MubFamily {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn basis(&self, i: usize) -> &MeasurementBasis {
        &self.bases[i]
    }

    pub fn bases(&self) -> &[MeasurementBasis] {
        &self.bases
    }

    pub fn unitary(&self, i: usize) -> &UnitaryOp {
        &self.unitaries[i]
    }

    pub fn unitaries(&self) -> &[UnitaryOp] {
        &self.unitaries
    }

    /// Largest deviation of any cross-basis squared overlap from `1/d`.
    pub fn unbiasedness_deviation(&self) -> f64 {
        let target = 1.0 / self.d as f64;
        let mut worst: f64 = 0.0;
        for (i, bi) in self.bases.iter().enumerate() {
            for bj in &self.bases[i + 1..] {
                for u in bi.vectors() {
                    for v in bj.vectors() {
                        let ip: Amplitude = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                        worst = worst.max((ip.norm_sqr() - target).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Largest family [`mub_family`] can build for a prime `d`.
pub fn max_mubs(d: usize) -> usize {
    d + 1
}

/// `m` pairwise unbiased bases for prime `d`: computational, Fourier, then
/// quadratic-phase bases `t = 1..d-1` (the `Y` eigenbasis when `d = 2`).
pub fn mub_family(d: usize, m: usize) -> Result<MubFamily> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    if m < 2 || m > max_mubs(d) {
        return Err(invalid(
            "m",
            format!("need 2 <= m <= {} for d = {d}, got {m}", max_mubs(d)),
        ));
    }
    let mut bases = vec![MeasurementBasis::computational(d), fourier_basis(d)?];
    if d == 2 {
        bases.push(qubit_y_basis());
    } else {
        for t in 1..d {
            bases.push(quadratic_phase_basis(d, t)?);
        }
    }
    bases.truncate(m);
    let unitaries = bases
        .iter()
        .map(|b| UnitaryOp::from_columns(b.vectors()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MubFamily { d, bases, unitaries })
}

/// The `d²` generalized Bell states; vector `(k, l)` sits at `k·d + l` and
/// equals `(1/√d) Σ_j ω^{jk} |j⟩|j+l⟩`.
#[derive(Debug, Clone)]
pub struct BellBasis {
    d: usize,
    basis: MeasurementBasis,
}

impl BellBasis {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    pub fn index(&self, k: usize, l: usize) -> usize {
        k * self.d + l
    }

    /// `(k, l)` for a measurement outcome index.
    pub fn outcome(&self, index: usize) -> (usize, usize) {
        (index / self.d, index % self.d)
    }

    /// Vector `(k, l)` as a state on two labeled qudits.
    pub fn state(&self, k: usize, l: usize, first: &str, second: &str) -> Result<StateVector> {
        self.basis.state(
            self.index(k, l),
            vec![Subsystem::new(first, self.d), Subsystem::new(second, self.d)],
        )
    }
}

pub fn bell_basis(d: usize) -> Result<BellBasis> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let vectors = (0..d * d)
        .map(|idx| {
            let (k, l) = (idx / d, idx % d);
            let mut v = vec![Amplitude::new(0.0, 0.0); d * d];
            for j in 0..d {
                v[j * d + (j + l) % d] = omega_pow(d, (j * k) as i64) * norm;
            }
            v
        })
        .collect();
    Ok(BellBasis {
        d,
        basis: MeasurementBasis::new(vectors)?,
    })
}

/// `|ψ_{0,0}⟩ = (1/√d) Σ_j |j⟩|j⟩` on two labeled qudits.
pub fn bell_pair(d: usize, first: &str, second: &str) -> Result<StateVector> {
    bell_basis(d)?.state(0, 0, first, second)
}

/// `(|0⟩ + |1⟩)/√2`.
pub fn plus_state(label: &str) -> StateVector {
    let h = 1.0 / 2f64.sqrt();
    StateVector::qudit(label, vec![Amplitude::new(h, 0.0), Amplitude::new(h, 0.0)]).expect("normalized")
}

/// `(|000⟩ + |111⟩)/√2` on three labeled qubits.
pub fn ghz_state(labels: [&str; 3]) -> StateVector {
    ghz_basis()
        .state(0, labels.iter().map(|l| Subsystem::new(*l, 2)).collect())
        .expect("normalized")
}

/// Outcome names of [`ghz_basis`], in index order.
pub const GHZ_OUTCOMES: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

/// Three-qubit orthonormal basis `|a⟩ … |h⟩`:
///
/// ```text
/// a = (|000⟩ + |111⟩)/√2    e = (|010⟩ + |101⟩)/√2
/// b = (|001⟩ + |110⟩)/√2    f = (|011⟩ + |100⟩)/√2
/// c = (|000⟩ − |111⟩)/√2    g = (|100⟩ − |011⟩)/√2
/// d = (|001⟩ − |110⟩)/√2    h = (|101⟩ − |010⟩)/√2
/// ```
pub fn ghz_basis() -> MeasurementBasis {
    let h = 1.0 / 2f64.sqrt();
    let terms: [(usize, f64, usize, f64); 8] = [
        (0b000, h, 0b111, h),
        (0b001, h, 0b110, h),
        (0b000, h, 0b111, -h),
        (0b001, h, 0b110, -h),
        (0b010, h, 0b101, h),
        (0b011, h, 0b100, h),
        (0b100, h, 0b011, -h),
        (0b101, h, 0b010, -h),
    ];
    let vectors = terms
        .iter()
        .map(|&(i, a, j, b)| {
            let mut v = vec![Amplitude::new(0.0, 0.0); 8];
            v[i] = Amplitude::new(a, 0.0);
            v[j] = Amplitude::new(b, 0.0);
            v
        })
        .collect();
    MeasurementBasis::new(vectors).expect("GHZ basis is orthonormal")
}

/// Local Paulis on the second and third qubits taking `|a⟩` to each basis
/// element (up to sign).
pub fn ghz_outcome_ops() -> [(GeneralizedPauli, GeneralizedPauli); 8] {
    let p = |z, x| GeneralizedPauli::new(2, z, x).expect("d = 2");
    [
        (p(0, 0), p(0, 0)),
        (p(0, 0), p(0, 1)),
        (p(1, 0), p(0, 0)),
        (p(1, 0), p(0, 1)),
        (p(0, 1), p(0, 0)),
        (p(0, 1), p(0, 1)),
        (p(1, 1), p(0, 1)),
        // ZX on the second qubit; Z alone would give c
        (p(1, 1), p(0, 0)),
    ]
}

/// For each outcome of [`ghz_basis`], the local Paulis on the second and
/// third qubits that bring the outcome state back to `|a⟩` (up to phase).
pub fn ghz_recycle_ops() -> [(GeneralizedPauli, GeneralizedPauli); 8] {
    ghz_outcome_ops().map(|(p, q)| (p.inverse().0, q.inverse().0))
}
