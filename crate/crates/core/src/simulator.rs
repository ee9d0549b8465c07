//! Dense statevector simulation, Pauli expectation values and shot sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateMatrix, Matrix2, Matrix4};
use crate::pauli::Hamiltonian;

pub const MAX_QUBITS: usize = 20;
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{0} qubits exceeds the simulator limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit count mismatch: {expected} expected, {actual} given")]
    QubitMismatch { expected: usize, actual: usize },
    #[error("state has {len} amplitudes, expected {expected}")]
    BadLength { len: usize, expected: usize },
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("shots must be at least 1")]
    NoShots,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0...0>.
    pub fn zero(n_qubits: usize) -> Result<Self, SimError> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, SimError> {
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps amplitudes; they must already be normalized within
    /// [`NORM_TOLERANCE`].
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        if n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n_qubits));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(SimError::BadLength { len: amplitudes.len(), expected: 1 << n_qubits });
        }
        let s = Self { n_qubits, amplitudes };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_one(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_two(&mut self, first: usize, second: usize, m: &Matrix4) {
        let b1 = 1usize << first;
        let b2 = 1usize << second;
        for i in 0..self.amplitudes.len() {
            if i & (b1 | b2) != 0 {
                continue;
            }
            // Local index 2*bit(first) + bit(second).
            let idx = [i, i | b2, i | b1, i | b1 | b2];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] =
                    m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}

/// Applies `circuit` with `params` to `initial` (|0...0> when `None`).
pub fn run(
    circuit: &Circuit,
    params: &[f64],
    initial: Option<&StateVector>,
) -> Result<StateVector, SimError> {
    circuit.check_params(params)?;
    let mut state = match initial {
        Some(s) => {
            if s.n_qubits != circuit.n_qubits() {
                return Err(SimError::QubitMismatch {
                    expected: circuit.n_qubits(),
                    actual: s.n_qubits,
                });
            }
            s.clone()
        }
        None => StateVector::zero(circuit.n_qubits())?,
    };
    for ins in circuit.instructions() {
        match ins.kind.matrix(&ins.angles(params)) {
            GateMatrix::One(m) => state.apply_one(ins.qubits[0], &m),
            GateMatrix::Two(m) => state.apply_two(ins.qubits[0], ins.qubits[1], &m),
        }
        debug_assert!(
            (state.norm_sqr() - 1.0).abs() < NORM_TOLERANCE,
            "norm drift after {:?}",
            ins.kind
        );
    }
    Ok(state)
}

/// <s|H|s>, offset included.
pub fn expectation(state: &StateVector, h: &Hamiltonian) -> Result<f64, SimError> {
    check_dims(state, h)?;
    if h.is_diagonal() {
        Ok(expectation_diagonal(state, h))
    } else {
        Ok(expectation_complex(state, h)?.re)
    }
}

/// Probability-weighted sum over basis energies; ignores non-diagonal terms.
pub fn expectation_diagonal(state: &StateVector, h: &Hamiltonian) -> f64 {
    let energies = h.diagonal_energies();
    state
        .amplitudes
        .iter()
        .zip(&energies)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum()
}

/// General path over every term; the imaginary part is the residue a
/// Hermitian Hamiltonian should drive to zero.
pub fn expectation_complex(state: &StateVector, h: &Hamiltonian) -> Result<Complex64, SimError> {
    check_dims(state, h)?;
    let amps = &state.amplitudes;
    let mut total = Complex64::new(h.offset() * state.norm_sqr(), 0.0);
    for (coeff, string) in h.terms() {
        let (x, z, n_y) = string.masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            let term = amps[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        total += acc * phase * *coeff;
    }
    Ok(total)
}

fn check_dims(state: &StateVector, h: &Hamiltonian) -> Result<(), SimError> {
    if state.n_qubits != h.n_qubits() {
        return Err(SimError::QubitMismatch { expected: h.n_qubits(), actual: state.n_qubits });
    }
    Ok(())
}

/// Measurement outcomes keyed by bitstring, highest qubit first
/// (so "10" is qubit 1 set, qubit 0 clear).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: BTreeMap<String, usize>,
    pub shots: usize,
}

impl ShotCounts {
    /// Most frequent outcome; ties go to the smaller bitstring.
    pub fn most_frequent(&self) -> Option<(&str, usize)> {
        let mut best: Option<(&str, usize)> = None;
        for (k, &v) in &self.counts {
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((k.as_str(), v));
            }
        }
        best
    }
}

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Draws `shots` i.i.d. basis outcomes; deterministic in `seed`.
pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Result<ShotCounts, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let dist = WeightedIndex::new(state.probabilities())
        .map_err(|_| SimError::NotNormalized(state.norm_sqr()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_index: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..shots {
        *by_index.entry(dist.sample(&mut rng)).or_default() += 1;
    }
    let counts = by_index
        .into_iter()
        .map(|(i, c)| (bitstring(i, state.n_qubits), c))
        .collect();
    Ok(ShotCounts { counts, shots })
}
