//! Pauli strings, real-weighted Pauli Hamiltonians and the dense
//! diagonalization oracle.
//!
//! Basis convention shared by the whole crate: qubit 0 is the least
//! significant bit of a computational-basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register `to_dense` and `min_eigenvalue` accept.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Terms whose merged coefficient falls below this are dropped.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{n_qubits} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")]
    TooLarge { n_qubits: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: coefficient `{text}` is not real")]
    NonRealCoefficient { line: usize, text: String },
    #[error("operator is not Hermitian: imaginary residue {residue:e} on `{term}`")]
    NotHermitian { term: String, residue: f64 },
    #[error("invalid Pauli letter `{0}`")]
    InvalidLetter(char),
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, PauliError> {
        match c {
            'I' | 'i' => Ok(Pauli::I),
            'X' | 'x' => Ok(Pauli::X),
            'Y' | 'y' => Ok(Pauli::Y),
            'Z' | 'z' => Ok(Pauli::Z),
            other => Err(PauliError::InvalidLetter(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product `self · other` as (phase, letter).
    pub fn mul(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::One, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::One, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MinusI, Y),
        }
    }

    /// 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }
}

/// One of the four unit phases a Pauli product can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Phase {
    fn quarter_turns(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_quarter_turns(k: u8) -> Self {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_quarter_turns(self.quarter_turns() + rhs.quarter_turns())
    }
}

/// Tensor product of single-qubit Paulis; `letters[i]` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { letters: vec![Pauli::I; n_qubits] }
    }

    /// Identity everywhere except the listed (qubit, letter) pairs.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in ops {
            s.letters[q] = p;
        }
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Only I and Z letters.
    pub fn is_diagonal(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    /// Bit masks (x, z) such that the string maps |b> to
    /// i^{#Y} (-1)^{popcount(b & z)} |b ^ x>.
    pub fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut n_y = 0u32;
        for (q, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    n_y += 1;
                }
            }
        }
        (x, z, n_y)
    }

    /// Operator product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString), PauliError> {
        if self.n_qubits() != other.n_qubits() {
            return Err(PauliError::DimensionMismatch {
                left: self.n_qubits(),
                right: other.n_qubits(),
            });
        }
        let mut phase = Phase::One;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = phase * ph;
                p
            })
            .collect();
        Ok((phase, PauliString { letters }))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString::new)
    }
}

/// Free function form of [`PauliString::multiply`].
pub fn multiply(p: &PauliString, q: &PauliString) -> Result<(Phase, PauliString), PauliError> {
    p.multiply(q)
}

/// Real-weighted sum of Pauli strings plus an identity offset.
///
/// Terms are kept canonical: no repeated strings, no identity string (it
/// lives in `offset`), nothing below [`MERGE_TOLERANCE`]. Term order is the
/// lexicographic order of the strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
    offset: f64,
}

impl Hamiltonian {
    /// Builds a canonical Hamiltonian, merging duplicates and folding
    /// identity strings into the offset.
    pub fn new<I>(n_qubits: usize, terms: I, offset: f64) -> Result<Self, PauliError>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        let mut offset = offset;
        for (coeff, string) in terms {
            if string.n_qubits() != n_qubits {
                return Err(PauliError::DimensionMismatch {
                    left: n_qubits,
                    right: string.n_qubits(),
                });
            }
            if string.is_identity() {
                offset += coeff;
            } else {
                *merged.entry(string).or_insert(0.0) += coeff;
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() >= MERGE_TOLERANCE)
            .map(|(s, c)| (c, s))
            .collect();
        Ok(Self { n_qubits, terms, offset })
    }

    pub fn constant(n_qubits: usize, offset: f64) -> Self {
        Self { n_qubits, terms: Vec::new(), offset }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.is_diagonal())
    }

    /// Coefficient of `string`, or the offset for the identity.
    pub fn coefficient(&self, string: &PauliString) -> f64 {
        if string.is_identity() {
            return self.offset;
        }
        self.terms
            .iter()
            .find(|(_, s)| s == string)
            .map(|(c, _)| *c)
            .unwrap_or(0.0)
    }

    /// Energy of every basis state; only meaningful for diagonal
    /// Hamiltonians (non-diagonal terms are ignored).
    pub fn diagonal_energies(&self) -> Vec<f64> {
        let dim = 1usize << self.n_qubits;
        let masks: Vec<(f64, usize)> = self
            .terms
            .iter()
            .filter(|(_, s)| s.is_diagonal())
            .map(|(c, s)| (*c, s.masks().1))
            .collect();
        (0..dim)
            .map(|b| {
                let mut e = 0.0;
                for &(c, z) in &masks {
                    if (b & z).count_ones() % 2 == 0 {
                        e += c;
                    } else {
                        e += -c;
                    }
                }
                e + self.offset
            })
            .collect()
    }

    /// Parses the line format `<coefficient> <letters, qubit 0 first>`.
    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut n_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_text = fields.next().unwrap_or_default();
            let letters = fields.next().ok_or_else(|| PauliError::Parse {
                line: line_no,
                message: "expected `<coefficient> <letters>`".into(),
            })?;
            if fields.next().is_some() {
                return Err(PauliError::Parse {
                    line: line_no,
                    message: "trailing fields after the Pauli letters".into(),
                });
            }
            let coeff = parse_real_coefficient(coeff_text, line_no)?;
            let string: PauliString = letters.parse().map_err(|e| PauliError::Parse {
                line: line_no,
                message: format!("{e}"),
            })?;
            match n_qubits {
                None => n_qubits = Some(string.n_qubits()),
                Some(n) if n != string.n_qubits() => {
                    return Err(PauliError::Parse {
                        line: line_no,
                        message: format!(
                            "string has {} letters, earlier lines have {n}",
                            string.n_qubits()
                        ),
                    })
                }
                Some(_) => {}
            }
            terms.push((coeff, string));
        }
        Hamiltonian::new(n_qubits.unwrap_or(0), terms, 0.0)
    }

    /// Writes the line format; the offset is always written as an
    /// identity-string line so the qubit count survives a round trip.
    pub fn format(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} qubits, {} terms\n", self.n_qubits, self.terms.len()));
        out.push_str(&format!("{:?} {}\n", self.offset, PauliString::identity(self.n_qubits)));
        for (c, s) in &self.terms {
            out.push_str(&format!("{c:?} {s}\n"));
        }
        out
    }

    /// Dense 2^n x 2^n matrix.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>, PauliError> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(PauliError::TooLarge { n_qubits: self.n_qubits });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (coeff, string) in &self.terms {
            let (x, z, n_y) = string.masks();
            let base = Phase::from_quarter_turns((n_y % 4) as u8).to_complex() * *coeff;
            for col in 0..dim {
                let row = col ^ x;
                let sign = if (col & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(row, col)] += base * sign;
            }
        }
        for d in 0..dim {
            m[(d, d)] += Complex64::new(self.offset, 0.0);
        }
        Ok(m)
    }

    /// Smallest eigenvalue and a matching eigenvector.
    ///
    /// Diagonal Hamiltonians take an exhaustive basis-state scan; the
    /// returned state is then the first minimizing basis vector.
    pub fn min_eigenvalue(&self) -> Result<GroundState, PauliError> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(PauliError::TooLarge { n_qubits: self.n_qubits });
        }
        if self.is_diagonal() {
            let energies = self.diagonal_energies();
            let (index, energy) = argmin(&energies);
            let mut state = vec![Complex64::new(0.0, 0.0); energies.len()];
            state[index] = Complex64::new(1.0, 0.0);
            return Ok(GroundState { energy, state });
        }
        self.min_eigenvalue_dense()
    }

    /// Dense Hermitian diagonalization, with no diagonal shortcut.
    pub fn min_eigenvalue_dense(&self) -> Result<GroundState, PauliError> {
        let m = self.to_dense()?;
        let eig = SymmetricEigen::new(m);
        let (index, energy) = argmin(eig.eigenvalues.as_slice());
        let state = eig.eigenvectors.column(index).iter().copied().collect();
        Ok(GroundState { energy, state })
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

fn parse_real_coefficient(text: &str, line: usize) -> Result<f64, PauliError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(PauliError::NonRealCoefficient { line, text: text.into() }),
        Err(_) => {
            let lowered = text.to_ascii_lowercase();
            if lowered.ends_with('i') || lowered.ends_with('j') || lowered.contains(['(', ',']) {
                Err(PauliError::NonRealCoefficient { line, text: text.into() })
            } else {
                Err(PauliError::Parse {
                    line,
                    message: format!("cannot read coefficient `{text}`"),
                })
            }
        }
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

impl FromStr for Hamiltonian {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hamiltonian::parse(s)
    }
}

/// Result of [`Hamiltonian::min_eigenvalue`].
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: Vec<Complex64>,
}

/// Complex-weighted Pauli sum, closed under multiplication. Used for
/// fermionic mappings, where intermediate products are not Hermitian.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits))
    }

    pub fn from_term(coeff: Complex64, string: PauliString) -> Self {
        let n_qubits = string.n_qubits();
        let mut terms = BTreeMap::new();
        terms.insert(string, coeff);
        Self { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, coeff: Complex64, string: PauliString) {
        *self.terms.entry(string).or_default() += coeff;
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self
    }

    pub fn add(mut self, other: &PauliSum) -> Self {
        for (s, c) in &other.terms {
            self.add_term(*c, s.clone());
        }
        self
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let mut out = PauliSum::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = a.multiply(b)?;
                out.add_term(ca * cb * phase.to_complex(), s);
            }
        }
        Ok(out)
    }

    /// Drops terms whose magnitude is below `tol`.
    pub fn simplify(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.norm() >= tol);
        self
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() < tol)
    }

    /// Converts to a real Hamiltonian, failing if any coefficient keeps an
    /// imaginary part of magnitude `tol` or more.
    pub fn into_hamiltonian(self, tol: f64) -> Result<Hamiltonian, PauliError> {
        let mut real_terms = Vec::with_capacity(self.terms.len());
        for (s, c) in self.terms {
            if c.im.abs() >= tol {
                return Err(PauliError::NotHermitian { term: s.to_string(), residue: c.im.abs() });
            }
            real_terms.push((c.re, s));
        }
        Hamiltonian::new(self.n_qubits, real_terms, 0.0)
    }
}
