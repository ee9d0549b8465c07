//! Dense-matrix reference simulator built from Kronecker products.
//!
//! Gate matrices here come from their textbook definitions (Pauli
//! exponentials, controlled blocks) rather than from the library tables.

use ansatz_forge::circuit::{Circuit, GateKind};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Mat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat2(rows: [[Complex64; 2]; 2]) -> Mat {
    Mat::from_fn(2, 2, |r, k| rows[r][k])
}

pub fn identity(dim: usize) -> Mat {
    Mat::identity(dim, dim)
}

pub fn pauli_x() -> Mat {
    mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> Mat {
    mat2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> Mat {
    mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub fn hadamard() -> Mat {
    (pauli_x() + pauli_z()) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// exp(-iθG/2) for an involutory generator G.
pub fn pauli_rotation(generator: &Mat, theta: f64) -> Mat {
    let dim = generator.nrows();
    identity(dim) * c((theta / 2.0).cos(), 0.0) - generator * c(0.0, (theta / 2.0).sin())
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([
        [c(co, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(co, phi + lambda)],
    ])
}

fn projector(bit: usize) -> Mat {
    let mut p = Mat::zeros(2, 2);
    p[(bit, bit)] = c(1.0, 0.0);
    p
}

/// |0><0| ⊗ I + |1><1| ⊗ U with the control as the left factor.
pub fn controlled(u: &Mat) -> Mat {
    kron(&projector(0), &identity(2)) + kron(&projector(1), u)
}

/// Local gate matrix; for two-qubit gates the first operand is the left
/// Kronecker factor.
pub fn gate(kind: GateKind, angles: &[f64]) -> Mat {
    use GateKind::*;
    match kind {
        Rx => pauli_rotation(&pauli_x(), angles[0]),
        Ry => pauli_rotation(&pauli_y(), angles[0]),
        Rz => pauli_rotation(&pauli_z(), angles[0]),
        U1 => {
            let mut m = identity(2);
            m[(1, 1)] = Complex64::from_polar(1.0, angles[0]);
            m
        }
        U3 => u3(angles[0], angles[1], angles[2]),
        Sx => (identity(2) * c(1.0, 1.0) + pauli_x() * c(1.0, -1.0)) * c(0.5, 0.0),
        X => pauli_x(),
        H => hadamard(),
        SqrtH => (identity(2) * c(1.0, 1.0) + hadamard() * c(1.0, -1.0)) * c(0.5, 0.0),
        Cz => controlled(&pauli_z()),
        Cnot => controlled(&pauli_x()),
        Cu3 => controlled(&u3(angles[0], angles[1], angles[2])),
        Rzz => pauli_rotation(&kron(&pauli_z(), &pauli_z()), angles[0]),
        Rxx => pauli_rotation(&kron(&pauli_x(), &pauli_x()), angles[0]),
        Rzx => pauli_rotation(&kron(&pauli_z(), &pauli_x()), angles[0]),
    }
}

/// Full-register operator for a one-qubit gate: I ⊗ … ⊗ U ⊗ … ⊗ I with
/// qubit n−1 leftmost (qubit 0 is the least significant bit).
pub fn embed_one(n: usize, q: usize, u: &Mat) -> Mat {
    let mut full = identity(1);
    for k in (0..n).rev() {
        full = if k == q { kron(&full, u) } else { kron(&full, &identity(2)) };
    }
    full
}

/// Full-register operator for a two-qubit gate on (first, second).
///
/// The qubits are first swapped next to each other so the gate can be
/// placed by a Kronecker product, then swapped back.
pub fn embed_two(n: usize, first: usize, second: usize, u: &Mat) -> Mat {
    // Permutation that maps `first` to position 1 and `second` to position 0.
    let perm = permutation(n, first, second);
    let placed = kron(&identity(1 << (n - 2)), u);
    perm.transpose() * placed * &perm
}

/// Basis permutation P with P|b> = |b'> where bit 1 of b' is bit `first`
/// of b, bit 0 of b' is bit `second`, and the remaining bits keep their
/// relative order above them.
fn permutation(n: usize, first: usize, second: usize) -> Mat {
    let others: Vec<usize> = (0..n).filter(|&q| q != first && q != second).collect();
    let dim = 1usize << n;
    let mut p = Mat::zeros(dim, dim);
    for b in 0..dim {
        let mut out = ((b >> first) & 1) << 1 | ((b >> second) & 1);
        for (k, &q) in others.iter().enumerate() {
            out |= ((b >> q) & 1) << (k + 2);
        }
        p[(out, b)] = c(1.0, 0.0);
    }
    p
}

pub fn circuit_unitary(circuit: &Circuit, params: &[f64]) -> Mat {
    let n = circuit.n_qubits();
    let mut total = identity(1 << n);
    for ins in circuit.instructions() {
        let local = gate(ins.kind, &ins.angles(params));
        let full = match ins.qubits.as_slice() {
            [q] => embed_one(n, *q, &local),
            [a, b] => embed_two(n, *a, *b, &local),
            _ => unreachable!("gates act on one or two qubits"),
        };
        total = full * total;
    }
    total
}

pub fn apply(u: &Mat, state: &[Complex64]) -> Vec<Complex64> {
    let v = DMatrix::from_column_slice(state.len(), 1, state);
    (u * v).iter().copied().collect()
}

pub fn zero_state(n: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    v
}

/// Largest elementwise distance after removing the global phase of `b`
/// relative to `a`.
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - y * phase).norm()).fold(0.0, f64::max)
}

pub fn max_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
