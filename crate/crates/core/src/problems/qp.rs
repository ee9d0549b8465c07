use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::pauli::{Hamiltonian, Pauli, PauliString};

/// Largest instance `brute_force_min` will enumerate.
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

/// Binary quadratic objective `xᵀQx + cᵀx + k`, minimized over {0,1}ⁿ.
///
/// `quadratic` is the dense symmetric Q in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgram {
    n_vars: usize,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    constant: f64,
}

impl QuadraticProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            linear: vec![0.0; n_vars],
            quadratic: vec![0.0; n_vars * n_vars],
            constant: 0.0,
        }
    }

    /// Builds from explicit parts; `quadratic` must be symmetric.
    pub fn from_parts(
        linear: Vec<f64>,
        quadratic: Vec<Vec<f64>>,
        constant: f64,
    ) -> Result<Self, ProblemError> {
        let n = linear.len();
        if quadratic.len() != n || quadratic.iter().any(|r| r.len() != n) {
            return Err(ProblemError::Dimension(format!(
                "quadratic matrix must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if quadratic[i][j] != quadratic[j][i] {
                    return Err(ProblemError::Invalid(format!(
                        "quadratic matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { n_vars: n, linear, quadratic: quadratic.concat(), constant })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.quadratic[i * self.n_vars + j]
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    /// Adds `c · x_i · x_j` to the objective, keeping Q symmetric.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        let n = self.n_vars;
        if i == j {
            self.quadratic[i * n + i] += c;
        } else {
            self.quadratic[i * n + j] += c / 2.0;
            self.quadratic[j * n + i] += c / 2.0;
        }
    }

    /// Moves the diagonal of Q into the linear part (x² = x for binaries).
    pub fn fold_diagonal(mut self) -> Self {
        let n = self.n_vars;
        for i in 0..n {
            self.linear[i] += self.quadratic[i * n + i];
            self.quadratic[i * n + i] = 0.0;
        }
        self
    }

    /// Objective value; `x[i]` is read as 0 or non-zero.
    pub fn evaluate(&self, x: &[u8]) -> f64 {
        let n = self.n_vars;
        let mut v = self.constant;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            v += self.linear[i];
            for j in 0..n {
                if x[j] != 0 {
                    v += self.quadratic[i * n + j];
                }
            }
        }
        v
    }

    /// Objective at the basis index whose bit `i` is `x_i`.
    pub fn evaluate_index(&self, index: usize) -> f64 {
        self.evaluate(&assignment_of(index, self.n_vars))
    }

    /// Ising form via x_i = (1 - z_i)/2: only Z and ZZ terms plus offset.
    pub fn to_ising(&self) -> Hamiltonian {
        let n = self.n_vars;
        let mut z_coeff = vec![0.0; n];
        let mut terms: Vec<(f64, PauliString)> = Vec::new();
        let mut offset = self.constant;
        for i in 0..n {
            // Diagonal Q acts linearly on binaries.
            let c = self.linear[i] + self.quadratic[i * n + i];
            offset += c / 2.0;
            z_coeff[i] -= c / 2.0;
        }
        for i in 0..n {
            for j in i + 1..n {
                let w = self.quadratic[i * n + j] + self.quadratic[j * n + i];
                if w == 0.0 {
                    continue;
                }
                offset += w / 4.0;
                z_coeff[i] -= w / 4.0;
                z_coeff[j] -= w / 4.0;
                terms.push((w / 4.0, PauliString::from_sparse(n, &[(i, Pauli::Z), (j, Pauli::Z)])));
            }
        }
        for (i, c) in z_coeff.into_iter().enumerate() {
            terms.push((c, PauliString::from_sparse(n, &[(i, Pauli::Z)])));
        }
        Hamiltonian::new(n, terms, offset).expect("strings sized to n")
    }
}

pub fn qp_to_ising(qp: &QuadraticProgram) -> Hamiltonian {
    qp.to_ising()
}

pub(crate) fn assignment_of(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| (index >> i & 1) as u8).collect()
}

/// Exhaustive minimum of a quadratic program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub value: f64,
    /// x_0 first.
    pub assignment: Vec<u8>,
}

impl BruteForceResult {
    /// Assignment as text, x_0 first.
    pub fn bitstring(&self) -> String {
        self.assignment.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
    }
}

/// Values within this (relative) distance count as ties.
const TIE_TOLERANCE: f64 = 1e-12;

fn better(a: &(f64, Vec<u8>), b: &(f64, Vec<u8>)) -> bool {
    let scale = 1.0f64.max(a.0.abs()).max(b.0.abs());
    if (a.0 - b.0).abs() <= TIE_TOLERANCE * scale {
        a.1 < b.1
    } else {
        a.0 < b.0
    }
}

/// Exhaustive minimization; ties go to the lexicographically smallest
/// assignment (x_0 first).
pub fn brute_force_min(qp: &QuadraticProgram) -> Result<BruteForceResult, ProblemError> {
    let n = qp.n_vars();
    if n > MAX_BRUTE_FORCE_VARS {
        return Err(ProblemError::TooLarge { n_vars: n, limit: MAX_BRUTE_FORCE_VARS });
    }
    let total = 1usize << n;
    let chunk = 1usize << n.saturating_sub(6).min(16);
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut local: Option<(f64, Vec<u8>)> = None;
            for index in c * chunk..((c + 1) * chunk).min(total) {
                let x = assignment_of(index, n);
                let cand = (qp.evaluate(&x), x);
                if local.as_ref().is_none_or(|l| better(&cand, l)) {
                    local = Some(cand);
                }
            }
            local.expect("non-empty chunk")
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one assignment");
    Ok(BruteForceResult { value: best.0, assignment: best.1 })
}
