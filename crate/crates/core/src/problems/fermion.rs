use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::pauli::{Hamiltonian, Pauli, PauliString, PauliSum};

/// Imaginary residue tolerated when converting a mapped operator to a
/// real Hamiltonian.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Ladder operator on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ladder {
    pub mode: usize,
    /// true for a†.
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionTerm {
    pub coeff: f64,
    /// Operator product, leftmost factor first.
    pub factors: Vec<Ladder>,
}

/// Real-weighted sum of products of fermionic ladder operators.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FermionicOp {
    pub terms: Vec<FermionTerm>,
}

impl FermionicOp {
    pub fn new(terms: Vec<FermionTerm>) -> Self {
        Self { terms }
    }

    pub fn term(mut self, coeff: f64, factors: &[Ladder]) -> Self {
        self.terms.push(FermionTerm { coeff, factors: factors.to_vec() });
        self
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.mode)).max()
    }

    /// Reads `coeff [+p|-p ...]` lines (`+p` = a†_p); `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_text = fields.next().unwrap_or_default();
            let coeff: f64 = coeff_text.parse().map_err(|_| ProblemError::Parse {
                line: line_no,
                message: format!("cannot read coefficient `{coeff_text}`"),
            })?;
            let factors = fields
                .map(|f| {
                    let (dagger, rest) = match f.split_at_checked(1) {
                        Some(("+", rest)) => (true, rest),
                        Some(("-", rest)) => (false, rest),
                        _ => {
                            return Err(ProblemError::Parse {
                                line: line_no,
                                message: format!("factor `{f}` must start with + or -"),
                            })
                        }
                    };
                    let mode = rest.parse().map_err(|_| ProblemError::Parse {
                        line: line_no,
                        message: format!("bad mode index in `{f}`"),
                    })?;
                    Ok(Ladder { mode, dagger })
                })
                .collect::<Result<Vec<_>, _>>()?;
            terms.push(FermionTerm { coeff, factors });
        }
        Ok(Self { terms })
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{:?}", t.coeff));
            for f in &t.factors {
                out.push_str(&format!(" {}{}", if f.dagger { '+' } else { '-' }, f.mode));
            }
            out.push('\n');
        }
        out
    }
}

/// Jordan–Wigner image of one ladder operator:
/// a†_p → (X_p − iY_p)/2 ⊗ Z_{q<p}, a_p → (X_p + iY_p)/2 ⊗ Z_{q<p}.
pub fn ladder_to_pauli(op: Ladder, n_modes: usize) -> PauliSum {
    let mut base: Vec<(usize, Pauli)> = (0..op.mode).map(|q| (q, Pauli::Z)).collect();
    base.push((op.mode, Pauli::X));
    let x_part = PauliString::from_sparse(n_modes, &base);
    base.pop();
    base.push((op.mode, Pauli::Y));
    let y_part = PauliString::from_sparse(n_modes, &base);
    let y_sign = if op.dagger { -0.5 } else { 0.5 };
    let mut sum = PauliSum::from_term(Complex64::new(0.5, 0.0), x_part);
    sum.add_term(Complex64::new(0.0, y_sign), y_part);
    sum
}

/// Maps every term to a complex Pauli sum without the Hermiticity check.
pub fn jordan_wigner_sum(op: &FermionicOp, n_modes: usize) -> Result<PauliSum, ProblemError> {
    if let Some(m) = op.max_mode() {
        if m >= n_modes {
            return Err(ProblemError::Invalid(format!("mode {m} outside {n_modes} modes")));
        }
    }
    let mut total = PauliSum::zero(n_modes);
    for term in &op.terms {
        let mut product = PauliSum::identity(n_modes);
        for &f in &term.factors {
            product = product.mul(&ladder_to_pauli(f, n_modes))?;
        }
        total = total.add(&product.scale(Complex64::new(term.coeff, 0.0)));
    }
    Ok(total.simplify(crate::pauli::MERGE_TOLERANCE))
}

/// Qubit Hamiltonian of a Hermitian fermionic operator.
pub fn jordan_wigner(op: &FermionicOp, n_modes: usize) -> Result<Hamiltonian, ProblemError> {
    let sum = jordan_wigner_sum(op, n_modes)?;
    sum.into_hamiltonian(HERMITICITY_TOLERANCE).map_err(|e| match e {
        crate::pauli::PauliError::NotHermitian { term, residue } => {
            ProblemError::NotHermitian { term, residue }
        }
        other => other.into(),
    })
}
