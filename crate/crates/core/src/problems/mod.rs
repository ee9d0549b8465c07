//! Benchmark problems and their reduction to qubit Hamiltonians.
//!
//! Portfolio, Max-Cut and TSP go through a binary quadratic program and the
//! x = (1 − z)/2 substitution; chemistry enters as fermionic terms mapped by
//! Jordan–Wigner, or directly as Pauli terms. Every encoding minimizes.

mod encoders;
mod fermion;
pub mod fixtures;
mod qp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encoders::{
    decode_tour, default_tsp_penalty, maxcut_to_qp, portfolio_to_qp, tour_length, tsp_to_qp,
    tsp_variable, GraphSpec, PortfolioSpec, TspEncoding,
};
pub use fermion::{
    jordan_wigner, jordan_wigner_sum, ladder_to_pauli, FermionTerm, FermionicOp, Ladder,
    HERMITICITY_TOLERANCE,
};
pub use qp::{brute_force_min, qp_to_ising, BruteForceResult, QuadraticProgram, MAX_BRUTE_FORCE_VARS};

use crate::pauli::{Hamiltonian, PauliError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{n_vars} variables exceeds the brute-force limit of {limit}")]
    TooLarge { n_vars: usize, limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mapped operator is not Hermitian: imaginary residue {residue:e} on `{term}`")]
    NotHermitian { term: String, residue: f64 },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("problem file: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspProblem {
    #[serde(flatten)]
    pub graph: GraphSpec,
    /// One-hot penalty; defaults to [`default_tsp_penalty`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
    #[serde(default)]
    pub encoding: TspEncoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionicProblem {
    pub n_modes: usize,
    /// Lines of the form `coeff [+p|-p ...]`.
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliProblem {
    /// Lines of the form `coeff LETTERS`, qubit 0 first.
    pub terms: Vec<String>,
}

/// Problem payload, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    Portfolio(PortfolioSpec),
    Maxcut(GraphSpec),
    Tsp(TspProblem),
    Fermionic(FermionicProblem),
    Pauli(PauliProblem),
}

/// A problem file: the payload plus an optional display name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: ProblemSpec,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.spec.kind().to_string())
    }
}

/// Hamiltonian plus, for QUBO problems, the program it came from.
#[derive(Debug, Clone)]
pub struct EncodedProblem {
    pub hamiltonian: Hamiltonian,
    pub qp: Option<QuadraticProgram>,
}

impl EncodedProblem {
    /// Exact optimum: brute force for QUBOs, dense diagonalization otherwise.
    pub fn reference_value(&self) -> Result<f64, ProblemError> {
        match &self.qp {
            Some(qp) => Ok(brute_force_min(qp)?.value),
            None => Ok(self.hamiltonian.min_eigenvalue()?.energy),
        }
    }
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Portfolio(_) => "portfolio",
            ProblemSpec::Maxcut(_) => "maxcut",
            ProblemSpec::Tsp(_) => "tsp",
            ProblemSpec::Fermionic(_) => "fermionic",
            ProblemSpec::Pauli(_) => "pauli",
        }
    }

    /// The quadratic program for QUBO-type problems, `None` otherwise.
    pub fn to_qp(&self) -> Option<Result<QuadraticProgram, ProblemError>> {
        match self {
            ProblemSpec::Portfolio(p) => Some(portfolio_to_qp(p)),
            ProblemSpec::Maxcut(g) => Some(maxcut_to_qp(g)),
            ProblemSpec::Tsp(t) => {
                let penalty = t.penalty.unwrap_or_else(|| default_tsp_penalty(&t.graph));
                Some(tsp_to_qp(&t.graph, penalty, t.encoding))
            }
            ProblemSpec::Fermionic(_) | ProblemSpec::Pauli(_) => None,
        }
    }

    pub fn encode(&self) -> Result<EncodedProblem, ProblemError> {
        if let Some(qp) = self.to_qp() {
            let qp = qp?;
            return Ok(EncodedProblem { hamiltonian: qp.to_ising(), qp: Some(qp) });
        }
        let hamiltonian = match self {
            ProblemSpec::Fermionic(f) => {
                let op = FermionicOp::parse(&f.terms.join("\n"))?;
                jordan_wigner(&op, f.n_modes)?
            }
            ProblemSpec::Pauli(p) => Hamiltonian::parse(&p.terms.join("\n"))?,
            _ => unreachable!("QUBO kinds handled above"),
        };
        Ok(EncodedProblem { hamiltonian, qp: None })
    }

    pub fn to_hamiltonian(&self) -> Result<Hamiltonian, ProblemError> {
        Ok(self.encode()?.hamiltonian)
    }
}
