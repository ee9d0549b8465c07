//! Baseline comparison: fixed-layout ansätze against the search winner on
//! the bundled QUBO fixtures, with the brute-force optimum as reference.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{real_amplitudes, two_local, Circuit, CircuitError, Entanglement};
use crate::llm::{ProposerError, RandomProposer};
use crate::problems::{brute_force_min, ProblemError, ProblemFile};
use crate::search::{run_search, NoFeedback, SearchConfig, SearchError, SearchReport};
use crate::vqe::{train, TrainConfig, TrainError};

pub const TWO_LOCAL_REPS: [usize; 3] = [2, 3, 5];
pub const REAL_AMPLITUDES_REPS: [usize; 2] = [2, 3];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Proposer(#[from] ProposerError),
    #[error("{0} is not a quadratic program")]
    NotQubo(String),
    #[error("search on {0} found no candidate")]
    NoCandidate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub train: TrainConfig,
    pub search_iterations: usize,
    pub n_blocks: usize,
    pub proposer_seed: u64,
    pub entanglement: Entanglement,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            search_iterations: 10,
            n_blocks: 6,
            proposer_seed: 0,
            entanglement: Entanglement::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzFamily {
    TwoLocal,
    RealAmplitudes,
    SearchBest,
}

impl AnsatzFamily {
    pub fn label(self) -> &'static str {
        match self {
            AnsatzFamily::TwoLocal => "TwoLocal",
            AnsatzFamily::RealAmplitudes => "RealAmplitudes",
            AnsatzFamily::SearchBest => "search-best",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub ansatz: AnsatzFamily,
    pub reps: Option<usize>,
    pub gate_count: usize,
    pub value: f64,
    pub reference: f64,
    /// Bracket form of the winning genome, search row only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genome: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub problem: String,
    pub n_qubits: usize,
    pub reference: f64,
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    /// Lowest value among the fixed-layout rows.
    pub fn best_baseline(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.ansatz != AnsatzFamily::SearchBest)
            .map(|r| r.value)
            .min_by(f64::total_cmp)
    }

    pub fn search_row(&self) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.ansatz == AnsatzFamily::SearchBest)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{} ({} qubits)\n", self.problem, self.n_qubits);
        out.push_str(&format!(
            "{:<16} {:>5} {:>10} {:>16} {:>16}\n",
            "Ansatz", "Reps", "GateCounts", "Value", "Reference"
        ));
        for r in &self.rows {
            let reps = r.reps.map_or_else(|| "-".to_string(), |k| k.to_string());
            out.push_str(&format!(
                "{:<16} {:>5} {:>10} {:>16.6} {:>16.6}\n",
                r.ansatz.label(),
                reps,
                r.gate_count,
                r.value,
                r.reference
            ));
        }
        out
    }
}

fn baseline_row(
    family: AnsatzFamily,
    reps: usize,
    circuit: &Circuit,
    problem: &crate::pauli::Hamiltonian,
    reference: f64,
    cfg: &TrainConfig,
) -> Result<BenchRow, BenchError> {
    let report = train(circuit, problem, cfg)?;
    Ok(BenchRow {
        ansatz: family,
        reps: Some(reps),
        gate_count: report.gate_count,
        value: report.final_energy,
        reference,
        genome: None,
    })
}

/// Trains every baseline plus a random-proposer search on one problem.
pub fn bench_problem(
    problem: &ProblemFile,
    cfg: &BenchConfig,
) -> Result<(BenchTable, SearchReport), BenchError> {
    let name = problem.display_name();
    let encoded = problem.spec.encode()?;
    let qp = encoded.qp.as_ref().ok_or_else(|| BenchError::NotQubo(name.clone()))?;
    let reference = brute_force_min(qp)?.value;
    let h = &encoded.hamiltonian;
    let n = h.n_qubits();

    let mut rows = Vec::new();
    for reps in TWO_LOCAL_REPS {
        let c = two_local(n, reps, cfg.entanglement)?;
        rows.push(baseline_row(AnsatzFamily::TwoLocal, reps, &c, h, reference, &cfg.train)?);
    }
    for reps in REAL_AMPLITUDES_REPS {
        let c = real_amplitudes(n, reps, cfg.entanglement)?;
        rows.push(baseline_row(AnsatzFamily::RealAmplitudes, reps, &c, h, reference, &cfg.train)?);
    }

    let search_cfg = SearchConfig {
        n_blocks: cfg.n_blocks,
        n_qubits: n,
        max_iterations: cfg.search_iterations,
        task_description: name.clone(),
    };
    let mut proposer = RandomProposer::new(cfg.proposer_seed, &search_cfg)?;
    let report = run_search(h, &mut proposer, &cfg.train, &search_cfg, &mut NoFeedback)?;
    let best = report.best.clone().ok_or_else(|| BenchError::NoCandidate(name.clone()))?;
    rows.push(BenchRow {
        ansatz: AnsatzFamily::SearchBest,
        reps: None,
        gate_count: best.gate_count,
        value: best.raw_value,
        reference,
        genome: Some(best.genome.to_string()),
    });
    log::info!("bench {name}: reference {reference}, search best {}", best.raw_value);
    Ok((BenchTable { problem: name, n_qubits: n, reference, rows }, report))
}

pub fn run_bench(problems: &[ProblemFile], cfg: &BenchConfig) -> Result<Vec<BenchTable>, BenchError> {
    problems.iter().map(|p| bench_problem(p, cfg).map(|(t, _)| t)).collect()
}
