//! The work behind each subcommand, independent of argument parsing.

use std::fs;
use std::path::Path;
use std::sync::mpsc;

use ansatz_forge::bench::{run_bench, BenchConfig, BenchTable};
use ansatz_forge::circuit::{decode, emit_qasm, prefix_sqrt_h};
use ansatz_forge::pauli::Hamiltonian;
use ansatz_forge::problems::{fixtures, ProblemFile};
use ansatz_forge::search::{parse_genome, FeedbackEvent, FeedbackSource};
use ansatz_forge::vqe::{train, training_circuit, InitStrategy, TrainConfig};
use serde_json::{json, Value};

use crate::runs::{execute, prepare, RunRecord, RunRequest, RunStore};
use crate::AppError;

pub fn read_text(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn read_problem(path: &Path) -> Result<ProblemFile, AppError> {
    Ok(ProblemFile::from_json(&read_text(path)?)?)
}

pub fn read_hamiltonian(path: &Path) -> Result<Hamiltonian, AppError> {
    Ok(Hamiltonian::parse(&read_text(path)?)?)
}

/// `random_uniform`, `vqe_i`, or `constant:<angle>`.
pub fn parse_init_strategy(text: &str) -> Result<InitStrategy, String> {
    let t = text.trim().to_ascii_lowercase().replace('-', "_");
    match t.as_str() {
        "random" | "random_uniform" => Ok(InitStrategy::RandomUniform),
        "vqe_i" | "vqei" => Ok(InitStrategy::VqeI),
        _ => match t.strip_prefix("constant:").or_else(|| t.strip_prefix("constant=")) {
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(InitStrategy::Constant)
                .ok_or_else(|| format!("bad constant angle in {text:?}")),
            None => Err(format!(
                "unknown init strategy {text:?} (expected random_uniform, vqe_i or constant:<angle>)"
            )),
        },
    }
}

/// Angles for `emit-qasm`: the word `zeros`, or a file holding a JSON array
/// or whitespace/comma separated numbers.
pub fn read_params(source: Option<&str>, n_params: usize) -> Result<Vec<f64>, AppError> {
    let Some(source) = source.filter(|s| *s != "zeros") else {
        return Ok(vec![0.0; n_params]);
    };
    let text = read_text(Path::new(source))?;
    let values: Vec<f64> = match serde_json::from_str::<Vec<f64>>(&text) {
        Ok(v) => v,
        Err(_) => text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| AppError::Input(format!("{source}: bad number {s:?}"))))
            .collect::<Result<_, _>>()?,
    };
    if values.len() != n_params {
        return Err(AppError::Input(format!(
            "{source}: circuit has {n_params} parameters but the file holds {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn encode(problem_path: &Path, output: Option<&Path>) -> Result<Value, AppError> {
    let problem = read_problem(problem_path)?;
    let encoded = problem.spec.encode()?;
    let h = &encoded.hamiltonian;
    let text = h.format();
    let mut out = json!({
        "problem": problem.display_name(),
        "kind": problem.spec.kind(),
        "n_qubits": h.n_qubits(),
        "n_terms": h.terms().len(),
        "offset": h.offset(),
    });
    if let Some(qp) = &encoded.qp {
        let best = ansatz_forge::problems::brute_force_min(qp)?;
        out["reference"] = json!({ "value": best.value, "assignment": best.bitstring() });
    }
    match output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| AppError::io(path, e))?;
            out["output"] = json!(path.display().to_string());
        }
        None => out["hamiltonian"] = json!(text),
    }
    Ok(out)
}

pub fn exact(ham_path: &Path) -> Result<Value, AppError> {
    let h = read_hamiltonian(ham_path)?;
    let ground = h.min_eigenvalue()?;
    // Most likely basis state, highest qubit first.
    let (index, _) = ground
        .state
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty state");
    let dominant: String = (0..h.n_qubits()).rev().map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect();
    Ok(json!({
        "n_qubits": h.n_qubits(),
        "min_eigenvalue": ground.energy,
        "dominant_basis_state": dominant,
    }))
}

pub fn train_genome(ham_path: &Path, genome: &str, cfg: &TrainConfig) -> Result<Value, AppError> {
    let h = read_hamiltonian(ham_path)?;
    let genome = parse_genome(genome, h.n_qubits())?;
    let circuit = decode(&genome, h.n_qubits())?;
    let report = train(&circuit, &h, cfg)?;
    Ok(json!({
        "genome": genome.to_string(),
        "n_qubits": h.n_qubits(),
        "train_config": cfg,
        "report": report,
    }))
}

pub fn qasm(genome: &str, n_qubits: usize, params: Option<&str>, vqe_i: bool) -> Result<String, AppError> {
    let genome = parse_genome(genome, n_qubits)?;
    let mut circuit = decode(&genome, n_qubits)?;
    if vqe_i {
        circuit = prefix_sqrt_h(&circuit);
    }
    let params = read_params(params, circuit.n_params())?;
    Ok(emit_qasm(&circuit, &params)?)
}

/// QASM for the circuit trained at iteration `k` of a run, with the angles
/// that produced its value.
pub fn iteration_qasm(record: &RunRecord, k: usize) -> Option<Result<String, AppError>> {
    let entry = record.report.history.entry_for_iteration(k)?;
    Some((|| {
        let circuit = decode(&entry.genome, record.search_config.n_qubits)?;
        let circuit = training_circuit(&circuit, record.train_config.init_strategy);
        Ok(emit_qasm(&circuit, &entry.params)?)
    })())
}

/// Runs a search, saving the record after every iteration.
pub fn search(
    req: RunRequest,
    store: &RunStore,
    feedback: &mut dyn FeedbackSource,
    mut progress: impl FnMut(&RunRecord),
) -> Result<RunRecord, AppError> {
    let run = prepare(req)?;
    store.save(&run.record)?;
    let mut save_error = None;
    let record = execute(run, feedback, &mut |r| {
        if let Err(e) = store.save(r) {
            log::error!("could not persist run {}: {e}", r.run_id);
            save_error.get_or_insert(e);
        }
        progress(r);
    });
    match save_error {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

/// One reviewer line from an interactive terminal: `accept <k>`,
/// `reject <k>`, or free text. Blank lines are ignored.
pub fn parse_feedback_line(line: &str) -> Option<FeedbackEvent> {
    let line = line.trim();
    if line.is_empty() {
        return None;
    }
    let mut words = line.split_whitespace();
    let verb = words.next().map(str::to_ascii_lowercase);
    let iteration = words.next().and_then(|w| w.parse::<usize>().ok());
    match (verb.as_deref(), iteration, words.next()) {
        (Some("accept"), Some(iteration), None) => Some(FeedbackEvent::Decision { iteration, accept: true }),
        (Some("reject"), Some(iteration), None) => Some(FeedbackEvent::Decision { iteration, accept: false }),
        _ => Some(FeedbackEvent::Note { text: line.to_string() }),
    }
}

/// Feedback read from standard input on a background thread.
pub fn stdin_feedback() -> mpsc::Receiver<FeedbackEvent> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in std::io::stdin().lines() {
            let Ok(line) = line else { break };
            if let Some(ev) = parse_feedback_line(&line) {
                if tx.send(ev).is_err() {
                    break;
                }
            }
        }
    });
    rx
}

pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchTable>, AppError> {
    Ok(run_bench(&fixtures::qubo_benchmarks(), cfg)?)
}
