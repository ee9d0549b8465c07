//! Search runs: request shape, persisted record, and the run-directory store.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ansatz_forge::llm::{ExhaustiveProposer, LlmConfig, LlmProposer, Proposer, RandomProposer};
use ansatz_forge::pauli::Hamiltonian;
use ansatz_forge::problems::ProblemFile;
use ansatz_forge::search::{
    run_search_with, FeedbackSource, SearchConfig, SearchHooks, SearchReport, SearchStatus,
};
use ansatz_forge::vqe::TrainConfig;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::AppError;

/// Which proposer drives a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposerSpec {
    Llm {
        #[serde(default)]
        config: LlmConfig,
    },
    Random {
        #[serde(default)]
        seed: u64,
        /// Restricts the block ids drawn; all six when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ids: Option<Vec<usize>>,
    },
    Exhaustive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ids: Option<Vec<usize>>,
    },
}

impl Default for ProposerSpec {
    fn default() -> Self {
        ProposerSpec::Random { seed: 0, ids: None }
    }
}

fn all_ids() -> Vec<usize> {
    (0..ansatz_forge::circuit::N_BLOCK_KINDS).collect()
}

impl ProposerSpec {
    pub fn build(&self, cfg: &SearchConfig) -> Result<Box<dyn Proposer + Send>, AppError> {
        Ok(match self {
            ProposerSpec::Llm { config } => Box::new(LlmProposer::new(config.clone())?),
            ProposerSpec::Random { seed, ids } => {
                let ids = ids.clone().unwrap_or_else(all_ids);
                Box::new(RandomProposer::with_ids(*seed, cfg, &ids)?)
            }
            ProposerSpec::Exhaustive { ids } => {
                let ids = ids.clone().unwrap_or_else(all_ids);
                Box::new(ExhaustiveProposer::new(cfg, &ids)?)
            }
        })
    }
}

/// Body of `POST /runs`, and what `search` assembles from its flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub problem: ProblemFile,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub proposer: ProposerSpec,
}

/// One search run as stored on disk and served over HTTP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub problem: ProblemFile,
    pub proposer: ProposerSpec,
    pub search_config: SearchConfig,
    pub train_config: TrainConfig,
    pub status: SearchStatus,
    pub report: SearchReport,
}

impl RunRecord {
    /// Compact listing row for `GET /runs`.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "run_id": self.run_id,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "problem": self.problem.display_name(),
            "status": self.status,
            "iterations_completed": self.report.iterations.len(),
            "max_iterations": self.search_config.max_iterations,
            "best_value": self.report.best.as_ref().map(|b| b.raw_value),
        })
    }
}

/// A validated request, ready to execute.
pub struct PreparedRun {
    pub record: RunRecord,
    pub hamiltonian: Hamiltonian,
    pub proposer: Box<dyn Proposer + Send>,
}

/// Encodes the problem, checks the configuration and builds the proposer,
/// so that bad requests fail before a run id is handed out.
pub fn prepare(mut req: RunRequest) -> Result<PreparedRun, AppError> {
    let hamiltonian = req.problem.spec.to_hamiltonian()?;
    req.search.n_qubits = hamiltonian.n_qubits();
    req.search.validate()?;
    req.train.validate()?;
    let proposer = req.proposer.build(&req.search)?;
    let now = Utc::now();
    let report = SearchReport::new(&req.search, &req.train);
    let record = RunRecord {
        run_id: uuid::Uuid::new_v4().simple().to_string(),
        created_at: now,
        updated_at: now,
        problem: req.problem,
        proposer: req.proposer,
        search_config: req.search,
        train_config: req.train,
        status: SearchStatus::Running,
        report,
    };
    Ok(PreparedRun { record, hamiltonian, proposer })
}

/// Runs the search loop to completion, handing `on_update` a fresh record
/// after every iteration and once at the end.
pub fn execute(
    run: PreparedRun,
    feedback: &mut dyn FeedbackSource,
    on_update: &mut dyn FnMut(&RunRecord),
) -> RunRecord {
    let PreparedRun { mut record, hamiltonian, mut proposer } = run;
    let search_cfg = record.search_config.clone();
    let train_cfg = record.train_config.clone();
    let mut observer = |snapshot: &SearchReport| {
        record.report = snapshot.clone();
        record.status = snapshot.status;
        record.updated_at = Utc::now();
        on_update(&record);
    };
    let hooks = SearchHooks { observer: Some(&mut observer), ..SearchHooks::default() };
    let outcome = run_search_with(
        &hamiltonian,
        &mut proposer,
        &train_cfg,
        &search_cfg,
        feedback,
        hooks,
    );
    if let Err(e) = outcome {
        record.status = SearchStatus::Aborted;
        record.report.status = SearchStatus::Aborted;
        record.report.error = Some(e.to_string());
        record.updated_at = Utc::now();
        on_update(&record);
    }
    record
}

/// One `<run_id>.json` per run.
#[derive(Debug, Clone)]
pub struct RunStore {
    dir: PathBuf,
}

impl RunStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, AppError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, run_id: &str) -> PathBuf {
        self.dir.join(format!("{run_id}.json"))
    }

    /// Writes through a temp file in the same directory and renames it
    /// into place.
    pub fn save(&self, record: &RunRecord) -> Result<(), AppError> {
        let path = self.path_of(&record.run_id);
        let body = serde_json::to_vec_pretty(record).expect("run records serialize");
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| AppError::io(&self.dir, e))?;
        tmp.write_all(&body).map_err(|e| AppError::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| AppError::io(&path, e.error))?;
        Ok(())
    }

    pub fn load(&self, run_id: &str) -> Result<RunRecord, AppError> {
        let path = self.path_of(run_id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(AppError::RunNotFound(run_id.to_string()))
            }
            Err(e) => return Err(AppError::io(&path, e)),
        };
        serde_json::from_str(&text).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
    }

    /// Every readable record, oldest first. Unreadable files are skipped
    /// with a warning.
    pub fn load_all(&self) -> Result<Vec<RunRecord>, AppError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| AppError::io(&self.dir, e))? {
            let path = entry.map_err(|e| AppError::io(&self.dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let parsed = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<RunRecord>(&t).map_err(|e| e.to_string()));
            match parsed {
                Ok(r) => out.push(r),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.run_id.cmp(&b.run_id)));
        Ok(out)
    }

    /// Loads everything and marks runs left `running` by a previous process
    /// as aborted, since nothing will resume them.
    pub fn recover(&self) -> Result<Vec<RunRecord>, AppError> {
        let mut records = self.load_all()?;
        for r in records.iter_mut().filter(|r| r.status == SearchStatus::Running) {
            r.status = SearchStatus::Aborted;
            r.report.status = SearchStatus::Aborted;
            r.report.error = Some("interrupted: the service stopped before the run finished".into());
            r.updated_at = Utc::now();
            self.save(r)?;
        }
        Ok(records)
    }
}
