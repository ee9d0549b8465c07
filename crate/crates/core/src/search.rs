//! The proposal loop: prompt construction, reply parsing, candidate
//! training, history normalization, ranking and reviewer feedback.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};
use std::sync::mpsc;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;
use thiserror::Error;

use crate::circuit::{decode, AnsatzGenome, Block, CircuitError, BLOCK_TEMPLATES};
use crate::llm::{Proposer, ProposerError};
use crate::pauli::Hamiltonian;
use crate::vqe::{train, TrainConfig, TrainReport};

pub const SYSTEM_PROMPT: &str =
    "You are an expert in the field of quantum computing, especially for quantum architecture design.";
/// Extra attempts after a reply that cannot be parsed.
pub const MAX_REPROMPTS: usize = 3;

static BLOCK_PATTERN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[\s*(\d+)\s*,\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*\]").expect("valid pattern")
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub n_blocks: usize,
    pub n_qubits: usize,
    pub max_iterations: usize,
    /// Fills the `[name]` slot of the prompt.
    pub task_description: String,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_blocks: AnsatzGenome::DEFAULT_BLOCKS,
            n_qubits: 2,
            max_iterations: 10,
            task_description: "the given".into(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.n_blocks == 0 {
            return Err(SearchError::Config("n_blocks must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(SearchError::Config("max_iterations must be at least 1".into()));
        }
        if self.n_qubits < 2 {
            return Err(SearchError::Config("blocks need at least 2 qubits".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("search Hamiltonian has {hamiltonian} qubits but the search is configured for {config}")]
    QubitMismatch { hamiltonian: usize, config: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("expected {expected} blocks of the form [id, (a,b)], found {found}")]
    Format { expected: usize, found: usize, raw: String },
    #[error("{0}")]
    Invalid(CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub genome: AnsatzGenome,
    pub raw_value: f64,
    pub gate_count: usize,
    /// Epochs the training run used.
    pub epochs: usize,
    pub normalized: f64,
    /// Angles that produced `raw_value`.
    pub params: Vec<f64>,
    #[serde(default)]
    pub rejected: bool,
}

impl HistoryEntry {
    pub fn prompt_line(&self) -> String {
        let mut line = format!(
            "design: {} -> value: {}, gates: {}, normalized: {}",
            self.genome, self.raw_value, self.gate_count, self.normalized
        );
        if self.rejected {
            line.push_str(" (rejected by reviewer)");
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackNote {
    /// Number of iterations completed when the note arrived.
    pub iteration: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchHistory {
    pub entries: Vec<HistoryEntry>,
    pub feedback_notes: Vec<FeedbackNote>,
}

impl SearchHistory {
    pub fn push(&mut self, entry: HistoryEntry) {
        self.entries.push(entry);
        normalize(&mut self.entries);
    }

    /// Ranking-minimal entry among those not rejected.
    pub fn best(&self) -> Option<&HistoryEntry> {
        self.entries.iter().filter(|e| !e.rejected).min_by(|a, b| rank(a, b))
    }

    pub fn entry_for_iteration(&self, iteration: usize) -> Option<&HistoryEntry> {
        self.entries.iter().find(|e| e.iteration == iteration)
    }
}

/// Value ascending, then gate count ascending, then earliest iteration.
pub fn rank(a: &HistoryEntry, b: &HistoryEntry) -> Ordering {
    a.raw_value
        .total_cmp(&b.raw_value)
        .then(a.gate_count.cmp(&b.gate_count))
        .then(a.iteration.cmp(&b.iteration))
}

/// Min-max scaling of raw values into [0, 1]; 0 is the lowest value.
pub fn normalize(entries: &mut [HistoryEntry]) {
    let (lo, hi) = entries.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
        (lo.min(e.raw_value), hi.max(e.raw_value))
    });
    let span = hi - lo;
    for e in entries.iter_mut() {
        e.normalized = if span > 0.0 { (e.raw_value - lo) / span } else { 0.0 };
    }
}

pub fn build_prompt(history: &SearchHistory, cfg: &SearchConfig) -> PromptBundle {
    let mut user = format!(
        "Your task is to help select the best ansatz for variational quantum eigensolver to compute \
         the ground state energy of {} molecule. The ansatz works on {} qubits and contains {} \
         blocks. For each block, there are {} types of operations to choose from:\n",
        cfg.task_description,
        cfg.n_qubits,
        cfg.n_blocks,
        BLOCK_TEMPLATES.len()
    );
    for t in &BLOCK_TEMPLATES {
        user.push_str(&format!("ID {}: {}\n", t.id, t.description));
    }
    user.push_str(
        "Please output an ID list for the ansatz as well as the selected qubits for each block.\n",
    );
    user.push_str(&format!(
        "Qubits are numbered 0 to {}, the two qubits of a block must differ, and the list must \
         contain exactly {} blocks.\n",
        cfg.n_qubits - 1,
        cfg.n_blocks
    ));
    user.push_str(
        "For example: [1, (0,1)], [2, (1,2)], ...., [0,(4,5)] means we use operation 1 for block1 \
         and the block1 is on qubits(0,1), operation2 for block2 and block2 is on qubits(1,2), \
         ...,operation 0 for block6 and the block6 is on qubits(4,5).\n",
    );
    if !history.entries.is_empty() {
        user.push_str(
            "\nDesigns evaluated so far (lower value is better, normalized 0 marks the best):\n",
        );
        for e in &history.entries {
            user.push_str(&e.prompt_line());
            user.push('\n');
        }
    }
    if !history.feedback_notes.is_empty() {
        user.push_str("\nReviewer feedback:\n");
        for n in &history.feedback_notes {
            user.push_str(&format!("- {}\n", n.text));
        }
    }
    PromptBundle { system: SYSTEM_PROMPT.to_string(), user }
}

fn scan_blocks(text: &str) -> Vec<Block> {
    BLOCK_PATTERN
        .captures_iter(text)
        .map(|cap| {
            let nums: Option<Vec<usize>> = (1..=3).map(|i| cap[i].parse().ok()).collect();
            match nums {
                Some(n) => Block { id: n[0], a: n[1], b: n[2] },
                // Digits too long for usize still count as a block so the
                // position in the error matches the reply.
                None => Block { id: usize::MAX, a: 0, b: 0 },
            }
        })
        .collect()
}

pub fn parse_proposal(text: &str, cfg: &SearchConfig) -> Result<AnsatzGenome, ParseError> {
    let blocks = scan_blocks(text);
    if blocks.len() != cfg.n_blocks {
        return Err(ParseError::Format {
            expected: cfg.n_blocks,
            found: blocks.len(),
            raw: text.to_string(),
        });
    }
    let genome = AnsatzGenome::new(blocks);
    genome.validate(cfg.n_qubits).map_err(ParseError::Invalid)?;
    Ok(genome)
}

/// Bracket-syntax genome with any positive number of blocks.
pub fn parse_genome(text: &str, n_qubits: usize) -> Result<AnsatzGenome, ParseError> {
    let blocks = scan_blocks(text);
    if blocks.is_empty() {
        return Err(ParseError::Format { expected: 1, found: 0, raw: text.to_string() });
    }
    let genome = AnsatzGenome::new(blocks);
    genome.validate(n_qubits).map_err(ParseError::Invalid)?;
    Ok(genome)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackEvent {
    Note { text: String },
    Decision { iteration: usize, accept: bool },
}

/// Source of reviewer input, drained by the loop between iterations.
pub trait FeedbackSource {
    /// Returns everything pending; `completed` is the number of finished
    /// iterations.
    fn poll(&mut self, completed: usize) -> Vec<FeedbackEvent>;
}

pub struct NoFeedback;

impl FeedbackSource for NoFeedback {
    fn poll(&mut self, _completed: usize) -> Vec<FeedbackEvent> {
        Vec::new()
    }
}

impl FeedbackSource for mpsc::Receiver<FeedbackEvent> {
    fn poll(&mut self, _completed: usize) -> Vec<FeedbackEvent> {
        self.try_iter().collect()
    }
}

/// Events released once a given number of iterations has completed.
#[derive(Debug, Clone, Default)]
pub struct ScriptedFeedback {
    pending: BTreeMap<usize, VecDeque<FeedbackEvent>>,
}

impl ScriptedFeedback {
    pub fn at(mut self, completed: usize, event: FeedbackEvent) -> Self {
        self.pending.entry(completed).or_default().push_back(event);
        self
    }
}

impl FeedbackSource for ScriptedFeedback {
    fn poll(&mut self, completed: usize) -> Vec<FeedbackEvent> {
        let due: Vec<usize> = self.pending.range(..=completed).map(|(&k, _)| k).collect();
        due.into_iter()
            .flat_map(|k| self.pending.remove(&k).unwrap_or_default())
            .collect()
    }
}

pub trait Clock {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always reports the same instant; keeps reports byte-reproducible.
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Running,
    Finished,
    Aborted,
    NoCandidate,
}

impl SearchStatus {
    pub fn is_terminal(self) -> bool {
        self != SearchStatus::Running
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IterationOutcome {
    Evaluated { cached: bool },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub attempts: usize,
    pub outcome: IterationOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub iteration: usize,
    pub attempt: usize,
    pub prompt: PromptBundle,
    pub reply: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub status: SearchStatus,
    pub config: SearchConfig,
    pub train_config: TrainConfig,
    pub best: Option<HistoryEntry>,
    pub history: SearchHistory,
    pub iterations: Vec<IterationRecord>,
    pub prompt_trail: Vec<PromptRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SearchReport {
    /// A report with no iterations yet, status running.
    pub fn new(config: &SearchConfig, train_config: &TrainConfig) -> Self {
        Self {
            status: SearchStatus::Running,
            config: config.clone(),
            train_config: train_config.clone(),
            best: None,
            history: SearchHistory::default(),
            iterations: Vec::new(),
            prompt_trail: Vec::new(),
            error: None,
        }
    }

    fn refresh_best(&mut self) {
        self.best = self.history.best().cloned();
    }

    fn apply(&mut self, events: Vec<FeedbackEvent>, completed: usize) {
        if events.is_empty() {
            return;
        }
        for ev in events {
            match ev {
                FeedbackEvent::Note { text } => {
                    self.history.feedback_notes.push(FeedbackNote { iteration: completed, text })
                }
                FeedbackEvent::Decision { iteration, accept } => {
                    match self.history.entries.iter_mut().find(|e| e.iteration == iteration) {
                        Some(e) => e.rejected = !accept,
                        None => log::warn!("decision for iteration {iteration} has no entry"),
                    }
                }
            }
        }
        self.refresh_best();
    }
}

/// Optional hooks for [`run_search_with`].
pub struct SearchHooks<'a> {
    pub clock: &'a dyn Clock,
    /// Called with a snapshot after every iteration and at the end.
    pub observer: Option<&'a mut dyn FnMut(&SearchReport)>,
}

impl Default for SearchHooks<'_> {
    fn default() -> Self {
        Self { clock: &SystemClock, observer: None }
    }
}

pub fn run_search(
    hamiltonian: &Hamiltonian,
    proposer: &mut dyn Proposer,
    train_cfg: &TrainConfig,
    cfg: &SearchConfig,
    feedback: &mut dyn FeedbackSource,
) -> Result<SearchReport, SearchError> {
    run_search_with(hamiltonian, proposer, train_cfg, cfg, feedback, SearchHooks::default())
}

fn notify(report: &SearchReport, hooks: &mut SearchHooks<'_>) {
    if let Some(obs) = hooks.observer.as_mut() {
        obs(report);
    }
}

/// Runs up to `cfg.max_iterations` propose/parse/train rounds.
///
/// Configuration problems are returned as errors before the first round;
/// everything after that ends up in the report's status.
pub fn run_search_with(
    hamiltonian: &Hamiltonian,
    proposer: &mut dyn Proposer,
    train_cfg: &TrainConfig,
    cfg: &SearchConfig,
    feedback: &mut dyn FeedbackSource,
    mut hooks: SearchHooks<'_>,
) -> Result<SearchReport, SearchError> {
    cfg.validate()?;
    train_cfg.validate().map_err(|e| SearchError::Config(e.to_string()))?;
    if hamiltonian.n_qubits() != cfg.n_qubits {
        return Err(SearchError::QubitMismatch {
            hamiltonian: hamiltonian.n_qubits(),
            config: cfg.n_qubits,
        });
    }

    let mut report = SearchReport::new(cfg, train_cfg);
    let mut cache: BTreeMap<AnsatzGenome, TrainReport> = BTreeMap::new();

    'outer: for iteration in 1..=cfg.max_iterations {
        report.apply(feedback.poll(iteration - 1), iteration - 1);
        let started_at = hooks.clock.now();
        let base = build_prompt(&report.history, cfg);
        let mut prompt = base.clone();
        let mut genome = None;
        let mut last_error = String::new();
        let mut attempts = 0;

        for attempt in 0..=MAX_REPROMPTS {
            attempts = attempt + 1;
            let reply = match proposer.propose(&prompt) {
                Ok(r) => r,
                Err(ProposerError::Exhausted) => {
                    log::info!("proposer exhausted after {} iterations", iteration - 1);
                    report.prompt_trail.push(PromptRecord {
                        iteration,
                        attempt,
                        prompt: prompt.clone(),
                        reply: None,
                    });
                    break 'outer;
                }
                Err(e) => {
                    report.prompt_trail.push(PromptRecord {
                        iteration,
                        attempt,
                        prompt: prompt.clone(),
                        reply: None,
                    });
                    report.status = SearchStatus::Aborted;
                    report.error = Some(e.to_string());
                    report.iterations.push(IterationRecord {
                        iteration,
                        started_at,
                        finished_at: hooks.clock.now(),
                        attempts,
                        outcome: IterationOutcome::Skipped { reason: e.to_string() },
                    });
                    notify(&report, &mut hooks);
                    return Ok(report);
                }
            };
            report.prompt_trail.push(PromptRecord {
                iteration,
                attempt,
                prompt: prompt.clone(),
                reply: Some(reply.clone()),
            });
            match parse_proposal(&reply, cfg) {
                Ok(g) => {
                    genome = Some(g);
                    break;
                }
                Err(e) => {
                    last_error = e.to_string();
                    prompt = PromptBundle {
                        system: base.system.clone(),
                        user: format!(
                            "{}\nYour previous reply could not be used: {}. Answer again with \
                             exactly {} entries of the form [id, (a,b)].\n",
                            base.user, last_error, cfg.n_blocks
                        ),
                    };
                }
            }
        }

        let outcome = match genome {
            None => IterationOutcome::Skipped { reason: last_error },
            Some(genome) => {
                let cached = cache.contains_key(&genome);
                let trained = match cache.get(&genome) {
                    Some(r) => Ok(r.clone()),
                    None => decode(&genome, cfg.n_qubits)
                        .map_err(|e| e.to_string())
                        .and_then(|c| train(&c, hamiltonian, train_cfg).map_err(|e| e.to_string())),
                };
                match trained {
                    Ok(tr) => {
                        cache.insert(genome.clone(), tr.clone());
                        report.history.push(HistoryEntry {
                            iteration,
                            genome,
                            raw_value: tr.final_energy,
                            gate_count: tr.gate_count,
                            epochs: tr.epochs_run,
                            normalized: 0.0,
                            params: tr.final_params,
                            rejected: false,
                        });
                        report.refresh_best();
                        IterationOutcome::Evaluated { cached }
                    }
                    Err(reason) => IterationOutcome::Skipped { reason },
                }
            }
        };
        report.iterations.push(IterationRecord {
            iteration,
            started_at,
            finished_at: hooks.clock.now(),
            attempts,
            outcome,
        });
        report.apply(feedback.poll(iteration), iteration);
        notify(&report, &mut hooks);
    }

    report.refresh_best();
    report.status = if report.best.is_some() {
        SearchStatus::Finished
    } else {
        SearchStatus::NoCandidate
    };
    notify(&report, &mut hooks);
    Ok(report)
}
