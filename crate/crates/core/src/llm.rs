//! Genome proposers: an OpenAI-compatible chat-completions client plus
//! seeded random and exhaustive generators for offline runs.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::circuit::{AnsatzGenome, Block, N_BLOCK_KINDS};
use crate::search::{PromptBundle, SearchConfig};

pub const DEFAULT_API_KEY_ENV: &str = "ANSATZ_FORGE_API_KEY";
/// Largest genome space the exhaustive proposer will walk.
pub const MAX_EXHAUSTIVE_SPACE: u128 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: usize, message: String },
    #[error("malformed response: {0}")]
    Protocol(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProposerError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("genome space of {size} exceeds the limit of {limit}")]
    SpaceTooLarge { size: u128, limit: u128 },
    #[error("every genome in the space has been proposed")]
    Exhausted,
    #[error("invalid proposer configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: ChatRole::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: ChatRole::User, content: content.into() }
    }
}

/// Where and how to reach the chat endpoint. The key itself is never
/// stored here, only the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: usize,
    pub timeout_secs: f64,
    pub api_key_env: String,
    /// First retry delay; doubles on every further retry.
    pub backoff_base_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4".into(),
            temperature: 0.7,
            max_retries: 3,
            timeout_secs: 120.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            backoff_base_ms: 1000,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.endpoint_url.trim().is_empty() {
            return Err(LlmError::Config("endpoint_url is empty".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::Config("temperature must be non-negative".into()));
        }
        if !(self.timeout_secs > 0.0) {
            return Err(LlmError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    fn api_key(&self) -> Result<String, LlmError> {
        match std::env::var(&self.api_key_env) {
            Ok(k) if !k.trim().is_empty() => Ok(k),
            _ => Err(LlmError::Config(format!(
                "no API key in environment variable {}",
                self.api_key_env
            ))),
        }
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: usize) -> Duration {
        let factor = 1u64 << (retry.saturating_sub(1)).min(20);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor))
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fail(LlmError),
}

/// Sends one chat-completions request and returns the first choice's
/// message content. Transport failures, 429 and 5xx are retried with
/// exponential backoff.
pub fn chat(cfg: &LlmConfig, messages: &[ChatMessage]) -> Result<String, LlmError> {
    cfg.validate()?;
    let key = cfg.api_key()?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let body = ChatRequest { model: &cfg.model_name, messages, temperature: cfg.temperature };
    let auth = format!("Bearer {key}");

    let mut last = String::new();
    for attempt in 0..=cfg.max_retries {
        if attempt > 0 {
            let wait = cfg.backoff(attempt);
            log::info!("retrying chat request in {wait:?} after: {last}");
            std::thread::sleep(wait);
        }
        log::debug!("POST {} (model {}, attempt {})", cfg.endpoint_url, cfg.model_name, attempt + 1);
        let outcome = match agent
            .post(&cfg.endpoint_url)
            .header("Authorization", &auth)
            .send_json(&body)
        {
            Err(e) => Attempt::Retry(e.to_string()),
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let text = resp.body_mut().read_to_string();
                match (status, text) {
                    (429, _) | (500..=599, _) => Attempt::Retry(format!("HTTP {status}")),
                    (200..=299, Ok(text)) => match extract_content(&text) {
                        Ok(c) => Attempt::Done(c),
                        Err(e) => Attempt::Fail(e),
                    },
                    (200..=299, Err(e)) => Attempt::Retry(e.to_string()),
                    (_, _) => Attempt::Fail(LlmError::Protocol(format!("HTTP {status}"))),
                }
            }
        };
        match outcome {
            Attempt::Done(c) => return Ok(c),
            Attempt::Fail(e) => return Err(e),
            Attempt::Retry(msg) => last = msg,
        }
    }
    Err(LlmError::Transport { attempts: cfg.max_retries + 1, message: last })
}

fn extract_content(body: &str) -> Result<String, LlmError> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| LlmError::Protocol(format!("response is not JSON: {e}")))?;
    v.get("choices")
        .and_then(Value::as_array)
        .and_then(|c| c.first())
        .and_then(|c| c.pointer("/message/content"))
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| LlmError::Protocol("missing choices[0].message.content".into()))
}

/// Anything that turns a prompt into reply text.
pub trait Proposer {
    fn propose(&mut self, prompt: &PromptBundle) -> Result<String, ProposerError>;
}

impl<P: Proposer + ?Sized> Proposer for Box<P> {
    fn propose(&mut self, prompt: &PromptBundle) -> Result<String, ProposerError> {
        (**self).propose(prompt)
    }
}

pub struct LlmProposer {
    cfg: LlmConfig,
}

impl LlmProposer {
    pub fn new(cfg: LlmConfig) -> Result<Self, ProposerError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl Proposer for LlmProposer {
    fn propose(&mut self, prompt: &PromptBundle) -> Result<String, ProposerError> {
        let messages = [ChatMessage::system(&prompt.system), ChatMessage::user(&prompt.user)];
        Ok(chat(&self.cfg, &messages)?)
    }
}

fn check_ids(ids: &[usize]) -> Result<Vec<usize>, ProposerError> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(ProposerError::Config("allowed block ids are empty".into()));
    }
    if let Some(&bad) = ids.iter().find(|&&id| id >= N_BLOCK_KINDS) {
        return Err(ProposerError::Config(format!("unknown block id {bad}")));
    }
    Ok(ids)
}

fn check_space(cfg: &SearchConfig) -> Result<(), ProposerError> {
    if cfg.n_qubits < 2 {
        return Err(ProposerError::Config("blocks need at least 2 qubits".into()));
    }
    if cfg.n_blocks == 0 {
        return Err(ProposerError::Config("n_blocks must be at least 1".into()));
    }
    Ok(())
}

/// Ignores the prompt and draws a uniformly random valid genome.
pub struct RandomProposer {
    rng: ChaCha8Rng,
    ids: Vec<usize>,
    n_qubits: usize,
    n_blocks: usize,
}

impl RandomProposer {
    pub fn new(seed: u64, cfg: &SearchConfig) -> Result<Self, ProposerError> {
        Self::with_ids(seed, cfg, &(0..N_BLOCK_KINDS).collect::<Vec<_>>())
    }

    pub fn with_ids(seed: u64, cfg: &SearchConfig, ids: &[usize]) -> Result<Self, ProposerError> {
        check_space(cfg)?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ids: check_ids(ids)?,
            n_qubits: cfg.n_qubits,
            n_blocks: cfg.n_blocks,
        })
    }

    pub fn next_genome(&mut self) -> AnsatzGenome {
        let blocks = (0..self.n_blocks)
            .map(|_| {
                let id = self.ids[self.rng.random_range(0..self.ids.len())];
                let a = self.rng.random_range(0..self.n_qubits);
                let mut b = self.rng.random_range(0..self.n_qubits - 1);
                if b >= a {
                    b += 1;
                }
                Block { id, a, b }
            })
            .collect();
        AnsatzGenome::new(blocks)
    }
}

impl Proposer for RandomProposer {
    fn propose(&mut self, _prompt: &PromptBundle) -> Result<String, ProposerError> {
        Ok(self.next_genome().to_string())
    }
}

/// Walks every valid genome in lexicographic order of
/// (id, a, b) per block, first block most significant.
pub struct ExhaustiveProposer {
    choices: Vec<Block>,
    n_blocks: usize,
    cursor: Option<Vec<usize>>,
}

impl ExhaustiveProposer {
    pub fn new(cfg: &SearchConfig, ids: &[usize]) -> Result<Self, ProposerError> {
        check_space(cfg)?;
        let ids = check_ids(ids)?;
        let mut choices = Vec::new();
        for &id in &ids {
            for a in 0..cfg.n_qubits {
                for b in (0..cfg.n_qubits).filter(|&b| b != a) {
                    choices.push(Block { id, a, b });
                }
            }
        }
        let size = (choices.len() as u128)
            .checked_pow(cfg.n_blocks.try_into().unwrap_or(u32::MAX))
            .unwrap_or(u128::MAX);
        if size > MAX_EXHAUSTIVE_SPACE {
            return Err(ProposerError::SpaceTooLarge { size, limit: MAX_EXHAUSTIVE_SPACE });
        }
        Ok(Self { choices, n_blocks: cfg.n_blocks, cursor: Some(vec![0; cfg.n_blocks]) })
    }

    pub fn space_size(&self) -> usize {
        self.choices.len().pow(self.n_blocks as u32)
    }

    pub fn next_genome(&mut self) -> Option<AnsatzGenome> {
        let digits = self.cursor.as_mut()?;
        let genome = AnsatzGenome::new(digits.iter().map(|&d| self.choices[d]).collect());
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                self.cursor = None;
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < self.choices.len() {
                break;
            }
            digits[pos] = 0;
        }
        Some(genome)
    }
}

impl Proposer for ExhaustiveProposer {
    fn propose(&mut self, _prompt: &PromptBundle) -> Result<String, ProposerError> {
        self.next_genome().map(|g| g.to_string()).ok_or(ProposerError::Exhausted)
    }
}
