//! Task annotation: prompt construction, provider dispatch, response parsing
//! and the deterministic offline stub.

mod batch;
mod prompt;
mod provider;
mod records;
mod response;
mod stub;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use batch::{annotate_task, run_annotation_batch, run_batch_with_backends, Backend};
pub use prompt::{build_system_prompt, build_user_prompt};
pub use provider::{
    backend_for, credential_var, CompletionProvider, CompletionRequest, HttpProvider, ProviderError,
};
pub use records::{
    read_annotations, read_failures, write_annotations, write_failures, AnnotationRow, FailureRow,
};
pub use response::{parse_score_response, ScoreParseError};
pub use stub::{stub_annotate, StubProvider};

/// One of the four subscales every task is rated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    /// Performance variance between trained professionals.
    Pv,
    /// Availability of digital training data.
    Da,
    /// Tacit knowledge (2 = little required).
    Tk,
    /// Algorithmic efficiency gap (2 = minimal human advantage).
    Ag,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Pv, Factor::Da, Factor::Tk, Factor::Ag];

    /// JSON key used in model responses.
    pub fn key(self) -> &'static str {
        match self {
            Factor::Pv => "PV",
            Factor::Da => "DA",
            Factor::Tk => "TK",
            Factor::Ag => "AG",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            Factor::Pv => "pv",
            Factor::Da => "da",
            Factor::Tk => "tk",
            Factor::Ag => "ag",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("score {value} for {factor} is outside {{0, 1, 2}}")]
pub struct ScoreRangeError {
    pub factor: Factor,
    pub value: i64,
}

/// The four 0-2 ratings for one task from one model. Construction checks
/// the range, so a value of this type is always valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct SubScores {
    pv: u8,
    da: u8,
    tk: u8,
    ag: u8,
}

impl SubScores {
    pub fn new(pv: i64, da: i64, tk: i64, ag: i64) -> Result<Self, ScoreRangeError> {
        let check = |factor, value: i64| {
            if (0..=2).contains(&value) {
                Ok(value as u8)
            } else {
                Err(ScoreRangeError { factor, value })
            }
        };
        Ok(Self {
            pv: check(Factor::Pv, pv)?,
            da: check(Factor::Da, da)?,
            tk: check(Factor::Tk, tk)?,
            ag: check(Factor::Ag, ag)?,
        })
    }

    pub fn get(&self, factor: Factor) -> u8 {
        match factor {
            Factor::Pv => self.pv,
            Factor::Da => self.da,
            Factor::Tk => self.tk,
            Factor::Ag => self.ag,
        }
    }

    pub fn pv(&self) -> u8 {
        self.pv
    }
    pub fn da(&self) -> u8 {
        self.da
    }
    pub fn tk(&self) -> u8 {
        self.tk
    }
    pub fn ag(&self) -> u8 {
        self.ag
    }

    pub fn sum(&self) -> u8 {
        self.pv + self.da + self.tk + self.ag
    }
}

impl TryFrom<[i64; 4]> for SubScores {
    type Error = ScoreRangeError;
    fn try_from(v: [i64; 4]) -> Result<Self, Self::Error> {
        SubScores::new(v[0], v[1], v[2], v[3])
    }
}

impl From<SubScores> for [i64; 4] {
    fn from(s: SubScores) -> Self {
        [s.pv as i64, s.da as i64, s.tk as i64, s.ag as i64]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provider {
    /// OpenAI-style chat completions endpoint.
    A,
    /// Anthropic-style messages endpoint.
    B,
    /// Gemini-style generateContent endpoint.
    C,
    /// Offline deterministic annotator.
    Stub,
}

impl Provider {
    pub fn label(self) -> &'static str {
        match self {
            Provider::A => "a",
            Provider::B => "b",
            Provider::C => "c",
            Provider::Stub => "stub",
        }
    }
}

impl FromStr for Provider {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Provider::A),
            "b" => Ok(Provider::B),
            "c" => Ok(Provider::C),
            "stub" => Ok(Provider::Stub),
            other => Err(format!("unknown provider `{other}` (expected a, b, c or stub)")),
        }
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelIdError {
    #[error("stub model `{0}` needs a seed")]
    StubWithoutSeed(String),
    #[error("temperature must be a finite number >= 0, got {0}")]
    BadTemperature(f64),
    #[error("model name must not be empty")]
    EmptyName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelId {
    provider: Provider,
    model_name: String,
    temperature: f64,
    seed: Option<u64>,
}

impl ModelId {
    pub fn new(
        provider: Provider,
        model_name: impl Into<String>,
        temperature: f64,
        seed: Option<u64>,
    ) -> Result<Self, ModelIdError> {
        let model_name = model_name.into();
        if model_name.is_empty() {
            return Err(ModelIdError::EmptyName);
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(ModelIdError::BadTemperature(temperature));
        }
        if provider == Provider::Stub && seed.is_none() {
            return Err(ModelIdError::StubWithoutSeed(model_name));
        }
        Ok(Self {
            provider,
            model_name,
            temperature,
            seed,
        })
    }

    pub fn stub(model_name: impl Into<String>, seed: u64) -> Self {
        Self::new(Provider::Stub, model_name, 0.0, Some(seed)).expect("stub model with seed")
    }

    pub fn provider(&self) -> Provider {
        self.provider
    }
    pub fn model_name(&self) -> &str {
        &self.model_name
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `provider:model_name`, the identity used for uniqueness and as the
    /// model label in every downstream table.
    pub fn key(&self) -> String {
        model_key(self.provider, &self.model_name)
    }
}

pub fn model_key(provider: Provider, model_name: &str) -> String {
    format!("{}:{}", provider.label(), model_name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAnnotation {
    pub task_id: String,
    pub model: ModelId,
    pub scores: SubScores,
    pub raw_response: String,
    pub attempt_count: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("gave up after {attempts} attempts: {last_reason}")]
    ExhaustedRetries { attempts: u32, last_reason: String },
    #[error("missing credentials for provider {provider}: set {variable}")]
    MissingCredentials {
        provider: Provider,
        variable: &'static str,
    },
    #[error("provider rejected the request on attempt {attempts}: {reason}")]
    Rejected { attempts: u32, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFailure {
    pub task_id: String,
    pub model: ModelId,
    pub reason: String,
}

/// Output of a batch run. Every (task, model) pair appears exactly once in
/// either `annotations` or `failures`; both are sorted by task id then
/// model key.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub annotations: Vec<TaskAnnotation>,
    pub failures: Vec<AnnotationFailure>,
    /// Keyed by [`ModelId::key`].
    pub success_rate: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationConfig {
    pub max_retries: u32,
    pub max_inflight: usize,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    /// Minimum spacing between request starts to the same provider.
    pub min_request_interval_ms: u64,
    pub request_timeout_ms: u64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            max_retries: 3,
            max_inflight: 8,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            min_request_interval_ms: 0,
            request_timeout_ms: 120_000,
        }
    }
}

impl AnnotationConfig {
    /// Delay before retry number `attempt` (1-based count of attempts
    /// already made).
    pub fn backoff(&self, attempt: u32) -> std::time::Duration {
        let factor = 1u64.checked_shl(attempt.saturating_sub(1)).unwrap_or(u64::MAX);
        let ms = self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms);
        std::time::Duration::from_millis(ms)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchConfigError {
    #[error("no models configured")]
    NoModels,
    #[error("no tasks to annotate")]
    NoTasks,
    #[error("max_inflight must be at least 1")]
    ZeroInflight,
    #[error("model `{0}` listed twice")]
    DuplicateModel(String),
    #[error(transparent)]
    Credentials(#[from] AnnotationError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subscores_range() {
        assert!(SubScores::new(0, 1, 2, 2).is_ok());
        assert_eq!(
            SubScores::new(3, 1, 0, 2),
            Err(ScoreRangeError {
                factor: Factor::Pv,
                value: 3
            })
        );
        assert!(SubScores::new(0, 0, -1, 0).is_err());
        let bad: Result<SubScores, _> = serde_json::from_str("[0,0,0,5]");
        assert!(bad.is_err());
    }

    #[test]
    fn stub_model_needs_seed() {
        assert_eq!(
            ModelId::new(Provider::Stub, "s", 0.0, None),
            Err(ModelIdError::StubWithoutSeed("s".into()))
        );
        assert!(ModelId::new(Provider::A, "m", -0.1, None).is_err());
        assert_eq!(ModelId::stub("stub-0", 1).key(), "stub:stub-0");
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let cfg = AnnotationConfig {
            backoff_base_ms: 100,
            backoff_max_ms: 1000,
            ..Default::default()
        };
        assert_eq!(cfg.backoff(1).as_millis(), 100);
        assert_eq!(cfg.backoff(2).as_millis(), 200);
        assert_eq!(cfg.backoff(3).as_millis(), 400);
        assert_eq!(cfg.backoff(5).as_millis(), 1000);
        assert_eq!(cfg.backoff(80).as_millis(), 1000);
    }
}
