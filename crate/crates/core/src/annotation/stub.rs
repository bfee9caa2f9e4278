use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::provider::{CompletionProvider, CompletionRequest, ProviderError};
use super::SubScores;

/// Offline annotator: scores are a pure function of `(task_id, seed)`.
///
/// SHA-256 of the task id and seed is reduced to one of the 81 score
/// combinations and decoded base 3 into (PV, DA, TK, AG).
pub fn stub_annotate(task_id: &str, model_seed: u64) -> SubScores {
    let mut h = Sha256::new();
    h.update(task_id.as_bytes());
    h.update([0u8]);
    h.update(model_seed.to_le_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    let mut combo = u64::from_le_bytes(word) % 81;
    let mut v = [0i64; 4];
    for slot in &mut v {
        *slot = (combo % 3) as i64;
        combo /= 3;
    }
    SubScores::new(v[0], v[1], v[2], v[3]).expect("base-3 digits are in range")
}

/// [`CompletionProvider`] wrapper around [`stub_annotate`]; replies with the
/// same JSON shape live models are asked for.
#[derive(Debug, Clone)]
pub struct StubProvider {
    seed: u64,
}

impl StubProvider {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

#[async_trait]
impl CompletionProvider for StubProvider {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<String, ProviderError> {
        let s = stub_annotate(request.task_id, self.seed);
        Ok(format!(
            r#"{{"PV": {}, "DA": {}, "TK": {}, "AG": {}}}"#,
            s.pv(),
            s.da(),
            s.tk(),
            s.ag()
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{parse_score_response, Factor};

    #[test]
    fn deterministic_and_seed_sensitive() {
        assert_eq!(stub_annotate("T1", 42), stub_annotate("T1", 42));
        let differs = (0..20).any(|s| stub_annotate("T1", s) != stub_annotate("T1", 42));
        assert!(differs);
    }

    #[test]
    fn value_frequencies_are_balanced() {
        let n = 1000;
        let mut counts = [[0usize; 3]; 4];
        for i in 0..n {
            let s = stub_annotate(&format!("task-{i:04}"), 42);
            for (fi, f) in Factor::ALL.iter().enumerate() {
                counts[fi][s.get(*f) as usize] += 1;
            }
        }
        for row in counts {
            for c in row {
                let share = c as f64 / n as f64;
                assert!((0.25..=0.42).contains(&share), "share {share}");
            }
        }
    }

    #[tokio::test]
    async fn provider_reply_parses_back() {
        let p = StubProvider::new(9);
        let raw = p
            .complete(CompletionRequest {
                task_id: "abc",
                system: "",
                user: "",
            })
            .await
            .unwrap();
        assert_eq!(parse_score_response(&raw).unwrap(), stub_annotate("abc", 9));
    }
}
