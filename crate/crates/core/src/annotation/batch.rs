use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::time::Duration;

use futures::stream::{self, StreamExt};
use tokio::sync::Mutex;
use tokio::time::Instant;

use super::prompt::{build_system_prompt, build_user_prompt};
use super::provider::{backend_for, CompletionProvider, CompletionRequest};
use super::response::parse_score_response;
use super::{
    AnnotationConfig, AnnotationError, AnnotationFailure, AnnotationSet, BatchConfigError, ModelId,
    Provider, TaskAnnotation,
};
use crate::ingest::TaskRecord;

/// Spaces out request starts to one provider.
#[derive(Debug)]
struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn new(interval: Duration) -> Self {
        Self {
            interval,
            next_slot: Mutex::new(None),
        }
    }

    async fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let slot = {
            let mut next = self.next_slot.lock().await;
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        tokio::time::sleep_until(slot).await;
    }
}

/// A model paired with the provider that serves it.
#[derive(Clone)]
pub struct Backend {
    pub model: ModelId,
    provider: Arc<dyn CompletionProvider>,
    limiter: Arc<RateLimiter>,
}

impl Backend {
    pub fn new(model: ModelId, provider: Arc<dyn CompletionProvider>) -> Self {
        Self {
            model,
            provider,
            limiter: Arc::new(RateLimiter::new(Duration::ZERO)),
        }
    }
}

/// Annotates one task with one model, retrying transport errors, rate
/// limits and unparseable replies with exponential backoff.
pub async fn annotate_task(
    task: &TaskRecord,
    backend: &Backend,
    config: &AnnotationConfig,
) -> Result<TaskAnnotation, AnnotationError> {
    let user = build_user_prompt(task);
    let request = CompletionRequest {
        task_id: &task.task_id,
        system: build_system_prompt(),
        user: &user,
    };
    let max_attempts = config.max_retries.saturating_add(1);
    let mut last_reason = String::new();
    for attempt in 1..=max_attempts {
        if attempt > 1 {
            tokio::time::sleep(config.backoff(attempt - 1)).await;
        }
        backend.limiter.acquire().await;
        match backend.provider.complete(request).await {
            Ok(raw) => match parse_score_response(&raw) {
                Ok(scores) => {
                    return Ok(TaskAnnotation {
                        task_id: task.task_id.clone(),
                        model: backend.model.clone(),
                        scores,
                        raw_response: raw,
                        attempt_count: attempt,
                    })
                }
                Err(e) => last_reason = format!("unparseable response: {e}"),
            },
            Err(e) if e.is_retryable() => last_reason = e.to_string(),
            Err(e) => {
                return Err(AnnotationError::Rejected {
                    attempts: attempt,
                    reason: e.to_string(),
                })
            }
        }
        log::debug!(
            "task {} / {}: attempt {attempt} failed: {last_reason}",
            task.task_id,
            backend.model.key()
        );
    }
    Err(AnnotationError::ExhaustedRetries {
        attempts: max_attempts,
        last_reason,
    })
}

fn validate(
    tasks: &[TaskRecord],
    models: &[ModelId],
    config: &AnnotationConfig,
) -> Result<(), BatchConfigError> {
    if models.is_empty() {
        return Err(BatchConfigError::NoModels);
    }
    if tasks.is_empty() {
        return Err(BatchConfigError::NoTasks);
    }
    if config.max_inflight == 0 {
        return Err(BatchConfigError::ZeroInflight);
    }
    let mut seen = HashSet::new();
    for m in models {
        if !seen.insert(m.key()) {
            return Err(BatchConfigError::DuplicateModel(m.key()));
        }
    }
    Ok(())
}

/// Annotates every task with every model, reading live-provider
/// credentials from the process environment.
pub async fn run_annotation_batch(
    tasks: &[TaskRecord],
    models: &[ModelId],
    config: &AnnotationConfig,
) -> Result<AnnotationSet, BatchConfigError> {
    validate(tasks, models, config)?;
    let backends = models
        .iter()
        .map(|m| {
            let provider = backend_for(m, config, |k| std::env::var(k).ok())?;
            Ok(Backend::new(m.clone(), provider))
        })
        .collect::<Result<Vec<_>, AnnotationError>>()?;
    run_batch_with_backends(tasks, backends, config).await
}

/// Batch runner over pre-built backends. At most `config.max_inflight`
/// requests are outstanding at once; models sharing a provider share its
/// rate limiter. The output is sorted, so it does not depend on the order
/// in which requests complete.
pub async fn run_batch_with_backends(
    tasks: &[TaskRecord],
    mut backends: Vec<Backend>,
    config: &AnnotationConfig,
) -> Result<AnnotationSet, BatchConfigError> {
    let models: Vec<ModelId> = backends.iter().map(|b| b.model.clone()).collect();
    validate(tasks, &models, config)?;

    let interval = Duration::from_millis(config.min_request_interval_ms);
    let mut limiters: HashMap<Provider, Arc<RateLimiter>> = HashMap::new();
    for b in &mut backends {
        b.limiter = limiters
            .entry(b.model.provider())
            .or_insert_with(|| Arc::new(RateLimiter::new(interval)))
            .clone();
    }

    let jobs = tasks
        .iter()
        .flat_map(|t| backends.iter().map(move |b| (t, b)));
    let outcomes: Vec<_> = stream::iter(jobs)
        .map(|(task, backend)| async move {
            let result = annotate_task(task, backend, config).await;
            (task, backend, result)
        })
        .buffer_unordered(config.max_inflight)
        .collect()
        .await;

    let mut annotations = Vec::new();
    let mut failures = Vec::new();
    let mut totals: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (task, backend, result) in outcomes {
        let entry = totals.entry(backend.model.key()).or_default();
        entry.1 += 1;
        match result {
            Ok(a) => {
                entry.0 += 1;
                annotations.push(a);
            }
            Err(e) => failures.push(AnnotationFailure {
                task_id: task.task_id.clone(),
                model: backend.model.clone(),
                reason: e.to_string(),
            }),
        }
    }
    annotations.sort_by(|a, b| {
        (a.task_id.as_str(), a.model.key()).cmp(&(b.task_id.as_str(), b.model.key()))
    });
    failures.sort_by(|a, b| {
        (a.task_id.as_str(), a.model.key()).cmp(&(b.task_id.as_str(), b.model.key()))
    });
    let success_rate = totals
        .into_iter()
        .map(|(k, (ok, all))| (k, ok as f64 / all as f64))
        .collect();
    Ok(AnnotationSet {
        annotations,
        failures,
        success_rate,
    })
}
