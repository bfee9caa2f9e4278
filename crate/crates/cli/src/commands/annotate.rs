use exposure_core::annotation::{run_annotation_batch, write_annotations, write_failures, BatchConfigError};
use exposure_core::ingest::parse_task_statements;

use super::AnnotateArgs;
use crate::output::{input_error, out_dir, required, Stage};
use crate::{CliError, Context};

pub fn run(ctx: Context, args: AnnotateArgs) -> Result<(), CliError> {
    let mut settings = ctx.settings;
    if !args.models.is_empty() {
        settings.models = args.models;
    }
    if let Some(t) = args.temperature {
        settings.temperature = t;
    }
    if let Some(n) = args.max_inflight {
        settings.max_inflight = n;
    }
    if let Some(n) = args.max_retries {
        settings.max_retries = n;
    }
    if let Some(ms) = args.backoff_base_ms {
        settings.backoff_base_ms = ms;
    }
    if let Some(ms) = args.min_request_interval_ms {
        settings.min_request_interval_ms = ms;
    }
    settings.check()?;
    let models = settings.model_ids()?;
    let config = settings.annotation_config();
    let tasks_path = required(args.tasks, &ctx.paths.tasks, "tasks")?;

    let mut stage = Stage::new("annotate", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&tasks_path)?;
    let parsed = parse_task_statements(&tasks_path).map_err(input_error(&tasks_path))?;
    stage.rejects(&tasks_path, &parsed.rejects)?;

    let mut runtime = tokio::runtime::Builder::new_multi_thread();
    runtime.enable_all();
    if let Some(n) = ctx.threads {
        runtime.worker_threads(n);
    }
    let runtime = runtime.build()?;
    log::info!("annotating {} tasks with {} models", parsed.records.len(), models.len());
    let set = runtime
        .block_on(run_annotation_batch(&parsed.records, &models, &config))
        .map_err(|e| match e {
            BatchConfigError::Credentials(inner) => CliError::Config(inner.to_string()),
            other => CliError::Usage(other.to_string()),
        })?;

    stage.write("annotations.csv", |w| write_annotations(w, &set))?;
    stage.write("annotation_failures.csv", |w| write_failures(w, &set))?;
    stage.note("tasks", parsed.records.len());
    stage.note("annotations", set.annotations.len());
    stage.note("failures", set.failures.len());
    for (model, rate) in &set.success_rate {
        stage.note(format!("success_rate {model}"), rate);
    }
    stage.finish()
}
