use std::collections::HashMap;
use std::path::Path;

use exposure_core::aggregation::{
    build_occupation_indices, fuse_to_soc6, write_exclusions, write_index, write_per_model,
    write_soc6_index, Soc6Weighting,
};
use exposure_core::annotation::read_annotations;
use exposure_core::ingest::{parse_task_statements, OnetCode};
use serde::Deserialize;

use super::AggregateArgs;
use crate::output::{input_error, open, out_dir, required, Stage};
use crate::{CliError, Context};

pub fn run(ctx: Context, args: AggregateArgs) -> Result<(), CliError> {
    let mut settings = ctx.settings;
    if let Some(n) = args.min_models {
        settings.min_models = n;
    }
    if let Some(w) = args.soc6_weighting {
        settings.soc6_weighting = w;
    }
    settings.check()?;
    let tasks_path = required(args.tasks, &ctx.paths.tasks, "tasks")?;
    let ann_path = required(args.annotations, &ctx.paths.annotations, "annotations")?;
    let employment_path = args.employment.or(ctx.paths.employment);
    if settings.soc6_weighting == Soc6Weighting::Employment && employment_path.is_none() {
        return Err(CliError::Usage("employment weighting needs --employment".into()));
    }

    let mut stage = Stage::new("aggregate", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&tasks_path)?;
    let tasks = parse_task_statements(&tasks_path).map_err(input_error(&tasks_path))?;
    stage.rejects(&tasks_path, &tasks.rejects)?;
    stage.input(&ann_path)?;
    let annotations = read_annotations(open(&ann_path)?).map_err(input_error(&ann_path))?;

    let employment = match (&employment_path, settings.soc6_weighting) {
        (Some(p), Soc6Weighting::Employment) => {
            stage.input(p)?;
            Some(read_employment(p)?)
        }
        _ => None,
    };

    let agg = build_occupation_indices(&tasks.records, &annotations, settings.min_models)
        .map_err(|e| CliError::Runtime(format!("aggregation: {e}")))?;
    let fused = fuse_to_soc6(&agg.indices, settings.soc6_weighting, employment.as_ref())
        .map_err(|e| CliError::Runtime(format!("SOC-6 fusion: {e}")))?;
    log::info!(
        "{} occupations indexed, {} excluded, {} SOC-6 codes",
        agg.indices.len(),
        agg.exclusions.len(),
        fused.len()
    );

    stage.write("index.csv", |w| write_index(w, &agg.indices))?;
    stage.write("index_per_model.csv", |w| write_per_model(w, &agg.per_model))?;
    stage.write("index_soc6.csv", |w| write_soc6_index(w, &fused))?;
    stage.write("exclusions.csv", |w| write_exclusions(w, &agg.exclusions))?;
    stage.note("occupations", agg.indices.len());
    stage.note("excluded", agg.exclusions.len());
    stage.note("soc6_codes", fused.len());
    stage.finish()
}

fn read_employment(path: &Path) -> Result<HashMap<OnetCode, f64>, CliError> {
    #[derive(Deserialize)]
    struct Row {
        onet_soc: OnetCode,
        employment: f64,
    }
    let mut out = HashMap::new();
    for row in csv::Reader::from_reader(open(path)?).deserialize() {
        let Row { onet_soc, employment } = row.map_err(input_error(path))?;
        if !(employment.is_finite() && employment >= 0.0) {
            return Err(CliError::Input(format!("{}: bad employment for {onet_soc}", path.display())));
        }
        if out.insert(onet_soc.clone(), employment).is_some() {
            return Err(CliError::Input(format!("{}: {onet_soc} listed twice", path.display())));
        }
    }
    Ok(out)
}
