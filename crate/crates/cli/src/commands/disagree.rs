use std::collections::BTreeMap;

use exposure_core::aggregation::read_per_model;
use exposure_core::annotation::{read_annotations, SubScores};
use exposure_core::ingest::OnetCode;
use exposure_core::report::{write_disagreement, write_factor_disagreement};
use exposure_core::stats::{disagreement_ranking, factor_disagreement};

use super::{load_titles, DisagreeArgs};
use crate::output::{input_error, open, out_dir, required, Stage};
use crate::{CliError, Context};

pub fn run(ctx: Context, args: DisagreeArgs) -> Result<(), CliError> {
    let mut settings = ctx.settings;
    if let Some(n) = args.top {
        settings.top_n = n;
    }
    settings.check()?;
    let per_model_path = required(args.per_model, &None, "per-model")?;

    let mut stage = Stage::new("disagree", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&per_model_path)?;
    let rows = read_per_model(open(&per_model_path)?).map_err(input_error(&per_model_path))?;
    let titles = match args.tasks.or(ctx.paths.tasks) {
        Some(p) => load_titles(&mut stage, &p)?,
        None => BTreeMap::new(),
    };

    let mut per_model: BTreeMap<OnetCode, BTreeMap<String, f64>> = BTreeMap::new();
    for r in rows {
        per_model.entry(r.onet_soc).or_default().insert(r.model, r.overall);
    }
    let ranking = disagreement_ranking(&per_model, &titles, settings.top_n);
    stage.write("disagreement_top.csv", |w| write_disagreement(w, &ranking))?;

    if let Some(path) = args.annotations.or(ctx.paths.annotations) {
        stage.input(&path)?;
        let annotations = read_annotations(open(&path)?).map_err(input_error(&path))?;
        let mut by_model: BTreeMap<String, BTreeMap<String, SubScores>> = BTreeMap::new();
        for a in annotations {
            by_model.entry(a.model_key()).or_default().insert(a.task_id, a.scores);
        }
        let by_factor = factor_disagreement(&by_model)
            .map_err(|e| CliError::Runtime(format!("factor disagreement: {e}")))?;
        stage.write("factor_disagreement.csv", |w| write_factor_disagreement(w, &by_factor))?;
    }
    stage.finish()
}
