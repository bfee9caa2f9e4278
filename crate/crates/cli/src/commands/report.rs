use std::collections::BTreeMap;

use exposure_core::aggregation::{read_index, read_soc6_index};
use exposure_core::ingest::parse_prior_indices;
use exposure_core::report::{
    category_summary, extreme_occupations, join_analysis_table, write_category_means,
    write_extremes, write_joined, CategoryLookup, JoinedTable,
};

use super::{load_titles, load_wages, oews_years, ReportArgs};
use crate::output::{input_error, open, out_dir, required, Stage};
use crate::{CliError, Context};

pub fn run(ctx: Context, args: ReportArgs) -> Result<(), CliError> {
    let settings = ctx.settings;
    settings.check()?;
    if args.top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let index_path = required(args.index, &None, "index")?;
    let soc6_path = required(args.index_soc6, &None, "index-soc6")?;
    let years = oews_years(&args.oews, &ctx.paths.oews)?;

    let mut stage = Stage::new("report", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&index_path)?;
    let indices = read_index(open(&index_path)?).map_err(input_error(&index_path))?;
    stage.input(&soc6_path)?;
    let fused = read_soc6_index(open(&soc6_path)?).map_err(input_error(&soc6_path))?;
    let titles = match args.tasks.or(ctx.paths.tasks) {
        Some(p) => load_titles(&mut stage, &p)?,
        None => BTreeMap::new(),
    };
    let lookup = match args.categories.or(ctx.paths.categories) {
        Some(p) => {
            stage.input(&p)?;
            CategoryLookup::from_reader(open(&p)?).map_err(input_error(&p))?
        }
        None => CategoryLookup::builtin(),
    };
    let priors = match args.priors.or(ctx.paths.priors) {
        Some(p) => {
            stage.input(&p)?;
            let parsed = parse_prior_indices(&p).map_err(input_error(&p))?;
            stage.rejects(&p, &parsed.rejects)?;
            Some(parsed.records)
        }
        None => None,
    };

    let extremes = extreme_occupations(&indices, &titles, args.top_k);
    stage.write("summary_extremes.csv", |w| write_extremes(w, &extremes))?;

    let all = join_analysis_table(&fused, None, None, &lookup)
        .map_err(|e| CliError::Runtime(format!("category table: {e}")))?;
    let means = category_summary(&all.rows);
    stage.write("category_means.csv", |w| write_category_means(w, &means))?;

    let join_err = |what: String| move |e| CliError::Runtime(format!("joining {what}: {e}"));
    if years.is_empty() {
        let joined = join_analysis_table(&fused, None, priors.as_deref(), &lookup)
            .map_err(join_err("priors".into()))?;
        record_join(&mut stage, "", &joined);
        stage.write("joined_analysis.csv", |w| write_joined(w, &joined.rows))?;
    } else {
        for (year, path) in &years {
            let wages = load_wages(&mut stage, *year, path)?;
            let joined = join_analysis_table(&fused, Some(&wages), priors.as_deref(), &lookup)
                .map_err(join_err(format!("{year} wages")))?;
            record_join(&mut stage, &format!(" {year}"), &joined);
            stage.write(&format!("joined_analysis_{year}.csv"), |w| write_joined(w, &joined.rows))?;
        }
    }
    stage.finish()
}

fn record_join(stage: &mut Stage, suffix: &str, t: &JoinedTable) {
    stage.note(format!("joined_rows{suffix}"), t.rows.len());
    stage.note(format!("dropped_indices{suffix}"), t.drops.indices);
    if let Some(n) = t.drops.wages {
        stage.note(format!("dropped_wages{suffix}"), n);
    }
    if let Some(n) = t.drops.priors {
        stage.note(format!("dropped_priors{suffix}"), n);
    }
}
