use exposure_core::aggregation::read_soc6_index;
use exposure_core::report::{join_analysis_table, render_binscatter_svg, write_binscatter, CategoryLookup};
use exposure_core::stats::binscatter_pairwise;

use super::{load_wages, oews_years, BinscatterArgs};
use crate::output::{input_error, open, out_dir, required, Stage};
use crate::{CliError, Context};

pub fn run(ctx: Context, args: BinscatterArgs) -> Result<(), CliError> {
    let mut settings = ctx.settings;
    if let Some(n) = args.n_bins {
        settings.n_bins = n;
    }
    settings.check()?;
    let index_path = required(args.index_soc6, &None, "index-soc6")?;
    let years = oews_years(&args.oews, &ctx.paths.oews)?;
    if years.is_empty() {
        return Err(CliError::Usage("binscatter needs at least one --oews YEAR=PATH".into()));
    }

    let mut stage = Stage::new("binscatter", out_dir(args.out_dir, &ctx.paths.out_dir), &settings)?;
    stage.input(&index_path)?;
    let fused = read_soc6_index(open(&index_path)?).map_err(input_error(&index_path))?;
    let lookup = CategoryLookup::builtin();
    let x_col = args.x.column();

    for (year, path) in &years {
        let wages = load_wages(&mut stage, *year, path)?;
        let joined = join_analysis_table(&fused, Some(&wages), None, &lookup)
            .map_err(|e| CliError::Runtime(format!("joining {year} wages: {e}")))?;
        stage.note(format!("joined_rows {year}"), joined.rows.len());
        stage.note(format!("dropped_indices {year}"), joined.drops.indices);
        stage.note(format!("dropped_wages {year}"), joined.drops.wages.unwrap_or(0));
        let x: Vec<Option<f64>> = joined.rows.iter().map(|r| r.value(x_col)).collect();
        let y: Vec<Option<f64>> = joined.rows.iter().map(|r| Some(r.overall)).collect();
        let bins = binscatter_pairwise(&x, &y, settings.n_bins)
            .map_err(|e| CliError::Runtime(format!("binscatter for {year}: {e}")))?;
        let stem = format!("binscatter_{}_{year}", args.x.label());
        stage.write(&format!("{stem}.csv"), |w| write_binscatter(w, &bins))?;
        if args.svg {
            let svg = render_binscatter_svg(&bins, args.x.label(), "overall");
            stage.write(&format!("{stem}.svg"), |w| {
                w.extend_from_slice(svg.as_bytes());
                Ok::<_, CliError>(())
            })?;
        }
    }
    stage.finish()
}
