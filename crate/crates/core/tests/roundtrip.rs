use std::collections::BTreeMap;

use exposure_core::aggregation::Soc6Index;
use exposure_core::ingest::{
    read_oews, read_prior_indices, read_task_statements, write_oews, write_prior_indices,
    write_task_statements, OnetCode, PriorIndexRecord, Soc6Code, TaskRecord, TaskType, WageRecord,
};
use exposure_core::report::{
    category_summary, extreme_occupations, join_analysis_table, read_binscatter,
    read_category_means, read_correlation_triangle, read_disagreement, read_extremes, read_joined,
    write_binscatter, write_category_means, write_correlation_triangle, write_disagreement,
    write_extremes, write_joined, CategoryLookup,
};
use exposure_core::aggregation::OccupationIndex;
use exposure_core::stats::{binscatter, correlation_triangle, disagreement_ranking};
use proptest::prelude::*;

fn onet() -> impl Strategy<Value = OnetCode> {
    (11u32..54, 0u32..10000, 0u32..100).prop_map(|(a, b, c)| format!("{a:02}-{b:04}.{c:02}").parse().unwrap())
}

fn soc6() -> impl Strategy<Value = Soc6Code> {
    (11u32..56, 0u32..10000).prop_map(|(a, b)| format!("{a:02}-{b:04}").parse().unwrap())
}

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9][A-Za-z0-9 ,\"'.;()/-]{0,60}[A-Za-z0-9.]".prop_map(|s| s.trim().to_string())
}

fn task_rows() -> impl Strategy<Value = Vec<TaskRecord>> {
    prop::collection::vec((onet(), text(), text(), any::<bool>()), 0..40).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (onet_soc, title, task_text, core))| TaskRecord {
                task_id: format!("{}", 1000 + i),
                onet_soc,
                occupation_title: title,
                task_text,
                task_type: if core { TaskType::Core } else { TaskType::Supplemental },
            })
            .collect()
    })
}

fn opt_num(lo: f64, hi: f64) -> impl Strategy<Value = Option<f64>> {
    prop::option::of(lo..hi)
}

proptest! {
    #[test]
    fn task_file_round_trip(tasks in task_rows()) {
        let mut buf = Vec::new();
        write_task_statements(&mut buf, &tasks).unwrap();
        let back = read_task_statements(buf.as_slice()).unwrap();
        prop_assert!(back.rejects.is_empty());
        prop_assert_eq!(back.records, tasks);
    }

    #[test]
    fn wage_file_round_trip(rows in prop::collection::btree_map(soc6(), (opt_num(1.0, 500000.0), prop::option::of(0u64..10_000_000)), 0..40)) {
        let wages: Vec<WageRecord> = rows
            .into_iter()
            .map(|(soc6, (w, e))| WageRecord { soc6, year: 2024, mean_annual_wage: w, employment: e })
            .collect();
        let mut buf = Vec::new();
        write_oews(&mut buf, &wages).unwrap();
        let back = read_oews(buf.as_slice(), 2024).unwrap();
        prop_assert!(back.rejects.is_empty());
        prop_assert_eq!(back.records, wages);
    }

    #[test]
    fn prior_file_round_trip(rows in prop::collection::btree_map(soc6(), prop::collection::vec(opt_num(0.0, 100.0), 9), 0..30)) {
        let priors: Vec<PriorIndexRecord> = rows
            .into_iter()
            .map(|(soc6, v)| PriorIndexRecord {
                soc6,
                webb_software: v[0],
                webb_robot: v[1],
                webb_ai: v[2],
                sml: v[3],
                routine_cognitive: v[4],
                routine_manual: v[5],
                felten_ai: v[6],
                frey_osborne: v[7],
                eloundou_beta: v[8],
            })
            .collect();
        let mut buf = Vec::new();
        write_prior_indices(&mut buf, &priors).unwrap();
        let back = read_prior_indices(buf.as_slice()).unwrap();
        prop_assert!(back.rejects.is_empty());
        prop_assert_eq!(back.records, priors);
    }

    #[test]
    fn joined_table_round_trip_and_drop_accounting(
        idx in prop::collection::btree_map(soc6(), 0.0f64..=2.0, 1..50),
        wages in prop::collection::btree_map(soc6(), (opt_num(1.0, 300000.0), prop::option::of(0u64..100000)), 0..50),
        extra in prop::collection::vec(any::<prop::sample::Index>(), 0..20),
    ) {
        let keys: Vec<&Soc6Code> = idx.keys().collect();
        let mut wages = wages;
        for pick in extra {
            wages.entry(keys[pick.index(keys.len())].clone()).or_insert((Some(50000.0), Some(10)));
        }
        let fused: BTreeMap<Soc6Code, Soc6Index> = idx
            .iter()
            .map(|(k, v)| (k.clone(), Soc6Index {
                soc6: k.clone(), overall: *v, pv_index: *v, da_index: 2.0 - v, tk_index: *v, ag_index: 0.0,
                n_tasks: 1, n_models: 2, n_occupations: 1, per_model_overall: BTreeMap::new(),
            }))
            .collect();
        let wage_rows: Vec<WageRecord> = wages
            .into_iter()
            .map(|(soc6, (w, e))| WageRecord { soc6, year: 2021, mean_annual_wage: w, employment: e })
            .collect();
        match join_analysis_table(&fused, Some(&wage_rows), None, &CategoryLookup::builtin()) {
            Ok(t) => {
                prop_assert_eq!(t.rows.len() + t.drops.indices, fused.len());
                prop_assert_eq!(t.rows.len() + t.drops.wages.unwrap(), wage_rows.len());
                prop_assert!(t.rows.windows(2).all(|w| w[0].soc6 < w[1].soc6));
                let mut buf = Vec::new();
                write_joined(&mut buf, &t.rows).unwrap();
                prop_assert_eq!(read_joined(buf.as_slice()).unwrap(), t.rows.clone());

                let means = category_summary(&t.rows);
                prop_assert_eq!(means.iter().map(|m| m.n).sum::<usize>(), t.rows.len());
                let mut buf = Vec::new();
                write_category_means(&mut buf, &means).unwrap();
                prop_assert_eq!(read_category_means(buf.as_slice()).unwrap(), means);
            }
            Err(_) => prop_assert!(wage_rows.iter().all(|w| !fused.contains_key(&w.soc6))),
        }
    }

    #[test]
    fn analysis_tables_round_trip(values in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0), 5..80)) {
        let mut per_model = BTreeMap::new();
        let mut indices = Vec::new();
        for (i, (a, b, c)) in values.iter().enumerate() {
            let code: OnetCode = format!("13-{:04}.00", 1000 + i).parse().unwrap();
            per_model.insert(code.clone(), BTreeMap::from([
                ("stub:stub-0".to_string(), *a),
                ("stub:stub-1".to_string(), *b),
                ("stub:stub-2".to_string(), *c),
            ]));
            indices.push(OccupationIndex {
                onet_soc: code, overall: (a + b + c) / 3.0, pv_index: *a, da_index: *b, tk_index: *c, ag_index: 0.0,
                n_tasks: 2, n_models: 3, per_model_overall: BTreeMap::new(),
            });
        }
        let titles: BTreeMap<OnetCode, String> = indices.iter().map(|i| (i.onet_soc.clone(), format!("Title, \"{}\"", i.onet_soc))).collect();

        let ranking = disagreement_ranking(&per_model, &titles, 15);
        let mut buf = Vec::new();
        write_disagreement(&mut buf, &ranking).unwrap();
        prop_assert_eq!(read_disagreement(buf.as_slice()).unwrap(), ranking);

        let ext = extreme_occupations(&indices, &titles, 5);
        let mut buf = Vec::new();
        write_extremes(&mut buf, &ext).unwrap();
        prop_assert_eq!(read_extremes(buf.as_slice()).unwrap(), ext);

        let cols = |f: fn(&(f64, f64, f64)) -> f64| values.iter().map(|v| Some(f(v))).collect::<Vec<_>>();
        let tri = correlation_triangle(&[
            ("a".to_string(), cols(|v| v.0)),
            ("b".to_string(), cols(|v| v.1)),
            ("c".to_string(), cols(|v| v.2)),
        ]).unwrap();
        let mut buf = Vec::new();
        write_correlation_triangle(&mut buf, &tri).unwrap();
        let cells = read_correlation_triangle(buf.as_slice()).unwrap();
        prop_assert_eq!(cells.len(), 6);
        for (cell, (row, col, r)) in cells.iter().zip(tri.cells()) {
            prop_assert_eq!((cell.row.as_str(), cell.column.as_str(), cell.r), (row, col, r));
        }

        let x: Vec<f64> = values.iter().map(|v| v.0).collect();
        let y: Vec<f64> = values.iter().map(|v| v.1).collect();
        let bins = binscatter(&x, &y, 5).unwrap();
        let mut buf = Vec::new();
        write_binscatter(&mut buf, &bins).unwrap();
        prop_assert_eq!(read_binscatter(buf.as_slice()).unwrap(), bins);
    }
}

#[test]
fn reversed_scores_swap_extremes() {
    let make = |sign: f64| -> Vec<OccupationIndex> {
        (0..10)
            .map(|i| {
                let v = 1.0 + sign * (f64::from(i) / 10.0 - 0.45);
                OccupationIndex {
                    onet_soc: format!("41-{:04}.00", 2000 + i).parse().unwrap(),
                    overall: v,
                    pv_index: v,
                    da_index: v,
                    tk_index: v,
                    ag_index: v,
                    n_tasks: 1,
                    n_models: 2,
                    per_model_overall: BTreeMap::new(),
                }
            })
            .collect()
    };
    let titles = BTreeMap::new();
    let a = extreme_occupations(&make(1.0), &titles, 3);
    let b = extreme_occupations(&make(-1.0), &titles, 3);
    let codes = |v: &[exposure_core::report::ExtremeRow]| v.iter().map(|r| r.onet_soc.clone()).collect::<Vec<_>>();
    assert_eq!(codes(&a.top), codes(&b.bottom));
    assert_eq!(codes(&a.bottom), codes(&b.top));
}
