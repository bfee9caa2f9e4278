use std::path::PathBuf;

use exposure_core::aggregation::{fuse_to_soc6, read_index, Soc6Weighting};
use exposure_core::ingest::{parse_oews, parse_prior_indices, parse_task_statements};
use exposure_core::report::{join_analysis_table, CategoryLookup};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn task_fixture_has_two_malformed_rows() {
    let out = parse_task_statements(&fixture("tasks_25.csv")).unwrap();
    assert_eq!(out.total_rows(), 25);
    assert_eq!(out.records.len(), 23);
    let lines: Vec<u64> = out.rejects.iter().map(|r| r.line_number).collect();
    assert_eq!(lines, [13, 14]);
    // input order survives the skipped rows
    let ids: Vec<&str> = out.records.iter().map(|r| r.task_id.as_str()).collect();
    assert_eq!(ids[10..13], ["1011", "1012", "1013"]);
}

#[test]
fn wage_fixture_has_two_suppressed_wages() {
    let out = parse_oews(&fixture("oews_10.csv"), 2024).unwrap();
    assert!(out.rejects.is_empty());
    assert_eq!(out.records.len(), 10);
    let missing: Vec<&str> = out
        .records
        .iter()
        .filter(|r| r.mean_annual_wage.is_none())
        .map(|r| r.soc6.as_str())
        .collect();
    assert_eq!(missing, ["25-2021", "43-4051"]);
    assert!(out.records.iter().all(|r| r.year == 2024 && r.employment.is_some()));
}

#[test]
fn prior_fixture_has_681_rows() {
    let out = parse_prior_indices(&fixture("priors_681.csv")).unwrap();
    assert!(out.rejects.is_empty());
    assert_eq!(out.records.len(), 681);
}

#[test]
fn seven_hundred_occupations_fuse_to_681_and_join_fully() {
    let file = std::fs::File::open(fixture("index_700.csv")).unwrap();
    let indices = read_index(file).unwrap();
    assert_eq!(indices.len(), 700);
    let fused = fuse_to_soc6(&indices, Soc6Weighting::Uniform, None).unwrap();
    assert_eq!(fused.len(), 681);
    assert_eq!(fused.values().map(|f| f.n_occupations).sum::<usize>(), 700);
    assert!(fused.values().all(|f| (0.0..=2.0).contains(&f.overall)));

    let priors = parse_prior_indices(&fixture("priors_681.csv")).unwrap().records;
    let joined = join_analysis_table(&fused, None, Some(&priors), &CategoryLookup::builtin()).unwrap();
    assert_eq!(joined.rows.len(), 681);
    assert_eq!(joined.drops.indices, 0);
    assert_eq!(joined.drops.priors, Some(0));
}

#[test]
fn end_to_end_fixture_shape() {
    let tasks = parse_task_statements(&fixture("e2e/tasks.csv")).unwrap();
    assert!(tasks.rejects.is_empty());
    assert_eq!(tasks.records.len(), 80);
    let occupations: std::collections::BTreeSet<_> = tasks.records.iter().map(|t| &t.onet_soc).collect();
    assert_eq!(occupations.len(), 10);
    for year in [2021, 2024] {
        let w = parse_oews(&fixture(&format!("e2e/oews_{year}.csv")), year).unwrap();
        assert_eq!(w.records.len(), 10);
    }
}
