#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn exposure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exposure"))
        .args(args)
        .env_remove("PROVIDER_A_KEY")
        .env_remove("PROVIDER_B_KEY")
        .env_remove("PROVIDER_C_KEY")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = exposure(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Number of data rows in a CSV file.
pub fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

/// Runs every stage on the end-to-end fixture into `out`.
pub fn run_pipeline(out: &Path, threads: usize) {
    let cfg = fixture("e2e/run.toml");
    let t = threads.to_string();
    let base = |cmd: &str| vec!["--config".to_string(), s(&cfg).to_string(), "--threads".into(), t.clone(), cmd.into()];
    let o = s(out);
    let stages: Vec<Vec<String>> = vec![
        [base("annotate"), strs(&["--out-dir", o])].concat(),
        [base("aggregate"), strs(&["--annotations", &format!("{o}/annotations.csv"), "--out-dir", o])].concat(),
        [
            base("validate"),
            strs(&[
                "--index-soc6", &format!("{o}/index_soc6.csv"),
                "--per-model", &format!("{o}/index_per_model.csv"),
                "--regressors", "webb_ai,felten_ai,eloundou_beta",
                "--out-dir", o,
            ]),
        ]
        .concat(),
        [base("binscatter"), strs(&["--index-soc6", &format!("{o}/index_soc6.csv"), "--svg", "--out-dir", o])].concat(),
        [
            base("disagree"),
            strs(&[
                "--per-model", &format!("{o}/index_per_model.csv"),
                "--annotations", &format!("{o}/annotations.csv"),
                "--out-dir", o,
            ]),
        ]
        .concat(),
        [
            base("report"),
            strs(&["--index", &format!("{o}/index.csv"), "--index-soc6", &format!("{o}/index_soc6.csv"), "--out-dir", o]),
        ]
        .concat(),
    ];
    for args in stages {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(&refs);
    }
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// File name to contents for every file in `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    out
}
