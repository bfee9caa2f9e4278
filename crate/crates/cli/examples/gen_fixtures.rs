//! Regenerates the committed test fixtures under `fixtures/`.
//!
//! ```text
//! cargo run -p exposure-cli --example gen_fixtures -- fixtures
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use exposure_core::aggregation::{write_index, OccupationIndex};
use exposure_core::ingest::{
    write_oews, write_prior_indices, write_task_statements, OnetCode, PriorIndexRecord, Soc6Code,
    TaskRecord, TaskType, WageRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

const E2E_OCCUPATIONS: [(&str, &str); 10] = [
    ("11-1011.00", "Chief Executives"),
    ("13-1199.06", "Online Merchants"),
    ("15-1252.00", "Software Developers"),
    ("25-2021.00", "Elementary School Teachers, Except Special Education"),
    ("29-1141.00", "Registered Nurses"),
    ("35-2014.00", "Cooks, Restaurant"),
    ("41-2031.00", "Retail Salespersons"),
    ("43-4051.00", "Customer Service Representatives"),
    ("47-2061.00", "Construction Laborers"),
    ("49-9096.00", "Riggers"),
];

const VERBS: [&str; 12] = [
    "Prepare", "Review", "Coordinate", "Inspect", "Maintain", "Record", "Explain", "Assemble",
    "Monitor", "Negotiate", "Schedule", "Analyze",
];

const OBJECTS: [&str; 12] = [
    "budget reports", "customer orders", "work schedules", "safety equipment", "inventory records",
    "project plans", "lesson materials", "patient charts", "sales displays", "rigging hardware",
    "software requirements", "supplier contracts",
];

const MAJOR_GROUPS: [u32; 22] = [
    11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 33, 35, 37, 39, 41, 43, 45, 47, 49, 51, 53,
];

fn task_text(rng: &mut ChaCha8Rng) -> String {
    let v = VERBS[rng.random_range(0..VERBS.len())];
    let o = OBJECTS[rng.random_range(0..OBJECTS.len())];
    format!("{v} {o}.")
}

fn write(path: PathBuf, bytes: Vec<u8>) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, bytes).unwrap();
    println!("wrote {}", path.display());
}

fn csv_bytes<E: std::fmt::Debug>(f: impl FnOnce(&mut Vec<u8>) -> Result<(), E>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).unwrap();
    buf
}

fn tasks_25(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let tasks: Vec<TaskRecord> = (0..23)
        .map(|i| {
            let (code, title) = E2E_OCCUPATIONS[i % 5];
            TaskRecord {
                task_id: format!("{}", 1001 + i),
                onet_soc: code.parse().unwrap(),
                occupation_title: title.to_string(),
                task_text: task_text(rng),
                task_type: if i % 3 == 0 { TaskType::Supplemental } else { TaskType::Core },
            }
        })
        .collect();
    let mut out = csv_bytes(|w| write_task_statements(w, &tasks[..11]));
    // two malformed rows in the middle: empty task text, then a bad code
    out.extend_from_slice(b"1100,15-1252.00,Software Developers,,Core\n");
    out.extend_from_slice(b"1101,15-125,Software Developers,Write code.,Core\n");
    let rest = csv_bytes(|w| write_task_statements(w, &tasks[11..]));
    let header_end = rest.iter().position(|b| *b == b'\n').unwrap() + 1;
    out.extend_from_slice(&rest[header_end..]);
    out
}

fn tasks_10(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let tasks: Vec<TaskRecord> = (0..10)
        .map(|i| {
            let (code, title) = E2E_OCCUPATIONS[i];
            TaskRecord {
                task_id: format!("{}", 2001 + i),
                onet_soc: code.parse().unwrap(),
                occupation_title: title.to_string(),
                task_text: task_text(rng),
                task_type: TaskType::Core,
            }
        })
        .collect();
    csv_bytes(|w| write_task_statements(w, &tasks))
}

fn oews_10(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let rows: Vec<WageRecord> = E2E_OCCUPATIONS
        .iter()
        .map(|(code, _)| WageRecord {
            soc6: code.parse::<OnetCode>().unwrap().soc6(),
            year: 2024,
            mean_annual_wage: Some(f64::from(rng.random_range(28_000u32..260_000))),
            employment: Some(rng.random_range(5_000u64..3_500_000)),
        })
        .collect();
    let text = String::from_utf8(csv_bytes(|w| write_oews(w, &rows))).unwrap();
    // suppress two wages with the markers OEWS uses
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    for (line, marker) in [(4, "*"), (8, "#")] {
        let mut cells: Vec<&str> = lines[line].split(',').collect();
        cells[1] = marker;
        lines[line] = cells.join(",");
    }
    (lines.join("\n") + "\n").into_bytes()
}

fn soc6_codes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Soc6Code> {
    let mut set = BTreeSet::new();
    while set.len() < n {
        let major = MAJOR_GROUPS[rng.random_range(0..MAJOR_GROUPS.len())];
        let minor = rng.random_range(1000u32..10000);
        set.insert(format!("{major}-{minor:04}"));
    }
    set.into_iter().map(|s| s.parse().unwrap()).collect()
}

fn prior_row(rng: &mut ChaCha8Rng, soc6: Soc6Code, latent: f64) -> PriorIndexRecord {
    let mut noise = |s: f64| s * (rng.random::<f64>() - 0.5);
    let pct = |v: f64| (v * 100.0).clamp(0.0, 100.0).round();
    PriorIndexRecord {
        soc6,
        webb_software: Some(pct(0.5 * latent + 0.25 + noise(0.5))),
        webb_robot: Some(pct(0.5 - 0.3 * latent + noise(0.6))),
        webb_ai: Some(pct(0.6 * latent + 0.2 + noise(0.4))),
        sml: Some(3.2 + 0.4 * latent + noise(0.3)),
        routine_cognitive: Some(1.5 * latent - 0.7 + noise(1.0)),
        routine_manual: Some(0.5 - latent + noise(1.0)),
        felten_ai: Some(2.0 * latent - 1.0 + noise(0.8)),
        frey_osborne: Some((0.3 + 0.5 * latent + noise(0.4)).clamp(0.0, 1.0)),
        eloundou_beta: Some((0.8 * latent + noise(0.3)).clamp(0.0, 1.0)),
    }
}

fn priors_681(rng: &mut ChaCha8Rng, codes: &[Soc6Code]) -> Vec<u8> {
    let rows: Vec<PriorIndexRecord> = codes
        .iter()
        .map(|c| {
            let latent = rng.random::<f64>();
            prior_row(rng, c.clone(), latent)
        })
        .collect();
    csv_bytes(|w| write_prior_indices(w, &rows))
}

/// 700 detailed occupations over the 681 codes: 19 codes get a second
/// detailed occupation.
fn index_700(rng: &mut ChaCha8Rng, codes: &[Soc6Code]) -> Vec<u8> {
    let doubled: BTreeSet<usize> = {
        let mut s = BTreeSet::new();
        while s.len() < 19 {
            s.insert(rng.random_range(0..codes.len()));
        }
        s
    };
    let mut rows = Vec::new();
    for (i, c) in codes.iter().enumerate() {
        let suffixes: &[u32] = if doubled.contains(&i) { &[0, 1] } else { &[0] };
        for s in suffixes {
            let f: Vec<f64> = (0..4).map(|_| (rng.random::<f64>() * 2.0 * 8.0).round() / 8.0).collect();
            rows.push(OccupationIndex {
                onet_soc: format!("{c}.{s:02}").parse().unwrap(),
                overall: 0.25 * (f[0] + f[1] + f[2] + f[3]),
                pv_index: f[0],
                da_index: f[1],
                tk_index: f[2],
                ag_index: f[3],
                n_tasks: rng.random_range(5..40),
                n_models: 3,
                per_model_overall: BTreeMap::new(),
            });
        }
    }
    csv_bytes(|w| write_index(w, &rows))
}

fn e2e(rng: &mut ChaCha8Rng, dir: &Path) {
    let mut tasks = Vec::new();
    for (o, (code, title)) in E2E_OCCUPATIONS.iter().enumerate() {
        for k in 0..8 {
            tasks.push(TaskRecord {
                task_id: format!("{}", 10_000 + o * 100 + k),
                onet_soc: code.parse().unwrap(),
                occupation_title: title.to_string(),
                task_text: task_text(rng),
                task_type: if k < 5 { TaskType::Core } else { TaskType::Supplemental },
            });
        }
    }
    write(dir.join("tasks.csv"), csv_bytes(|w| write_task_statements(w, &tasks)));

    let codes: Vec<Soc6Code> = E2E_OCCUPATIONS
        .iter()
        .map(|(c, _)| c.parse::<OnetCode>().unwrap().soc6())
        .collect();
    for (year, drift) in [(2021, 1.0), (2024, 1.14)] {
        let rows: Vec<WageRecord> = codes
            .iter()
            .map(|c| WageRecord {
                soc6: c.clone(),
                year,
                mean_annual_wage: Some((f64::from(rng.random_range(30_000u32..240_000)) * drift).round()),
                employment: Some(rng.random_range(20_000u64..3_000_000)),
            })
            .collect();
        write(dir.join(format!("oews_{year}.csv")), csv_bytes(|w| write_oews(w, &rows)));
    }
    let priors: Vec<PriorIndexRecord> = codes
        .iter()
        .map(|c| {
            let latent = rng.random::<f64>();
            prior_row(rng, c.clone(), latent)
        })
        .collect();
    write(dir.join("priors.csv"), csv_bytes(|w| write_prior_indices(w, &priors)));

    let mut cfg = String::new();
    let _ = writeln!(cfg, "seed = 42");
    let _ = writeln!(cfg, "models = [\"stub:3\"]");
    let _ = writeln!(cfg, "min_models = 2");
    let _ = writeln!(cfg, "n_bins = 5");
    let _ = writeln!(cfg, "top_n = 5");
    let _ = writeln!(cfg, "max_inflight = 4");
    let _ = writeln!(cfg, "\n[paths]");
    let _ = writeln!(cfg, "tasks = \"tasks.csv\"");
    let _ = writeln!(cfg, "priors = \"priors.csv\"");
    let _ = writeln!(cfg, "\n[paths.oews]");
    let _ = writeln!(cfg, "2021 = \"oews_2021.csv\"");
    let _ = writeln!(cfg, "2024 = \"oews_2024.csv\"");
    write(dir.join("run.toml"), cfg.into_bytes());
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    write(root.join("tasks_25.csv"), tasks_25(&mut rng));
    write(root.join("tasks_10.csv"), tasks_10(&mut rng));
    write(root.join("oews_10.csv"), oews_10(&mut rng));
    let codes = soc6_codes(&mut rng, 681);
    write(root.join("priors_681.csv"), priors_681(&mut rng, &codes));
    write(root.join("index_700.csv"), index_700(&mut rng, &codes));
    e2e(&mut rng, &root.join("e2e"));
}
