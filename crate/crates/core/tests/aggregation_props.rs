use std::collections::{BTreeMap, BTreeSet, HashMap};

use exposure_core::aggregation::{
    build_occupation_indices, consensus_index, factor_index_per_model, fuse_to_soc6,
    occupation_index_per_model, read_exclusions, read_index, write_exclusions, write_index,
    Soc6Weighting, TaskScore, TaskWeight,
};
use exposure_core::annotation::{AnnotationRow, Factor, Provider, SubScores};
use exposure_core::ingest::{OnetCode, TaskRecord, TaskType};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scores(v: [u8; 4]) -> SubScores {
    SubScores::new(v[0].into(), v[1].into(), v[2].into(), v[3].into()).unwrap()
}

/// Brute-force definition: sum of w * (PV+DA+TK+AG)/4 over sum of w.
fn oracle(tasks: &[([u8; 4], bool)]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (s, core) in tasks {
        let w = if *core { 2.0 } else { 1.0 };
        num += w * s.iter().map(|x| f64::from(*x)).sum::<f64>() / 4.0;
        den += w;
    }
    num / den
}

fn as_inputs(tasks: &[([u8; 4], bool)]) -> (Vec<TaskScore>, Vec<TaskWeight>) {
    let scored = tasks
        .iter()
        .enumerate()
        .map(|(i, (s, _))| TaskScore {
            task_id: format!("t{i:03}"),
            scores: scores(*s),
        })
        .collect();
    let weights = tasks
        .iter()
        .enumerate()
        .map(|(i, (_, core))| TaskWeight {
            task_id: format!("t{i:03}"),
            w: TaskWeight::of_type(if *core { TaskType::Core } else { TaskType::Supplemental }),
        })
        .collect();
    (scored, weights)
}

#[test]
fn thousand_random_occupations_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.random_range(1..=40);
        let tasks: Vec<([u8; 4], bool)> = (0..n)
            .map(|_| {
                (
                    [0; 4].map(|_| rng.random_range(0..=2u8)),
                    rng.random_bool(0.7),
                )
            })
            .collect();
        let (s, w) = as_inputs(&tasks);
        let got = occupation_index_per_model(&s, &w).unwrap();
        assert!((got - oracle(&tasks)).abs() < 1e-12);
        assert!((0.0..=2.0).contains(&got));
    }
}

#[test]
fn core_twos_and_supplemental_zeros() {
    let (s, w) = as_inputs(&[([2; 4], true), ([0; 4], false)]);
    assert_eq!(occupation_index_per_model(&s, &w).unwrap(), 4.0 / 3.0);
}

fn task_strategy() -> impl Strategy<Value = Vec<([u8; 4], bool)>> {
    prop::collection::vec((prop::array::uniform4(0u8..=2), any::<bool>()), 1..30)
}

proptest! {
    #[test]
    fn bounded_and_between_task_extremes(tasks in task_strategy()) {
        let (s, w) = as_inputs(&tasks);
        let e = occupation_index_per_model(&s, &w).unwrap();
        let per_task: Vec<f64> = tasks.iter().map(|(t, _)| t.iter().map(|x| f64::from(*x)).sum::<f64>() / 4.0).collect();
        let lo = per_task.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = per_task.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((0.0..=2.0).contains(&e));
        prop_assert!(e >= lo - 1e-12 && e <= hi + 1e-12);
    }

    #[test]
    fn raising_one_score_never_lowers_the_index(tasks in task_strategy(), pick in any::<prop::sample::Index>(), f in 0usize..4) {
        let i = pick.index(tasks.len());
        prop_assume!(tasks[i].0[f] < 2);
        let (s, w) = as_inputs(&tasks);
        let before = occupation_index_per_model(&s, &w).unwrap();
        let mut raised = tasks.clone();
        raised[i].0[f] += 1;
        let (s2, w2) = as_inputs(&raised);
        prop_assert!(occupation_index_per_model(&s2, &w2).unwrap() > before);
    }

    #[test]
    fn overall_is_mean_of_factor_indices(tasks in task_strategy()) {
        let (s, w) = as_inputs(&tasks);
        let overall = occupation_index_per_model(&s, &w).unwrap();
        let factors: f64 = Factor::ALL.iter().map(|f| factor_index_per_model(&s, &w, *f).unwrap()).sum();
        prop_assert!((overall - factors / 4.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_every_weight_changes_nothing(tasks in task_strategy()) {
        let (s, w) = as_inputs(&tasks);
        let doubled: Vec<TaskWeight> = w.iter().map(|x| TaskWeight { task_id: x.task_id.clone(), w: 2.0 * x.w }).collect();
        let a = occupation_index_per_model(&s, &w).unwrap();
        let b = occupation_index_per_model(&s, &doubled).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn task_order_is_irrelevant(tasks in task_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let (s, w) = as_inputs(&tasks);
        let mut s2 = s.clone();
        s2.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(occupation_index_per_model(&s, &w).unwrap(), occupation_index_per_model(&s2, &w).unwrap());
    }

    #[test]
    fn consensus_is_model_order_free_and_bounded(values in prop::collection::vec(0.0f64..=2.0, 1..6)) {
        let m: BTreeMap<String, f64> = values.iter().enumerate().map(|(i, v)| (format!("m{i}"), *v)).collect();
        match consensus_index(&m, 2) {
            None => prop_assert!(values.len() < 2),
            Some(c) => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(c >= lo - 1e-12 && c <= hi + 1e-12);
            }
        }
    }
}

struct Fixture {
    tasks: Vec<TaskRecord>,
    annotations: Vec<AnnotationRow>,
    /// Number of distinct models per occupation.
    coverage: BTreeMap<OnetCode, usize>,
}

/// Occupations whose tasks are annotated by a random subset of three models.
fn fixture(seed: u64, n_occ: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tasks = Vec::new();
    let mut annotations = Vec::new();
    let mut coverage = BTreeMap::new();
    for o in 0..n_occ {
        let code: OnetCode = format!("{:02}-{:04}.{:02}", 11 + 2 * (o % 20), o / 3, o % 3).parse().unwrap();
        let models: Vec<usize> = (0..3).filter(|_| rng.random_bool(0.6)).collect();
        coverage.insert(code.clone(), models.len());
        for t in 0..rng.random_range(1..6) {
            let task_id = format!("{o:03}-{t}");
            tasks.push(TaskRecord {
                task_id: task_id.clone(),
                onet_soc: code.clone(),
                occupation_title: format!("occ {o}"),
                task_text: "x".into(),
                task_type: if t == 0 { TaskType::Supplemental } else { TaskType::Core },
            });
            for m in &models {
                annotations.push(AnnotationRow {
                    task_id: task_id.clone(),
                    provider: Provider::Stub,
                    model_name: format!("stub-{m}"),
                    scores: scores([0; 4].map(|_| rng.random_range(0..=2u8))),
                    attempt_count: 1,
                });
            }
        }
    }
    Fixture {
        tasks,
        annotations,
        coverage,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn under_covered_occupations_are_excluded_not_indexed(seed in any::<u64>(), min_models in 1usize..=3) {
        let f = fixture(seed, 25);
        let agg = build_occupation_indices(&f.tasks, &f.annotations, min_models).unwrap();
        let indexed: BTreeSet<&OnetCode> = agg.indices.iter().map(|i| &i.onet_soc).collect();
        let excluded: BTreeSet<&OnetCode> = agg.exclusions.iter().map(|e| &e.onet_soc).collect();
        prop_assert!(indexed.is_disjoint(&excluded));
        for (code, n) in &f.coverage {
            if *n < min_models {
                prop_assert!(excluded.contains(code));
            } else {
                prop_assert!(indexed.contains(code));
            }
        }
        for i in &agg.indices {
            prop_assert!((0.0..=2.0).contains(&i.overall));
            prop_assert_eq!(i.n_models, i.per_model_overall.len());
        }

        // The files carry the same split.
        let mut idx_csv = Vec::new();
        write_index(&mut idx_csv, &agg.indices).unwrap();
        let mut exc_csv = Vec::new();
        write_exclusions(&mut exc_csv, &agg.exclusions).unwrap();
        let back_idx = read_index(idx_csv.as_slice()).unwrap();
        let back_exc = read_exclusions(exc_csv.as_slice()).unwrap();
        prop_assert!(back_idx.iter().all(|i| f.coverage[&i.onet_soc] >= min_models));
        prop_assert_eq!(back_exc, agg.exclusions.clone());
    }

    #[test]
    fn annotation_order_is_irrelevant(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let f = fixture(seed, 12);
        let a = build_occupation_indices(&f.tasks, &f.annotations, 2).unwrap();
        let mut shuffled = f.annotations.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let b = build_occupation_indices(&f.tasks, &shuffled, 2).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn consensus_equals_mean_of_per_model_indices() {
    let f = fixture(9, 40);
    let agg = build_occupation_indices(&f.tasks, &f.annotations, 2).unwrap();
    for idx in &agg.indices {
        let per: Vec<f64> = agg
            .per_model
            .iter()
            .filter(|p| p.onet_soc == idx.onet_soc)
            .map(|p| p.overall)
            .collect();
        let mean = per.iter().sum::<f64>() / per.len() as f64;
        assert!((idx.overall - mean).abs() < 1e-12);
    }
}

#[test]
fn employment_weighted_fusion() {
    let f = fixture(5, 60);
    let agg = build_occupation_indices(&f.tasks, &f.annotations, 1).unwrap();
    let uniform = fuse_to_soc6(&agg.indices, Soc6Weighting::Uniform, None).unwrap();
    let emp: HashMap<OnetCode, f64> = agg.indices.iter().map(|i| (i.onet_soc.clone(), 100.0)).collect();
    let weighted = fuse_to_soc6(&agg.indices, Soc6Weighting::Employment, Some(&emp)).unwrap();
    // Equal employment reproduces the unweighted mean.
    for (k, u) in &uniform {
        assert!((u.overall - weighted[k].overall).abs() < 1e-12);
        assert!(u.n_occupations >= 1);
    }
    let total: usize = uniform.values().map(|u| u.n_occupations).sum();
    assert_eq!(total, agg.indices.len());
}
