use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::annotation::{Factor, SubScores};
use crate::ingest::OnetCode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementRecord {
    pub onet_soc: OnetCode,
    pub occupation_title: String,
    pub per_model_overall: BTreeMap<String, f64>,
    /// Largest pairwise absolute difference, i.e. `max - min`.
    pub spread: f64,
    /// Population standard deviation of the model values.
    pub std_across_models: f64,
}

/// Occupations ordered by how far apart the models' overall indices are,
/// largest spread first with ties broken by code. Occupations scored by
/// fewer than two models are skipped.
pub fn disagreement_ranking(
    per_model: &BTreeMap<OnetCode, BTreeMap<String, f64>>,
    titles: &BTreeMap<OnetCode, String>,
    top_n: usize,
) -> Vec<DisagreementRecord> {
    let mut records: Vec<DisagreementRecord> = per_model
        .iter()
        .filter(|(_, m)| m.len() >= 2)
        .map(|(code, m)| {
            let values: Vec<f64> = m.values().copied().collect();
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let mean = super::mean(&values);
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
            DisagreementRecord {
                onet_soc: code.clone(),
                occupation_title: titles.get(code).cloned().unwrap_or_default(),
                per_model_overall: m.clone(),
                spread: max - min,
                std_across_models: var.sqrt(),
            }
        })
        .collect();
    records.sort_by(|a, b| b.spread.total_cmp(&a.spread).then_with(|| a.onet_soc.cmp(&b.onet_soc)));
    records.truncate(top_n);
    records
}

/// Mean absolute inter-model difference per factor.
///
/// For each task scored by at least two models, the absolute differences of
/// every model pair are averaged; those task values are then averaged.
pub fn factor_disagreement(
    by_model: &BTreeMap<String, BTreeMap<String, SubScores>>,
) -> Result<BTreeMap<Factor, f64>, StatsError> {
    let tasks: BTreeSet<&String> = by_model.values().flat_map(|m| m.keys()).collect();
    let mut totals: BTreeMap<Factor, f64> = Factor::ALL.iter().map(|f| (*f, 0.0)).collect();
    let mut shared = 0usize;
    for task in tasks {
        let scores: Vec<&SubScores> = by_model.values().filter_map(|m| m.get(task)).collect();
        if scores.len() < 2 {
            continue;
        }
        shared += 1;
        let pairs = (scores.len() * (scores.len() - 1) / 2) as f64;
        for f in Factor::ALL {
            let mut sum = 0.0;
            for i in 0..scores.len() {
                for j in i + 1..scores.len() {
                    sum += f64::from(scores[i].get(f).abs_diff(scores[j].get(f)));
                }
            }
            *totals.get_mut(&f).expect("all factors present") += sum / pairs;
        }
    }
    if shared == 0 {
        return Err(StatsError::NoSharedTasks);
    }
    for v in totals.values_mut() {
        *v /= shared as f64;
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> OnetCode {
        s.parse().unwrap()
    }

    #[test]
    fn maximal_spread_first() {
        let mut m = BTreeMap::new();
        m.insert(code("11-1011.00"), BTreeMap::from([("m1".into(), 1.0), ("m2".into(), 1.0)]));
        m.insert(code("13-1011.00"), BTreeMap::from([("m1".into(), 0.0), ("m2".into(), 2.0)]));
        let r = disagreement_ranking(&m, &BTreeMap::new(), 1);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].onet_soc, code("13-1011.00"));
        assert_eq!(r[0].spread, 2.0);
        assert_eq!(r[0].std_across_models, 1.0);
    }

    #[test]
    fn ties_by_code_and_single_model_skipped() {
        let mut m = BTreeMap::new();
        m.insert(code("15-1011.00"), BTreeMap::from([("a".into(), 0.5), ("b".into(), 0.5)]));
        m.insert(code("11-1011.00"), BTreeMap::from([("a".into(), 0.5), ("b".into(), 0.5)]));
        m.insert(code("13-1011.00"), BTreeMap::from([("a".into(), 0.5)]));
        let r = disagreement_ranking(&m, &BTreeMap::new(), 10);
        let codes: Vec<&str> = r.iter().map(|d| d.onet_soc.as_str()).collect();
        assert_eq!(codes, vec!["11-1011.00", "15-1011.00"]);
        assert!(r.iter().all(|d| d.spread == 0.0));
    }

    #[test]
    fn factor_gap_on_one_subscale() {
        let s = |ag| SubScores::new(1, 1, 1, ag).unwrap();
        let m1 = BTreeMap::from([("t1".to_string(), s(0)), ("t2".to_string(), s(1))]);
        let m2 = BTreeMap::from([("t1".to_string(), s(1)), ("t2".to_string(), s(2))]);
        let out = factor_disagreement(&BTreeMap::from([("m1".into(), m1), ("m2".into(), m2)])).unwrap();
        assert_eq!(out[&Factor::Ag], 1.0);
        assert_eq!(out[&Factor::Pv], 0.0);
        assert_eq!(out[&Factor::Da], 0.0);
        assert_eq!(out[&Factor::Tk], 0.0);
    }

    #[test]
    fn no_shared_tasks() {
        let s = SubScores::new(0, 0, 0, 0).unwrap();
        let m1 = BTreeMap::from([("t1".to_string(), s)]);
        let m2 = BTreeMap::from([("t2".to_string(), s)]);
        assert_eq!(
            factor_disagreement(&BTreeMap::from([("m1".into(), m1), ("m2".into(), m2)])),
            Err(StatsError::NoSharedTasks)
        );
    }
}
