use serde_json::{Map, Value};
use thiserror::Error;

use super::{Factor, SubScores};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreParseError {
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("JSON object is missing key `{0}`")]
    MissingKey(&'static str),
    #[error("`{key}` = {value} is outside {{0, 1, 2}}")]
    OutOfRange { key: &'static str, value: i64 },
    #[error("`{0}` is not an integer")]
    NonIntegerValue(&'static str),
}

/// Extracts the four subscores from a model response.
///
/// Scans for the first balanced `{...}` substring that parses as a JSON
/// object carrying all of `PV`, `DA`, `TK` and `AG`, so surrounding prose,
/// code fences and wrapper objects are skipped. Values must be integers in
/// `{0, 1, 2}`; integral floats such as `2.0` are accepted.
pub fn parse_score_response(raw: &str) -> Result<SubScores, ScoreParseError> {
    let mut missing: Option<&'static str> = None;
    for (start, _) in raw.match_indices('{') {
        let Some(end) = balanced_end(raw.as_bytes(), start) else {
            continue;
        };
        let Ok(Value::Object(map)) = serde_json::from_str::<Value>(&raw[start..=end]) else {
            continue;
        };
        match Factor::ALL.iter().find(|f| !map.contains_key(f.key())) {
            None => return scores_from(&map),
            Some(f) => {
                missing.get_or_insert(f.key());
            }
        }
    }
    Err(missing.map_or(ScoreParseError::NoJsonFound, ScoreParseError::MissingKey))
}

/// Index of the `}` closing the object opened at `start`, skipping braces
/// inside JSON strings.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn scores_from(map: &Map<String, Value>) -> Result<SubScores, ScoreParseError> {
    let mut v = [0i64; 4];
    for (slot, factor) in v.iter_mut().zip(Factor::ALL) {
        let key = factor.key();
        let value = integer_value(&map[key]).ok_or(ScoreParseError::NonIntegerValue(key))?;
        if !(0..=2).contains(&value) {
            return Err(ScoreParseError::OutOfRange { key, value });
        }
        *slot = value;
    }
    Ok(SubScores::new(v[0], v[1], v[2], v[3]).expect("range checked above"))
}

fn integer_value(v: &Value) -> Option<i64> {
    let Value::Number(n) = v else { return None };
    if let Some(i) = n.as_i64() {
        return Some(i);
    }
    if n.as_u64().is_some() {
        return Some(i64::MAX);
    }
    let f = n.as_f64()?;
    if f.fract() != 0.0 || !f.is_finite() {
        return None;
    }
    Some(if f.abs() < 9.0e18 { f as i64 } else { i64::MAX })
}
