//! Run configuration: an optional TOML file merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use exposure_core::aggregation::Soc6Weighting;
use exposure_core::annotation::{AnnotationConfig, ModelId, Provider};
use exposure_core::report::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

/// Models used by the `trio` preset.
pub const TRIO: [&str; 3] = ["a:o4-mini", "b:claude-sonnet-4-20250514", "c:gemini-2.5-flash"];

/// Contents of the `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub models: Option<Vec<String>>,
    pub temperature: Option<f64>,
    pub min_models: Option<usize>,
    pub n_bins: Option<usize>,
    pub soc6_weighting: Option<Soc6Weighting>,
    pub max_inflight: Option<usize>,
    pub max_retries: Option<u32>,
    pub backoff_base_ms: Option<u64>,
    pub backoff_max_ms: Option<u64>,
    pub min_request_interval_ms: Option<u64>,
    pub request_timeout_ms: Option<u64>,
    pub top_n: Option<usize>,
    pub paths: PathConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub out_dir: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub priors: Option<PathBuf>,
    pub employment: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    /// Year to OEWS file.
    pub oews: BTreeMap<i32, PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve(base);
        Ok(cfg)
    }
}

impl PathConfig {
    /// Makes relative paths relative to the config file's directory.
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.tasks);
        fix(&mut self.annotations);
        fix(&mut self.priors);
        fix(&mut self.employment);
        fix(&mut self.categories);
        for p in self.oews.values_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Effective settings after merging flags over the file over defaults.
/// Paths are deliberately not part of it, so the hash identifies the
/// analysis rather than where it ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub models: Vec<String>,
    pub temperature: f64,
    pub min_models: usize,
    pub n_bins: usize,
    pub soc6_weighting: Soc6Weighting,
    pub max_inflight: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    pub min_request_interval_ms: u64,
    pub request_timeout_ms: u64,
    pub top_n: usize,
}

impl Settings {
    pub fn from_file(file: &FileConfig, seed_flag: Option<u64>) -> Self {
        let a = AnnotationConfig::default();
        Self {
            seed: seed_flag.or(file.seed).unwrap_or(DEFAULT_SEED),
            models: file.models.clone().unwrap_or_else(|| vec!["stub:3".into()]),
            temperature: file.temperature.unwrap_or(0.0),
            min_models: file.min_models.unwrap_or(2),
            n_bins: file.n_bins.unwrap_or(exposure_core::stats::DEFAULT_BINS),
            soc6_weighting: file.soc6_weighting.unwrap_or_default(),
            max_inflight: file.max_inflight.unwrap_or(a.max_inflight),
            max_retries: file.max_retries.unwrap_or(a.max_retries),
            backoff_base_ms: file.backoff_base_ms.unwrap_or(a.backoff_base_ms),
            backoff_max_ms: file.backoff_max_ms.unwrap_or(a.backoff_max_ms),
            min_request_interval_ms: file.min_request_interval_ms.unwrap_or(a.min_request_interval_ms),
            request_timeout_ms: file.request_timeout_ms.unwrap_or(a.request_timeout_ms),
            top_n: file.top_n.unwrap_or(15),
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.min_models < 1 {
            return Err(CliError::Config("min_models must be at least 1".into()));
        }
        if self.n_bins < 2 {
            return Err(CliError::Config("n_bins must be at least 2".into()));
        }
        if self.max_inflight < 1 {
            return Err(CliError::Config("max_inflight must be at least 1".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(CliError::Config("temperature must be a non-negative number".into()));
        }
        Ok(())
    }

    pub fn annotation_config(&self) -> AnnotationConfig {
        AnnotationConfig {
            max_retries: self.max_retries,
            max_inflight: self.max_inflight,
            backoff_base_ms: self.backoff_base_ms,
            backoff_max_ms: self.backoff_max_ms,
            min_request_interval_ms: self.min_request_interval_ms,
            request_timeout_ms: self.request_timeout_ms,
        }
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).expect("settings serialize");
        sha256_hex(text.as_bytes())
    }

    pub fn model_ids(&self) -> Result<Vec<ModelId>, CliError> {
        parse_models(&self.models, self.temperature, self.seed)
    }
}

/// Expands model specs into model ids.
///
/// * `stub:N` (N a number) gives N stub models `stub-0 .. stub-(N-1)` with
///   seeds `seed, seed + 1, ...`.
/// * `stub:<name>` gives one stub model seeded by its position in the list.
/// * `a:<model>`, `b:<model>`, `c:<model>` name a live model.
/// * `trio` expands to the three default live models.
pub fn parse_models(specs: &[String], temperature: f64, seed: u64) -> Result<Vec<ModelId>, CliError> {
    let mut out = Vec::new();
    let mut expanded: Vec<String> = Vec::new();
    for s in specs {
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "trio" {
                expanded.extend(TRIO.iter().map(|m| m.to_string()));
            } else {
                expanded.push(part.to_string());
            }
        }
    }
    if expanded.is_empty() {
        return Err(CliError::Usage("no models given".into()));
    }
    for (pos, spec) in expanded.iter().enumerate() {
        let (provider, name) = spec
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("model `{spec}` must look like provider:name")))?;
        let provider: Provider = provider.parse().map_err(CliError::Usage)?;
        let bad = |e: exposure_core::annotation::ModelIdError| CliError::Usage(format!("model `{spec}`: {e}"));
        match (provider, name.parse::<u64>()) {
            (Provider::Stub, Ok(n)) => {
                if n == 0 {
                    return Err(CliError::Usage("stub:0 names no models".into()));
                }
                for i in 0..n {
                    out.push(ModelId::new(Provider::Stub, format!("stub-{i}"), 0.0, Some(seed.wrapping_add(i))).map_err(bad)?);
                }
            }
            (Provider::Stub, Err(_)) => {
                out.push(ModelId::new(Provider::Stub, name, 0.0, Some(seed.wrapping_add(pos as u64))).map_err(bad)?)
            }
            (p, _) => out.push(ModelId::new(p, name, temperature, Some(seed)).map_err(bad)?),
        }
    }
    Ok(out)
}
