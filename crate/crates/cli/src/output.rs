use std::fmt::Display;
use std::path::{Path, PathBuf};

use exposure_core::ingest::{rejects_file_name, write_rejects, Reject};
use exposure_core::report::{file_digest, sha256_hex, Manifest};

use crate::config::Settings;
use crate::CliError;

/// Collects the files a stage reads and writes and records them in
/// `manifest_<stage>.txt` at the end.
pub(crate) struct Stage {
    name: &'static str,
    dir: PathBuf,
    manifest: Manifest,
}

impl Stage {
    pub fn new(name: &'static str, dir: PathBuf, settings: &Settings) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            name,
            dir,
            manifest: Manifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: name.to_string(),
                config_sha256: settings.digest(),
                ..Manifest::default()
            },
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = file_digest(path).map_err(input_error(path))?;
        self.manifest.inputs.push((file_name(path), digest));
        Ok(())
    }

    /// Renders into memory first so a failed writer leaves no partial file.
    pub fn write<E: Display>(
        &mut self,
        name: &str,
        render: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
    ) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::Runtime(format!("writing {name}: {e}")))?;
        let path = self.dir.join(name);
        std::fs::write(&path, &buf)?;
        self.manifest.outputs.push((name.to_string(), sha256_hex(&buf)));
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Writes `<input>.rejects.csv` when any row of `input` was rejected.
    pub fn rejects(&mut self, input: &Path, rejects: &[Reject]) -> Result<(), CliError> {
        if rejects.is_empty() {
            return Ok(());
        }
        log::warn!("{}: {} malformed rows skipped", input.display(), rejects.len());
        self.note(format!("rejected_rows {}", file_name(input)), rejects.len());
        self.write(&rejects_file_name(input), |w| write_rejects(w, rejects))?;
        Ok(())
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Display) {
        self.manifest.notes.push((key.into(), value.to_string()));
    }

    pub fn finish(self) -> Result<(), CliError> {
        let path = self.dir.join(format!("manifest_{}.txt", self.name));
        std::fs::write(path, self.manifest.render())?;
        Ok(())
    }
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub(crate) fn input_error<E: Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

pub(crate) fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, CliError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(input_error(path))
}

/// Flag value, else config value, else a usage error naming both.
pub(crate) fn required(flag: Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| CliError::Usage(format!("missing --{name} (or paths.{} in the config file)", name.replace('-', "_"))))
}

pub(crate) fn out_dir(flag: Option<PathBuf>, config: &Option<PathBuf>) -> PathBuf {
    flag.or_else(|| config.clone()).unwrap_or_else(|| PathBuf::from("."))
}
