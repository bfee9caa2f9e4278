use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Run metadata kept apart from the data files so those stay byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub config_sha256: String,
    /// `(file name, sha256)` per input.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
    /// Free-form `key: value` lines such as join drop counts.
    pub notes: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tool_version: {}", self.tool_version);
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "config_sha256: {}", self.config_sha256);
        for (name, digest) in &self.inputs {
            let _ = writeln!(s, "input: {name} sha256:{digest}");
        }
        for (name, digest) in &self.outputs {
            let _ = writeln!(s, "output: {name} sha256:{digest}");
        }
        for (key, value) in &self.notes {
            let _ = writeln!(s, "{key}: {value}");
        }
        s
    }
}
