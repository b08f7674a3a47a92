//! Artifacts are staged in memory and written with the manifest in one pass,
//! so a failed command leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "dyad-manifest v1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TestbedRecord {
    pub variant: String,
    pub ste_target: f64,
    pub c_treat: f64,
    pub ste: f64,
}

#[derive(Debug, Serialize)]
struct ArtifactRecord<'a> {
    name: &'a str,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    format: &'static str,
    subcommand: &'a str,
    cli_version: &'static str,
    core_version: &'static str,
    config_path: String,
    config_sha256: String,
    seed: u64,
    resolved_config: &'a str,
    testbeds: &'a [TestbedRecord],
    artifacts: Vec<ArtifactRecord<'a>>,
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Outputs {
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub testbeds: Vec<TestbedRecord>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.artifacts.push((name.into(), bytes));
    }
}

pub struct RunInfo<'a> {
    pub subcommand: &'a str,
    pub config_path: &'a Path,
    pub config_bytes: &'a [u8],
    pub resolved_config: &'a str,
    pub seed: u64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(MANIFEST)
}

/// Writes the artifacts, then the manifest.
pub fn commit(out: &Path, outputs: &Outputs, info: &RunInfo) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    for (name, bytes) in &outputs.artifacts {
        fs::write(out.join(name), bytes)?;
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        subcommand: info.subcommand,
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: dyad_core::VERSION,
        config_path: info.config_path.display().to_string(),
        config_sha256: sha256_hex(info.config_bytes),
        seed: info.seed,
        resolved_config: info.resolved_config,
        testbeds: &outputs.testbeds,
        artifacts: outputs.artifacts.iter().map(|(n, b)| ArtifactRecord { name: n, sha256: sha256_hex(b) }).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(manifest_path(out), text + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
