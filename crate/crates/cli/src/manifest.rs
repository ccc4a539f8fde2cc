//! Run manifests: config echo, emitted artifacts with checksums, versions
//! and the pass/fail ledger of declared checks. Timing lives here (and
//! only here) so the reports themselves stay byte-reproducible.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub case_id: String,
    pub seed: u64,
    pub config_echo: String,
    pub versions: Versions,
    pub artifacts: Vec<ArtifactEntry>,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
    pub wall_ms: u64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub ma_cli: &'static str,
    pub ma_core: &'static str,
}

impl RunManifest {
    pub fn new(kind: &str, case_id: &str, seed: u64, config_echo: String) -> Self {
        RunManifest {
            kind: kind.to_string(),
            case_id: case_id.to_string(),
            seed,
            config_echo,
            versions: Versions {
                ma_cli: env!("CARGO_PKG_VERSION"),
                ma_core: env!("CARGO_PKG_VERSION"),
            },
            artifacts: Vec::new(),
            checks: Vec::new(),
            all_passed: true,
            wall_ms: 0,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        let c = CheckResult {
            name: name.into(),
            pass,
            detail: detail.into(),
        };
        self.all_passed &= c.pass;
        self.checks.push(c);
    }

    /// Record an emitted file with its checksum.
    pub fn artifact(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.artifacts.push(ArtifactEntry {
            path: path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            bytes: bytes.len() as u64,
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let bytes = crate::json::to_vec_pretty17(self)?;
        std::fs::write(&path, bytes)?;
        Ok(path)
    }
}
