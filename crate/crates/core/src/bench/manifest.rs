//! Run manifest written next to every CLI output.

use std::path::Path;
use std::process::Command;

use serde::Serialize;

use crate::error::Result;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub crate_version: String,
    /// `git rev-parse HEAD` of the working directory, when available.
    pub git_revision: Option<String>,
    pub hardware: Hardware,
    pub threads: usize,
    pub reproducible: bool,
    pub config: ExperimentConfig,
    /// Named wall-clock timings in seconds.
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hardware {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
}

impl Hardware {
    pub fn detect() -> Self {
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

pub fn git_revision() -> Option<String> {
    let out = Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    let rev = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!rev.is_empty()).then_some(rev)
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            git_revision: git_revision(),
            hardware: Hardware::detect(),
            threads: config.run.threads,
            reproducible: config.run.reproducible,
            config: config.clone(),
            timings: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_is_json() {
        let mut m = Manifest::new("solve", &ExperimentConfig::benchmark(5.0));
        m.timings.push(("solve".into(), 0.5));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        m.write(&path).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(value["command"], "solve");
        assert_eq!(value["config"]["process"]["horizon"], 0.01);
        assert!(value["hardware"]["logical_cpus"].as_u64().unwrap() >= 1);
    }
}
