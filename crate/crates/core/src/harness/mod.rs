//! Config-driven experiment commands and their CSV artifacts.
//!
//! Every command is a pure function of the parsed config (including its
//! seed): all artifacts are produced in memory first and written only when
//! the whole run succeeded, so a bad config never leaves partial files.

mod commands;
mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub use commands::{gaussianity, gmi_curve, optimize, pd_curve, tradeoff_sweep};
pub use config::{
    resolve_constellation, CfarSection, Command, ExperimentConfig, GridSection, Preset, ScenarioSection,
    TargetSpec, TrainSection,
};

/// Exit status of a failed command.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Unusable config or inputs; exit code 2.
    Config(String),
    /// Numerical breakdown; exit code 3. `partial` holds artifacts that
    /// should still be flushed, such as the trace up to the failure.
    Numerical { msg: String, partial: Vec<Artifact> },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical { .. } => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) => m,
            Failure::Numerical { msg, .. } => msg,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

/// A file to write under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: PathBuf,
    pub contents: String,
}

/// SHA-256 of the command name and the effective config.
pub fn config_hash(command: Command, cfg: &ExperimentConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(command.name().as_bytes());
    h.update([0u8]);
    h.update(json.as_bytes());
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// CSV text with the provenance comment and header already in place.
pub(crate) struct Csv {
    text: String,
}

impl Csv {
    pub(crate) fn new(stamp: &str, header: &str) -> Self {
        Self {
            text: format!("{stamp}\n{header}\n"),
        }
    }

    pub(crate) fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub(crate) fn into_artifact(self, name: impl Into<PathBuf>) -> Artifact {
        Artifact {
            name: name.into(),
            contents: self.text,
        }
    }
}

pub(crate) fn stamp(command: Command, cfg: &ExperimentConfig) -> String {
    format!("# config_hash={} seed={}", config_hash(command, cfg), cfg.seed)
}

/// Run `command` and return its artifacts without touching the filesystem.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Vec<Artifact>, Failure> {
    cfg.check_kind(command)?;
    match command {
        Command::Optimize => optimize(cfg),
        Command::GmiCurve => gmi_curve(cfg),
        Command::PdCurve => pd_curve(cfg),
        Command::TradeoffSweep => tradeoff_sweep(cfg),
        Command::Gaussianity => gaussianity(cfg),
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, &a.contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Fixed-width float formatting shared by all CSVs.
pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.10e}")
}
