use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, or input the pipeline
    /// rejects. Exit code 1.
    Input(String),
    /// A check that must hold for valid input failed. Exit code 2.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input_err(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<InputDigest>,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<usize>,
    pub truncation: Value,
    pub tool_version: String,
    /// Only present with `--timing`, so that reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.into(),
            inputs: Vec::new(),
            backend: "exact".into(),
            precision_bits: None,
            truncation: Value::Object(Default::default()),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: None,
        }
    }

    /// Reads a file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(bytes)
    }

    pub fn set_truncation(&mut self, key: &str, v: impl Into<Value>) {
        if let Value::Object(m) = &mut self.truncation {
            m.insert(key.into(), v.into());
        }
    }
}

/// Where a report goes.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Sink {
    /// Writes `{"manifest": …, <body fields>}` as pretty JSON.
    pub fn emit(&self, mut manifest: RunManifest, body: Value, started: std::time::Instant) -> CliResult<()> {
        let secs = started.elapsed().as_secs_f64();
        eprintln!("wall time: {secs:.3} s");
        if self.timing {
            manifest.wall_time_s = Some(secs);
        }
        let mut doc = serde_json::Map::new();
        doc.insert("manifest".into(), serde_json::to_value(&manifest).expect("serializable"));
        match body {
            Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("result".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable") + "\n";
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
