use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::Outcome;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(name: impl Into<String>, bytes: &[u8]) -> Self {
        InputDigest { name: name.into(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub exit_code: i32,
    pub verdict: String,
    pub witnesses: Vec<(String, String)>,
    /// Digest of the JSON report, so a rerun can be compared byte for byte.
    pub report_sha256: String,
    pub wall_time_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>, inputs: Vec<InputDigest>, o: &Outcome, wall: Duration) -> Self {
        let report = serde_json::to_vec(&o.json).expect("reports serialize");
        RunManifest {
            command: command.into(),
            arguments,
            inputs,
            exit_code: o.exit,
            verdict: o.verdict.clone(),
            witnesses: o.witnesses.clone(),
            report_sha256: hex::encode(Sha256::digest(&report)),
            wall_time_ms: wall.as_millis(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")
    }
}
