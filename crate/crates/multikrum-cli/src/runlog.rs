//! Append-only run log: one JSON object per line, one line per executed
//! command. Result files never carry timestamps; the log line does, unless
//! suppressed, so reruns with `--no-timestamp` are byte-stable end to end.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::{io_error, CliError};

pub const DEFAULT_LOG_PATH: &str = "runs.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "verification-failure")]
    VerificationFailure,
    #[serde(rename = "error")]
    Error,
}

/// One log line. `parameters` holds the resolved effective values (after
/// config-file and default resolution), keyed by flag name, so a run can
/// be reproduced from its log line alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunRecord {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        RunRecord {
            command: command.to_string(),
            parameters,
            seed,
            outputs: Vec::new(),
            status: RunStatus::Ok,
            timestamp: None,
        }
    }

    /// Stamps the record with current Unix seconds unless suppressed.
    pub fn stamp(&mut self, no_timestamp: bool) {
        if !no_timestamp {
            self.timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .ok();
        }
    }
}

/// Appends one record as a single JSON line. The file is created on first
/// use; existing content is never rewritten.
pub fn append_run(path: &Path, record: &RunRecord) -> Result<(), CliError> {
    let mut line = serde_json::to_string(record).expect("serializable record");
    line.push('\n');
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_error(path, e))?;
    file.write_all(line.as_bytes()).map_err(|e| io_error(path, e))
}
