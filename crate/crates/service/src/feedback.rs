//! Append-only JSON-lines feedback log.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use riskweave::api::ApiError;
use serde::{Deserialize, Serialize};

pub const FEEDBACK_SCHEMA_VERSION: u32 = 1;

/// Structured questionnaire answers. Versioned through
/// [`FEEDBACK_SCHEMA_VERSION`] so the instrument can grow.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackAnswers {
    /// 1 (hard to understand) to 5 (easy).
    #[serde(default)]
    pub understandability: Option<u8>,
    /// Question id → answer.
    #[serde(default)]
    pub comprehension: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackRequest {
    pub model_id: String,
    #[serde(default)]
    pub comment: Option<String>,
    #[serde(default)]
    pub answers: FeedbackAnswers,
    /// Optional self-reported fields (age band, education, ...).
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
}

/// One line of the log. No network identifiers are recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub schema_version: u32,
    pub timestamp: String,
    pub model_id: String,
    pub comment: Option<String>,
    pub answers: FeedbackAnswers,
    pub demographics: BTreeMap<String, String>,
}

impl FeedbackRequest {
    pub fn validate(&self) -> Result<(), ApiError> {
        if let Some(r) = self.answers.understandability {
            if !(1..=5).contains(&r) {
                return Err(ApiError::new("InvalidFeedback", "understandability must be between 1 and 5"));
            }
        }
        Ok(())
    }
}

pub struct FeedbackLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl FeedbackLog {
    pub fn open(storage_root: &Path) -> Result<Self, ApiError> {
        let path = storage_root.join("feedback.jsonl");
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ApiError::new("StorageError", format!("opening feedback log: {e}")))?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes the entry as one line with a single `write_all` under the lock,
    /// then syncs it to disk.
    pub fn append(&self, entry: &FeedbackEntry) -> Result<(), ApiError> {
        let mut line = serde_json::to_string(entry).expect("feedback serializes");
        line.push('\n');
        let mut file = self.file.lock().expect("feedback lock");
        file.write_all(line.as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(|e| ApiError::new("StorageError", format!("writing feedback: {e}")))
    }
}
