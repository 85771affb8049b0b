//! Append-only record log. Each event is one JSON line; an append returns
//! only after the line has been flushed and synced to disk.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{ServiceError, ServiceResult};

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Header {
        version: u32,
        dataset_hash: String,
    },
    Eligibility {
        annotator_id: String,
        eligible: bool,
    },
    SessionCreated {
        session_id: String,
        assignment: Assignment,
    },
    Rating {
        session_id: String,
        sentence_id: String,
        raw: u8,
        timestamp: u64,
    },
}

#[derive(Debug)]
pub struct EventLog {
    file: Option<(PathBuf, File)>,
}

impl EventLog {
    /// A log that keeps nothing on disk.
    pub fn in_memory() -> Self {
        EventLog { file: None }
    }

    /// Opens or creates the log at `path` and returns it with its events.
    /// A torn final line left by a crash mid-append is cut off.
    pub fn open(path: impl AsRef<Path>) -> ServiceResult<(Self, Vec<Event>)> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        let mut content = Vec::new();
        file.read_to_end(&mut content)?;
        let corrupt = |message: String| ServiceError::CorruptLog {
            path: path.display().to_string(),
            message,
        };

        let complete = content
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |i| i + 1);
        if complete < content.len() {
            log::warn!(
                "{}: discarding {} bytes of an incomplete trailing record",
                path.display(),
                content.len() - complete
            );
            file.set_len(complete as u64)?;
            file.sync_all()?;
            file.seek(SeekFrom::End(0))?;
        }
        let text = std::str::from_utf8(&content[..complete]).map_err(|e| corrupt(e.to_string()))?;
        let mut events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(line)
                .map_err(|e| corrupt(format!("line {}: {e}", idx + 1)))?;
            events.push(event);
        }
        Ok((
            EventLog {
                file: Some((path, file)),
            },
            events,
        ))
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn append(&mut self, event: &Event) -> ServiceResult<()> {
        if let Some((_, file)) = &mut self.file {
            let mut line = serde_json::to_vec(event).expect("events serialize");
            line.push(b'\n');
            let before = file.metadata()?.len();
            if let Err(e) = file.write_all(&line).and_then(|_| file.sync_data()) {
                // Leave no partial record behind for later appends to follow.
                let _ = file.set_len(before);
                return Err(e.into());
            }
        }
        Ok(())
    }
}
