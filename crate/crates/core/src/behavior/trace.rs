//! Line-oriented timestamped traces: `at_ms<TAB>kind<TAB>payload-json`.
//!
//! The same format carries inbound client messages, outbound server messages
//! and behavior event streams. Payload JSON is compact, so it never contains
//! a raw tab or newline.

use std::io::{BufRead, Write};

use serde_json::Value;
use thiserror::Error;

use super::{BehaviorEvent, BehaviorKind};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: expected 3 tab-separated fields")]
    MissingField { line: usize },
    #[error("line {line}: bad timestamp {value:?}")]
    BadTimestamp { line: usize, value: String },
    #[error("line {line}: empty kind")]
    EmptyKind { line: usize },
    #[error("line {line}: bad payload: {source}")]
    BadPayload {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: timestamp {at} goes backwards")]
    OutOfOrder { line: usize, at: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    /// Milliseconds since session start.
    pub at: u64,
    pub kind: String,
    pub payload: Value,
}

impl TraceLine {
    pub fn new(at: u64, kind: impl Into<String>, payload: Value) -> Self {
        Self {
            at,
            kind: kind.into(),
            payload,
        }
    }

    pub fn format(&self) -> String {
        format!("{}\t{}\t{}", self.at, self.kind, self.payload)
    }

    /// Parses one line; `line` is the 1-based number used in errors.
    pub fn parse(text: &str, line: usize) -> Result<Self, TraceError> {
        let mut fields = text.splitn(3, '\t');
        let (Some(at), Some(kind), Some(payload)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(TraceError::MissingField { line });
        };
        let at = at.parse().map_err(|_| TraceError::BadTimestamp {
            line,
            value: at.to_owned(),
        })?;
        if kind.is_empty() {
            return Err(TraceError::EmptyKind { line });
        }
        let payload = serde_json::from_str(payload)
            .map_err(|source| TraceError::BadPayload { line, source })?;
        Ok(Self::new(at, kind, payload))
    }
}

impl From<&BehaviorEvent> for TraceLine {
    fn from(e: &BehaviorEvent) -> Self {
        let payload = match serde_json::to_value(e.kind) {
            Ok(Value::Object(mut m)) => m.remove("payload").unwrap_or(Value::Null),
            _ => Value::Null,
        };
        TraceLine::new(e.at, e.kind.name(), payload)
    }
}

impl TryFrom<&TraceLine> for BehaviorEvent {
    type Error = serde_json::Error;

    fn try_from(line: &TraceLine) -> Result<Self, Self::Error> {
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), Value::String(line.kind.clone()));
        if !line.payload.is_null() {
            obj.insert("payload".into(), line.payload.clone());
        }
        let kind: BehaviorKind = serde_json::from_value(Value::Object(obj))?;
        Ok(BehaviorEvent { at: line.at, kind })
    }
}

/// Reads a whole trace. Blank lines are skipped; timestamps must not
/// decrease.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceLine>, TraceError> {
    let mut out: Vec<TraceLine> = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let text = text.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let line = TraceLine::parse(text, i + 1)?;
        if out.last().is_some_and(|prev| line.at < prev.at) {
            return Err(TraceError::OutOfOrder {
                line: i + 1,
                at: line.at,
            });
        }
        out.push(line);
    }
    Ok(out)
}

pub fn write_trace<W: Write>(mut writer: W, lines: &[TraceLine]) -> std::io::Result<()> {
    for l in lines {
        writeln!(writer, "{}", l.format())?;
    }
    Ok(())
}
