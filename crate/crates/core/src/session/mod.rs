//! Session server core: wire protocol, per-connection session lifecycle,
//! persistence, configuration and headless replay.
//!
//! The network transport lives in the command-line crate; everything here is
//! synchronous and driven by explicit timestamps so that a recorded inbound
//! log replays to an identical outbound log.

mod config;
pub mod hub;
pub mod replay;
pub mod script;
pub mod store;
pub mod wire;

pub use config::{ConfigError, ServerConfig};
pub use hub::{ConnId, Hub, Outbound};
pub use replay::{inbound_line, outbound_line, replay, replay_lines, ReplayError};
pub use script::{parse_script, run_script, ClientTiming, ScriptError, ScriptRun, ScriptSession};
pub use store::{CorruptRecord, JournalEntry, PersistedStore, Store, StoreError, UserProfile};
pub use wire::{Body, ErrorCode, SessionSummary, SpeechEventKind, WireMessage};
