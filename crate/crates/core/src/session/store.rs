//! Users, finished sessions, mood timelines and an in-progress journal,
//! kept as JSON-lines files in one directory.
//!
//! * `users.jsonl`: one profile per line, the last line per user wins.
//! * `sessions.jsonl`: one finished [`SessionRecord`] per line, append-only.
//! * `timelines.jsonl`: one [`MoodTimeline`] per line, the last per user wins.
//! * `journal.jsonl`: dialogue state after every turn of unfinished
//!   sessions, the last line per session wins. Entries for sessions that were
//!   since finished are dropped on load.
//!
//! Appends are flushed per turn, so a crash loses at most the turn in
//! flight. A line that fails to parse is skipped and reported.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{DialogueState, SessionRecord};
use crate::empathy::{update_timeline, MoodTimeline};

pub const USERS_FILE: &str = "users.jsonl";
pub const SESSIONS_FILE: &str = "sessions.jsonl";
pub const TIMELINES_FILE: &str = "timelines.jsonl";
pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// A line that was skipped while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptRecord {
    pub file: String,
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profession: Option<String>,
    pub created_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UserLine {
    user_id: String,
    #[serde(flatten)]
    profile: UserProfile,
}

/// Snapshot of an unfinished session after its latest turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub session_id: String,
    pub state: DialogueState,
    pub record: SessionRecord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistedStore {
    pub users: BTreeMap<String, UserProfile>,
    pub sessions: Vec<SessionRecord>,
    pub timelines: BTreeMap<String, MoodTimeline>,
    /// Unfinished sessions by session id.
    pub in_progress: BTreeMap<String, JournalEntry>,
}

pub fn session_id(user_id: &str, date: NaiveDate) -> String {
    format!("{user_id}:{date}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_lines<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> Result<(), StoreError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

fn append_line<T: Serialize>(path: &Path, item: &T) -> Result<(), StoreError> {
    let mut line = serde_json::to_string(item)?;
    line.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    f.write_all(line.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

/// Parses each non-blank line of `name` in `dir`; a missing file is empty.
fn read_lines<T: for<'de> Deserialize<'de>>(
    dir: &Path,
    name: &str,
    corrupt: &mut Vec<CorruptRecord>,
) -> Result<Vec<T>, StoreError> {
    let path = dir.join(name);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).split(b'\n').enumerate() {
        let line = line.map_err(io_err(&path))?;
        let report = |reason: String| CorruptRecord {
            file: name.to_owned(),
            line: i + 1,
            reason,
        };
        let Ok(text) = std::str::from_utf8(&line) else {
            corrupt.push(report("invalid utf-8".into()));
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(text) {
            Ok(v) => out.push(v),
            Err(e) => corrupt.push(report(e.to_string())),
        }
    }
    Ok(out)
}

impl PersistedStore {
    /// Writes the whole store in canonical form, replacing existing files.
    pub fn save(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_lines(
            &dir.join(USERS_FILE),
            self.users.iter().map(|(id, p)| UserLine {
                user_id: id.clone(),
                profile: p.clone(),
            }),
        )?;
        write_lines(&dir.join(SESSIONS_FILE), &self.sessions)?;
        write_lines(&dir.join(TIMELINES_FILE), self.timelines.values())?;
        write_lines(&dir.join(JOURNAL_FILE), self.in_progress.values())
    }

    /// Loads a store, skipping and reporting unparseable lines. A missing
    /// directory or file reads as empty.
    pub fn load(dir: &Path) -> Result<(Self, Vec<CorruptRecord>), StoreError> {
        let mut corrupt = Vec::new();
        let mut store = PersistedStore::default();
        for u in read_lines::<UserLine>(dir, USERS_FILE, &mut corrupt)? {
            store.users.insert(u.user_id, u.profile);
        }
        store.sessions = read_lines(dir, SESSIONS_FILE, &mut corrupt)?;
        for t in read_lines::<MoodTimeline>(dir, TIMELINES_FILE, &mut corrupt)? {
            store.timelines.insert(t.user_id.clone(), t);
        }
        for j in read_lines::<JournalEntry>(dir, JOURNAL_FILE, &mut corrupt)? {
            store.in_progress.insert(j.session_id.clone(), j);
        }
        let sessions = &store.sessions;
        store.in_progress.retain(|_, j| {
            !sessions
                .iter()
                .any(|s| s.user_id == j.record.user_id && s.date == j.record.date)
        });
        Ok((store, corrupt))
    }

    pub fn session(&self, user_id: &str, date: NaiveDate) -> Option<&SessionRecord> {
        self.sessions
            .iter()
            .find(|s| s.user_id == user_id && s.date == date)
    }

    pub fn sessions_of<'a>(&'a self, user_id: &'a str) -> impl Iterator<Item = &'a SessionRecord> {
        self.sessions.iter().filter(move |s| s.user_id == user_id)
    }

    /// Timeline for `user_id`, rebuilt from sessions if none is stored.
    pub fn timeline(&self, user_id: &str) -> MoodTimeline {
        self.timelines
            .get(user_id)
            .cloned()
            .unwrap_or_else(|| rebuild_timeline(user_id, self.sessions_of(user_id)))
    }

    /// Records a finished session and updates the user's profile and
    /// timeline. Returns the changed profile and timeline for appending.
    fn apply_commit(&mut self, record: SessionRecord) -> (UserProfile, MoodTimeline) {
        let user = record.user_id.clone();
        let profile = self
            .users
            .entry(user.clone())
            .or_insert_with(|| UserProfile {
                profession: None,
                created_date: record.date,
            });
        if record.answers.profession.is_some() {
            profile.profession = record.answers.profession.clone();
        }
        if record.date < profile.created_date {
            profile.created_date = record.date;
        }
        let profile = profile.clone();
        self.in_progress.remove(&session_id(&user, record.date));
        let prior = self.timeline(&user);
        self.sessions.push(record);
        let timeline = match update_timeline(prior, self.sessions.last().expect("just pushed")) {
            Ok(t) => t,
            // Sessions committed out of date order: rebuild in order.
            Err(_) => rebuild_timeline(&user, self.sessions_of(&user)),
        };
        self.timelines.insert(user, timeline.clone());
        (profile, timeline)
    }
}

fn rebuild_timeline<'a>(
    user_id: &str,
    sessions: impl Iterator<Item = &'a SessionRecord>,
) -> MoodTimeline {
    let mut mine: Vec<&SessionRecord> = sessions.collect();
    mine.sort_by_key(|s| s.date);
    mine.dedup_by_key(|s| s.date);
    MoodTimeline::from_sessions(user_id, mine).unwrap_or_else(|_| MoodTimeline::new(user_id))
}

/// A [`PersistedStore`] optionally mirrored to a directory through
/// per-turn appends.
#[derive(Debug, Default)]
pub struct Store {
    pub data: PersistedStore,
    dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory(data: PersistedStore) -> Self {
        Self { data, dir: None }
    }

    /// Loads `dir` (created if missing) and appends future changes to it.
    pub fn open(dir: &Path) -> Result<(Self, Vec<CorruptRecord>), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let (data, corrupt) = PersistedStore::load(dir)?;
        Ok((
            Self {
                data,
                dir: Some(dir.to_owned()),
            },
            corrupt,
        ))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn journal(&mut self, entry: JournalEntry) -> Result<(), StoreError> {
        if let Some(dir) = &self.dir {
            append_line(&dir.join(JOURNAL_FILE), &entry)?;
        }
        self.data
            .in_progress
            .insert(entry.session_id.clone(), entry);
        Ok(())
    }

    pub fn commit(&mut self, record: SessionRecord) -> Result<(), StoreError> {
        let user_id = record.user_id.clone();
        if let Some(dir) = &self.dir {
            append_line(&dir.join(SESSIONS_FILE), &record)?;
        }
        let (profile, timeline) = self.data.apply_commit(record);
        if let Some(dir) = &self.dir {
            append_line(&dir.join(USERS_FILE), &UserLine { user_id, profile })?;
            append_line(&dir.join(TIMELINES_FILE), &timeline)?;
        }
        Ok(())
    }

    /// Rewrites the directory in canonical form, dropping superseded lines.
    pub fn compact(&self) -> Result<(), StoreError> {
        match &self.dir {
            Some(dir) => self.data.save(dir),
            None => Ok(()),
        }
    }
}
