//! Comparison sessions and their on-disk metadata.
//!
//! Only labels, filters and the active pair are persisted. Models and results are
//! recomputed from the stored log at startup.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use cpm_core::comparison::{compare, ComparisonResult, ModelSlice};
use cpm_core::{EventLog, FilterSpec};
use serde::{Deserialize, Serialize};

use crate::store::LogStore;

/// File under the root directory holding session metadata.
pub const SESSIONS_FILE: &str = ".sessions.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivePair {
    pub left_index: usize,
    pub right_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSession {
    pub session_id: String,
    pub log_id: String,
    pub slices: Vec<ModelSlice>,
    pub active_pair: Option<ActivePair>,
    pub result: Option<ComparisonResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PairError {
    #[error("left and right slice must differ (both are {0})")]
    SameIndex(usize),
    #[error("slice index {index} out of range, session has {len} slices")]
    OutOfRange { index: usize, len: usize },
}

impl ComparisonSession {
    pub fn new(session_id: String, log_id: String) -> Self {
        ComparisonSession {
            session_id,
            log_id,
            slices: Vec::new(),
            active_pair: None,
            result: None,
        }
    }

    /// Makes `pair` the compared pair and recomputes the result.
    pub fn activate(&mut self, pair: ActivePair) -> Result<&ComparisonResult, PairError> {
        let len = self.slices.len();
        for index in [pair.left_index, pair.right_index] {
            if index >= len {
                return Err(PairError::OutOfRange { index, len });
            }
        }
        if pair.left_index == pair.right_index {
            return Err(PairError::SameIndex(pair.left_index));
        }
        let result = compare(
            self.slices[pair.left_index].clone(),
            self.slices[pair.right_index].clone(),
        );
        self.active_pair = Some(pair);
        Ok(self.result.insert(result))
    }

    fn record(&self) -> SessionRecord {
        SessionRecord {
            session_id: self.session_id.clone(),
            log_id: self.log_id.clone(),
            slices: self
                .slices
                .iter()
                .map(|s| SliceRecord {
                    label: s.label.clone(),
                    filter: s.filter.clone(),
                })
                .collect(),
            active_pair: self.active_pair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SliceRecord {
    label: String,
    filter: FilterSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionRecord {
    session_id: String,
    log_id: String,
    slices: Vec<SliceRecord>,
    active_pair: Option<ActivePair>,
}

impl SessionRecord {
    fn restore(self, log: &EventLog) -> Result<ComparisonSession, String> {
        let mut session = ComparisonSession::new(self.session_id, self.log_id);
        for s in self.slices {
            let slice = ModelSlice::build(s.label, s.filter, log).map_err(|e| e.to_string())?;
            session.slices.push(slice);
        }
        if let Some(pair) = self.active_pair {
            session.activate(pair).map_err(|e| e.to_string())?;
        }
        Ok(session)
    }
}

pub type SharedSession = Arc<Mutex<ComparisonSession>>;

pub struct SessionStore {
    path: PathBuf,
    sessions: RwLock<BTreeMap<String, SharedSession>>,
    // Last saved state of every session; the lock also orders file writes.
    records: Mutex<BTreeMap<String, SessionRecord>>,
}

impl SessionStore {
    /// Loads the sessions file under the store root, recomputing every session
    /// against its log. Sessions whose log or filters no longer resolve are dropped.
    pub fn load(logs: &LogStore) -> std::io::Result<Self> {
        let path = logs.root().join(SESSIONS_FILE);
        let saved: Vec<SessionRecord> = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_else(|e| {
                tracing::warn!(error = %e, "ignoring unreadable sessions file");
                Vec::new()
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e),
        };
        let mut sessions = BTreeMap::new();
        let mut records = BTreeMap::new();
        for record in saved {
            let id = record.session_id.clone();
            let Some(log) = logs.get(&record.log_id) else {
                tracing::warn!(session = %id, log_id = %record.log_id, "dropping session of missing log");
                continue;
            };
            match record.clone().restore(&log) {
                Ok(session) => {
                    sessions.insert(id.clone(), Arc::new(Mutex::new(session)));
                    records.insert(id, record);
                }
                Err(e) => tracing::warn!(session = %id, error = %e, "dropping session"),
            }
        }
        Ok(SessionStore {
            path,
            sessions: RwLock::new(sessions),
            records: Mutex::new(records),
        })
    }

    pub fn create(&self, log_id: &str) -> std::io::Result<ComparisonSession> {
        let session = ComparisonSession::new(uuid::Uuid::new_v4().to_string(), log_id.to_owned());
        self.sessions
            .write()
            .expect("session map lock")
            .insert(session.session_id.clone(), Arc::new(Mutex::new(session.clone())));
        self.save(&session)?;
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Option<SharedSession> {
        self.sessions.read().expect("session map lock").get(id).cloned()
    }

    /// Runs `f` on the session under its lock and persists the result.
    /// Returns `None` for an unknown id.
    pub fn update<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut ComparisonSession) -> T,
    ) -> Option<std::io::Result<(T, ComparisonSession)>> {
        let shared = self.get(id)?;
        let (out, snapshot) = {
            let mut session = shared.lock().expect("session lock");
            let out = f(&mut session);
            (out, session.clone())
        };
        Some(self.save(&snapshot).map(|_| (out, snapshot)))
    }

    fn save(&self, session: &ComparisonSession) -> std::io::Result<()> {
        let mut records = self.records.lock().expect("session records lock");
        records.insert(session.session_id.clone(), session.record());
        let all: Vec<&SessionRecord> = records.values().collect();
        let tmp = self.path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(&all).expect("sessions serialize"))?;
        fs::rename(&tmp, &self.path)
    }
}
