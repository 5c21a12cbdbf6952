//! Event-log data model and codecs.
//!
//! An [`EventLog`] is immutable once built: every constructor validates the log
//! invariants (distinct case ids, non-empty traces, non-empty activities) and sorts the
//! events of each trace by timestamp with a stable sort, so equal timestamps keep their
//! ingestion order.

mod error;
mod statistics;
mod tabular;
mod value;
mod xes;

use std::collections::BTreeMap;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

pub use error::LogError;
pub use statistics::{log_statistics, variants, LogStatistics, Variants};
pub use tabular::{parse_csv, CsvMapping};
pub use value::{AttributeValue, ValueType};
pub use xes::{parse_xes, write_xes, xes_string};

/// Attribute map attached to traces and events. Ordered so that serializations are
/// deterministic.
pub type Attributes = BTreeMap<String, AttributeValue>;

/// Number of distinct values kept per key in [`SchemaEntry::sample`].
pub const SCHEMA_SAMPLE_SIZE: usize = 20;

/// Whether an attribute lives on the case (trace) or on individual events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Case,
    Event,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::Case => "case",
            Level::Event => "event",
        })
    }
}

/// Truncates an instant to millisecond precision.
pub fn to_millis(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.duration_trunc(TimeDelta::milliseconds(1)).unwrap_or(ts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    activity: String,
    timestamp: DateTime<Utc>,
    attributes: Attributes,
}

impl Event {
    pub fn new(
        activity: impl Into<String>,
        timestamp: DateTime<Utc>,
        attributes: Attributes,
    ) -> Result<Self, LogError> {
        let activity = activity.into();
        if activity.is_empty() {
            return Err(LogError::EmptyActivity);
        }
        Ok(Event {
            activity,
            timestamp: to_millis(timestamp),
            attributes,
        })
    }

    pub fn activity(&self) -> &str {
        &self.activity
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    pub fn attributes(&self) -> &Attributes {
        &self.attributes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    case_id: String,
    attributes: Attributes,
    events: Vec<Event>,
}

impl Trace {
    /// Builds a trace, stably sorting `events` by timestamp.
    pub fn new(
        case_id: impl Into<String>,
        attributes: Attributes,
        mut events: Vec<Event>,
    ) -> Result<Self, LogError> {
        let case_id = case_id.into();
        if events.is_empty() {
            return Err(LogError::EmptyTrace { case_id });
        }
        events.sort_by_key(|e| e.timestamp);
        Ok(Trace {
            case_id,
            attributes,
            events,
        })
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn attributes(&self) -> &Attributes {
        &self.attributes
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    pub fn first_timestamp(&self) -> DateTime<Utc> {
        self.events[0].timestamp
    }

    pub fn last_timestamp(&self) -> DateTime<Utc> {
        self.events[self.events.len() - 1].timestamp
    }

    /// Running time of the case in milliseconds.
    pub fn duration_ms(&self) -> i64 {
        (self.last_timestamp() - self.first_timestamp()).num_milliseconds()
    }
}

/// Schema information about one attribute key at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaEntry {
    pub value_type: ValueType,
    /// Up to [`SCHEMA_SAMPLE_SIZE`] distinct values in first-seen order.
    pub sample: Vec<AttributeValue>,
}

/// Attribute keys observed in a log, keyed by level and name.
pub type AttributeSchema = BTreeMap<(Level, String), SchemaEntry>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    name: String,
    traces: Vec<Trace>,
    schema: AttributeSchema,
}

impl EventLog {
    pub fn new(name: impl Into<String>, traces: Vec<Trace>) -> Result<Self, LogError> {
        let mut seen = std::collections::HashSet::with_capacity(traces.len());
        for trace in &traces {
            if !seen.insert(trace.case_id.as_str()) {
                return Err(LogError::DuplicateCaseId(trace.case_id.clone()));
            }
        }
        Ok(Self::from_valid_traces(name.into(), traces))
    }

    /// Builds a log from traces already known to satisfy the log invariants, such as a
    /// subset of another log's traces.
    pub(crate) fn from_valid_traces(name: String, traces: Vec<Trace>) -> Self {
        let schema = build_schema(&traces);
        EventLog {
            name,
            traces,
            schema,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::from_valid_traces(name.into(), Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn schema_entry(&self, level: Level, key: &str) -> Option<&SchemaEntry> {
        self.schema.get(&(level, key.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.traces.iter().flat_map(|t| t.events.iter())
    }
}

fn build_schema(traces: &[Trace]) -> AttributeSchema {
    let mut schema = AttributeSchema::new();
    let mut observe = |level: Level, attrs: &Attributes| {
        for (key, value) in attrs {
            let entry = schema
                .entry((level, key.clone()))
                .or_insert_with(|| SchemaEntry {
                    value_type: value.value_type(),
                    sample: Vec::new(),
                });
            entry.value_type = entry.value_type.merge(value.value_type());
            if entry.sample.len() < SCHEMA_SAMPLE_SIZE && !entry.sample.contains(value) {
                entry.sample.push(value.clone());
            }
        }
    };
    for trace in traces {
        observe(Level::Case, &trace.attributes);
        for event in &trace.events {
            observe(Level::Event, &event.attributes);
        }
    }
    schema
}
