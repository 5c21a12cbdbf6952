//! Declarative slicing of an event log.
//!
//! A [`FilterSpec`] is a conjunction of attribute clauses and an optional half-open time
//! window `[start, end)`. Filters retain or drop whole traces; events are never removed
//! from a kept trace, so the directly-follows relation of a slice only contains pairs
//! that actually occurred.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::{AttributeValue, EventLog, Level, Trace, ValueType};

/// Maximum number of distinct values reported per key by [`describe_filter_options`].
pub const MAX_OPTION_VALUES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("clause {clause} ({key}): allowed_values must not be empty")]
    EmptyAllowedValues { clause: usize, key: String },
    #[error("time window start {start} is not before end {end}")]
    EmptyWindow { start: String, end: String },
    #[error("clause {clause}: unknown {level} attribute `{key}`")]
    UnknownAttribute {
        clause: usize,
        key: String,
        level: Level,
    },
    #[error("clause {clause}: attribute `{key}` exists at {actual} level, not {declared}")]
    LevelMismatch {
        clause: usize,
        key: String,
        declared: Level,
        actual: Level,
    },
}

impl FilterError {
    pub fn code(&self) -> &'static str {
        "filter_validation_error"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// First and last event of the trace fall inside the window.
    Contained,
    /// At least one event of the trace falls inside the window.
    #[default]
    Intersecting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    #[serde(default)]
    pub mode: WindowMode,
}

impl TimeWindow {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    fn keeps(&self, trace: &Trace) -> bool {
        match self.mode {
            WindowMode::Contained => {
                self.contains(trace.first_timestamp()) && self.contains(trace.last_timestamp())
            }
            WindowMode::Intersecting => trace.events().iter().any(|e| self.contains(e.timestamp())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeClause {
    pub key: String,
    pub level: Level,
    pub allowed_values: BTreeSet<AttributeValue>,
}

impl AttributeClause {
    fn allows(&self, value: &AttributeValue) -> bool {
        self.allowed_values.iter().any(|a| value.matches(a))
    }

    fn keeps(&self, trace: &Trace) -> bool {
        match self.level {
            Level::Case => trace.attributes().get(&self.key).is_some_and(|v| self.allows(v)),
            Level::Event => trace
                .events()
                .iter()
                .any(|e| e.attributes().get(&self.key).is_some_and(|v| self.allows(v))),
        }
    }
}

/// Conjunctive slice definition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default)]
    pub attribute_clauses: Vec<AttributeClause>,
    #[serde(default)]
    pub time_window: Option<TimeWindow>,
}

impl FilterSpec {
    pub fn window(start: DateTime<Utc>, end: DateTime<Utc>, mode: WindowMode) -> Self {
        FilterSpec {
            attribute_clauses: Vec::new(),
            time_window: Some(TimeWindow { start, end, mode }),
        }
    }

    pub fn with_clause(
        mut self,
        key: impl Into<String>,
        level: Level,
        values: impl IntoIterator<Item = AttributeValue>,
    ) -> Self {
        self.attribute_clauses.push(AttributeClause {
            key: key.into(),
            level,
            allowed_values: values.into_iter().collect(),
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.attribute_clauses.is_empty() && self.time_window.is_none()
    }

    /// Checks the spec's own invariants, independent of any log.
    pub fn validate(&self) -> Result<(), FilterError> {
        for (i, clause) in self.attribute_clauses.iter().enumerate() {
            if clause.allowed_values.is_empty() {
                return Err(FilterError::EmptyAllowedValues {
                    clause: i,
                    key: clause.key.clone(),
                });
            }
        }
        if let Some(w) = &self.time_window {
            if w.start >= w.end {
                return Err(FilterError::EmptyWindow {
                    start: w.start.to_rfc3339(),
                    end: w.end.to_rfc3339(),
                });
            }
        }
        Ok(())
    }

    /// Checks clause keys against the log's schema. An empty log has no schema to check
    /// against and accepts any clause, which keeps filtering idempotent on empty results.
    pub fn validate_for(&self, log: &EventLog) -> Result<(), FilterError> {
        self.validate()?;
        if log.is_empty() {
            return Ok(());
        }
        for (i, clause) in self.attribute_clauses.iter().enumerate() {
            if log.schema_entry(clause.level, &clause.key).is_some() {
                continue;
            }
            let other = match clause.level {
                Level::Case => Level::Event,
                Level::Event => Level::Case,
            };
            return Err(if log.schema_entry(other, &clause.key).is_some() {
                FilterError::LevelMismatch {
                    clause: i,
                    key: clause.key.clone(),
                    declared: clause.level,
                    actual: other,
                }
            } else {
                FilterError::UnknownAttribute {
                    clause: i,
                    key: clause.key.clone(),
                    level: clause.level,
                }
            });
        }
        Ok(())
    }

    /// Whether a single trace satisfies every clause and the window.
    pub fn keeps(&self, trace: &Trace) -> bool {
        self.attribute_clauses.iter().all(|c| c.keeps(trace))
            && self.time_window.as_ref().is_none_or(|w| w.keeps(trace))
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("all cases");
        }
        let mut parts = Vec::new();
        for c in &self.attribute_clauses {
            let values: Vec<String> = c.allowed_values.iter().map(|v| v.to_string()).collect();
            parts.push(format!("{} {} in {{{}}}", c.level, c.key, values.join(", ")));
        }
        if let Some(w) = &self.time_window {
            let mode = match w.mode {
                WindowMode::Contained => "contained",
                WindowMode::Intersecting => "intersecting",
            };
            parts.push(format!(
                "time in [{}, {}) {mode}",
                w.start.to_rfc3339_opts(SecondsFormat::Secs, true),
                w.end.to_rfc3339_opts(SecondsFormat::Secs, true)
            ));
        }
        f.write_str(&parts.join(" and "))
    }
}

/// Keeps the traces of `log` satisfying `spec`, copied unchanged and in their original
/// order.
pub fn apply_filter(log: &EventLog, spec: &FilterSpec) -> Result<EventLog, FilterError> {
    spec.validate_for(log)?;
    if spec.is_empty() {
        return Ok(log.clone());
    }
    let kept = log
        .traces()
        .iter()
        .filter(|t| spec.keeps(t))
        .cloned()
        .collect();
    Ok(EventLog::from_valid_traces(log.name().to_owned(), kept))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueCount {
    pub value: AttributeValue,
    pub count: usize,
}

/// Filter menu entry for one attribute key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeOptions {
    pub key: String,
    pub level: Level,
    pub value_type: ValueType,
    /// Most frequent values first, ties broken by value; at most [`MAX_OPTION_VALUES`].
    pub values: Vec<ValueCount>,
    pub distinct_count: usize,
    pub truncated: bool,
    pub min: Option<AttributeValue>,
    pub max: Option<AttributeValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeRange {
    pub min: DateTime<Utc>,
    pub max: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOptions {
    pub attributes: Vec<AttributeOptions>,
    /// Range of event timestamps; absent for an empty log.
    pub time_range: Option<TimeRange>,
}

fn ordered_extreme(
    counts: &BTreeMap<&AttributeValue, usize>,
    pick_max: bool,
) -> Option<AttributeValue> {
    let key = |v: &&&AttributeValue| match v {
        AttributeValue::Instant(t) => t.timestamp_millis() as f64,
        other => other.as_f64().unwrap_or(f64::NAN),
    };
    let iter = counts.keys().filter(|v| !key(v).is_nan());
    let best = if pick_max {
        iter.max_by(|a, b| key(a).total_cmp(&key(b)))
    } else {
        iter.min_by(|a, b| key(a).total_cmp(&key(b)))
    };
    best.map(|v| (*v).clone())
}

/// Lists every attribute key with its level, type and most frequent values.
pub fn describe_filter_options(log: &EventLog) -> FilterOptions {
    let mut attributes = Vec::with_capacity(log.schema().len());
    for ((level, key), entry) in log.schema() {
        let mut counts: BTreeMap<&AttributeValue, usize> = BTreeMap::new();
        let carriers: Box<dyn Iterator<Item = &crate::event_log::Attributes>> = match level {
            Level::Case => Box::new(log.traces().iter().map(|t| t.attributes())),
            Level::Event => Box::new(log.events().map(|e| e.attributes())),
        };
        for v in carriers.filter_map(|attrs| attrs.get(key)) {
            *counts.entry(v).or_default() += 1;
        }
        let (min, max) = if entry.value_type.is_ordered() {
            (ordered_extreme(&counts, false), ordered_extreme(&counts, true))
        } else {
            (None, None)
        };
        let mut values: Vec<ValueCount> = counts
            .iter()
            .map(|(v, c)| ValueCount {
                value: (*v).clone(),
                count: *c,
            })
            .collect();
        values.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
        let distinct_count = values.len();
        values.truncate(MAX_OPTION_VALUES);
        attributes.push(AttributeOptions {
            key: key.clone(),
            level: *level,
            value_type: entry.value_type,
            values,
            distinct_count,
            truncated: distinct_count > MAX_OPTION_VALUES,
            min,
            max,
        });
    }
    let time_range = log
        .events()
        .map(|e| e.timestamp())
        .fold(None, |acc: Option<TimeRange>, t| {
            Some(match acc {
                None => TimeRange { min: t, max: t },
                Some(r) => TimeRange {
                    min: r.min.min(t),
                    max: r.max.max(t),
                },
            })
        });
    FilterOptions {
        attributes,
        time_range,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::{Attributes, Event};
    use chrono::TimeZone;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(secs, 0).unwrap()
    }

    fn trace(id: &str, ward: &str, times: &[i64]) -> Trace {
        let mut attrs = Attributes::new();
        attrs.insert("ward".into(), ward.into());
        let events = times
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut ea = Attributes::new();
                ea.insert("resource".into(), format!("r{i}").into());
                Event::new("A", at(*t), ea).unwrap()
            })
            .collect();
        Trace::new(id, attrs, events).unwrap()
    }

    fn log() -> EventLog {
        EventLog::new(
            "l",
            vec![
                trace("1", "ICU", &[0, 10]),
                trace("2", "ICU", &[20, 30]),
                trace("3", "WARD", &[5, 25]),
            ],
        )
        .unwrap()
    }

    fn ids(log: &EventLog) -> Vec<&str> {
        log.traces().iter().map(|t| t.case_id()).collect()
    }

    #[test]
    fn case_clause_keeps_matching_traces() {
        let spec = FilterSpec::default().with_clause("ward", Level::Case, ["ICU".into()]);
        let out = apply_filter(&log(), &spec).unwrap();
        assert_eq!(ids(&out), ["1", "2"]);
    }

    #[test]
    fn empty_spec_is_identity() {
        let l = log();
        assert_eq!(apply_filter(&l, &FilterSpec::default()).unwrap(), l);
    }

    #[test]
    fn event_clause_retains_whole_trace() {
        let spec = FilterSpec::default().with_clause("resource", Level::Event, ["r1".into()]);
        let out = apply_filter(&log(), &spec).unwrap();
        assert_eq!(out.event_count(), 6);
    }

    #[test]
    fn window_modes_are_half_open() {
        let l = log();
        let contained = FilterSpec::window(at(0), at(25), WindowMode::Contained);
        assert_eq!(ids(&apply_filter(&l, &contained).unwrap()), ["1"]);
        let intersecting = FilterSpec::window(at(11), at(20), WindowMode::Intersecting);
        assert!(apply_filter(&l, &intersecting).unwrap().is_empty());
        let intersecting = FilterSpec::window(at(11), at(21), WindowMode::Intersecting);
        assert_eq!(ids(&apply_filter(&l, &intersecting).unwrap()), ["2"]);
    }

    #[test]
    fn validation_errors_name_the_clause() {
        let l = log();
        let unknown = FilterSpec::default().with_clause("age", Level::Case, [1i64.into()]);
        assert!(matches!(
            apply_filter(&l, &unknown),
            Err(FilterError::UnknownAttribute { clause: 0, .. })
        ));
        let wrong_level = FilterSpec::default().with_clause("ward", Level::Event, ["ICU".into()]);
        assert!(matches!(
            apply_filter(&l, &wrong_level),
            Err(FilterError::LevelMismatch { .. })
        ));
        let empty_values = FilterSpec::default().with_clause("ward", Level::Case, []);
        assert!(matches!(
            apply_filter(&l, &empty_values),
            Err(FilterError::EmptyAllowedValues { .. })
        ));
        let backwards = FilterSpec::window(at(5), at(5), WindowMode::Contained);
        assert!(matches!(backwards.validate(), Err(FilterError::EmptyWindow { .. })));
    }

    #[test]
    fn filter_spec_json_form() {
        let json = r#"{"attribute_clauses":[{"key":"ward","level":"case","allowed_values":["ICU"]}],
                       "time_window":{"start":"2020-03-01T00:00:00Z","end":"2020-06-01T00:00:00Z","mode":"contained"}}"#;
        let spec: FilterSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.time_window.as_ref().unwrap().mode, WindowMode::Contained);
        let back: FilterSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let defaulted: FilterSpec = serde_json::from_str(
            r#"{"time_window":{"start":"2020-03-01T00:00:00Z","end":"2020-06-01T00:00:00Z"}}"#,
        )
        .unwrap();
        assert_eq!(defaulted.time_window.unwrap().mode, WindowMode::Intersecting);
    }

    #[test]
    fn options_report_counts_and_ranges() {
        let opts = describe_filter_options(&log());
        let ward = opts.attributes.iter().find(|a| a.key == "ward").unwrap();
        assert_eq!(ward.level, Level::Case);
        assert_eq!(ward.value_type, ValueType::String);
        assert_eq!(ward.values[0], ValueCount { value: "ICU".into(), count: 2 });
        assert_eq!(ward.values[1], ValueCount { value: "WARD".into(), count: 1 });
        assert!(ward.min.is_none());
        assert_eq!(opts.time_range.unwrap(), TimeRange { min: at(0), max: at(30) });
    }

    #[test]
    fn options_cap_distinct_values() {
        let traces = (0..10_000)
            .map(|i| {
                let mut attrs = Attributes::new();
                attrs.insert("n".into(), AttributeValue::Int(i));
                Trace::new(i.to_string(), attrs, vec![Event::new("A", at(i), Attributes::new()).unwrap()])
                    .unwrap()
            })
            .collect();
        let opts = describe_filter_options(&EventLog::new("l", traces).unwrap());
        let n = &opts.attributes[0];
        assert_eq!(n.values.len(), MAX_OPTION_VALUES);
        assert!(n.truncated);
        assert_eq!(n.distinct_count, 10_000);
        assert_eq!(n.min, Some(AttributeValue::Int(0)));
        assert_eq!(n.max, Some(AttributeValue::Int(9_999)));
    }
}
