//! CSV ingestion: one event per row, grouped into traces by a case column.

use std::collections::HashMap;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::xes::parse_timestamp;
use super::{AttributeValue, Attributes, Event, EventLog, LogError, Trace};

/// Which CSV columns carry the case id, activity and timestamp.
///
/// `timestamp_format` is a strftime-style pattern. An empty pattern (the default)
/// accepts RFC 3339 / ISO 8601 instants. Patterns without an offset are read as UTC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvMapping {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: String,
    #[serde(default)]
    pub timestamp_format: String,
}

impl Default for CsvMapping {
    /// Column names used by common process-mining exports.
    fn default() -> Self {
        CsvMapping {
            case_column: "case:concept:name".into(),
            activity_column: "concept:name".into(),
            timestamp_column: "time:timestamp".into(),
            timestamp_format: String::new(),
        }
    }
}

fn parse_with_format(value: &str, format: &str) -> Option<DateTime<Utc>> {
    let value = value.trim();
    if format.is_empty() {
        return parse_timestamp(value);
    }
    if let Ok(t) = DateTime::parse_from_str(value, format) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(value, format) {
        return Some(t.and_utc());
    }
    NaiveDate::parse_from_str(value, format)
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc())
}

#[derive(Clone, Copy, PartialEq)]
enum ColumnKind {
    Int,
    Float,
    Boolean,
    Text,
}

fn infer_kind<'a>(values: impl Iterator<Item = &'a str>) -> ColumnKind {
    let mut kind = ColumnKind::Int;
    for v in values.filter(|v| !v.is_empty()) {
        kind = match kind {
            ColumnKind::Int if v.parse::<i64>().is_ok() => ColumnKind::Int,
            ColumnKind::Int | ColumnKind::Float if v.parse::<f64>().is_ok() => ColumnKind::Float,
            ColumnKind::Int | ColumnKind::Boolean if matches!(v, "true" | "false") => {
                ColumnKind::Boolean
            }
            _ => return ColumnKind::Text,
        };
    }
    kind
}

fn typed(kind: ColumnKind, v: &str) -> AttributeValue {
    match kind {
        ColumnKind::Int => AttributeValue::Int(v.parse().expect("inferred int")),
        ColumnKind::Float => AttributeValue::Float(v.parse().expect("inferred float")),
        ColumnKind::Boolean => AttributeValue::Boolean(v == "true"),
        ColumnKind::Text => AttributeValue::String(v.to_owned()),
    }
}

/// Parses a CSV event table. Row numbers in errors count data rows from 1, so the first
/// row after the header is row 1.
pub fn parse_csv(input: impl Read, mapping: &CsvMapping) -> Result<EventLog, LogError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_owned()))
    };
    let case_col = column(&mapping.case_column)?;
    let activity_col = column(&mapping.activity_column)?;
    let ts_col = column(&mapping.timestamp_column)?;

    let rows = reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| LogError::CsvRow {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let extra: Vec<(usize, ColumnKind)> = (0..headers.len())
        .filter(|c| ![case_col, activity_col, ts_col].contains(c))
        .map(|c| (c, infer_kind(rows.iter().map(|r| r.get(c).unwrap_or("")))))
        .collect();

    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<Event>> = HashMap::new();
    for (i, record) in rows.iter().enumerate() {
        let row = i + 1;
        let field = |c: usize| record.get(c).unwrap_or("");
        let case_id = field(case_col);
        if case_id.is_empty() {
            return Err(LogError::CsvRow {
                row,
                message: format!("empty case id in column `{}`", mapping.case_column),
            });
        }
        let activity = field(activity_col);
        if activity.is_empty() {
            return Err(LogError::CsvRow {
                row,
                message: format!("empty activity in column `{}`", mapping.activity_column),
            });
        }
        let timestamp = parse_with_format(field(ts_col), &mapping.timestamp_format).ok_or_else(
            || LogError::CsvTimestamp {
                row,
                value: field(ts_col).to_owned(),
                format: mapping.timestamp_format.clone(),
            },
        )?;
        let mut attributes = Attributes::new();
        for &(c, kind) in &extra {
            let v = field(c);
            if !v.is_empty() {
                attributes.insert(headers[c].to_owned(), typed(kind, v));
            }
        }
        let event = Event::new(activity, timestamp, attributes)?;
        grouped
            .entry(case_id.to_owned())
            .or_insert_with(|| {
                order.push(case_id.to_owned());
                Vec::new()
            })
            .push(event);
    }

    let traces = order
        .into_iter()
        .map(|case_id| {
            let events = grouped.remove(&case_id).unwrap_or_default();
            Trace::new(case_id, Attributes::new(), events)
        })
        .collect::<Result<Vec<_>, _>>()?;
    EventLog::new("", traces)
}
