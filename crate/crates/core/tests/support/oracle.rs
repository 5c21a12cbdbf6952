use std::collections::{BTreeMap, BTreeSet};

use cpm_core::event_log::{AttributeValue, EventLog};
use cpm_core::filtering::{FilterSpec, WindowMode};

/// One event in raw form: activity and epoch milliseconds, in ingestion order.
#[derive(Debug, Clone)]
pub struct RawEvent {
    pub activity: String,
    pub ts_ms: i64,
    pub attrs: Vec<(String, AttributeValue)>,
}

#[derive(Debug, Clone)]
pub struct RawCase {
    pub id: String,
    pub attrs: Vec<(String, AttributeValue)>,
    pub events: Vec<RawEvent>,
}

/// Extracts raw cases from a log.
pub fn raw_cases(log: &EventLog) -> Vec<RawCase> {
    log.traces()
        .iter()
        .map(|t| RawCase {
            id: t.case_id().to_owned(),
            attrs: t.attributes().iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            events: t
                .events()
                .iter()
                .map(|e| RawEvent {
                    activity: e.activity().to_owned(),
                    ts_ms: e.timestamp().timestamp_millis(),
                    attrs: e.attributes().iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                })
                .collect(),
        })
        .collect()
}

/// Events of a case ordered by timestamp, ties kept in ingestion order (insertion sort).
pub fn ordered(case: &RawCase) -> Vec<RawEvent> {
    let mut out: Vec<RawEvent> = Vec::new();
    for e in &case.events {
        let mut pos = out.len();
        while pos > 0 && out[pos - 1].ts_ms > e.ts_ms {
            pos -= 1;
        }
        out.insert(pos, e.clone());
    }
    out
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OracleDfg {
    pub nodes: BTreeMap<String, usize>,
    pub edges: BTreeMap<(String, String), usize>,
    pub edge_samples_ms: BTreeMap<(String, String), Vec<i64>>,
    pub starts: BTreeMap<String, usize>,
    pub ends: BTreeMap<String, usize>,
}

impl OracleDfg {
    pub fn edge_mean_s(&self, edge: &(String, String)) -> f64 {
        let s = &self.edge_samples_ms[edge];
        let mut total = 0i64;
        for x in s {
            total += x;
        }
        total as f64 / s.len() as f64 / 1000.0
    }

    pub fn node_set(&self) -> BTreeSet<String> {
        self.nodes.keys().cloned().collect()
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges.keys().cloned().collect()
    }
}

/// Consecutive-pair counter.
pub fn dfg_oracle(cases: &[RawCase]) -> OracleDfg {
    let mut out = OracleDfg::default();
    for case in cases {
        let events = ordered(case);
        for e in &events {
            *out.nodes.entry(e.activity.clone()).or_insert(0) += 1;
        }
        for i in 0..events.len().saturating_sub(1) {
            let key = (events[i].activity.clone(), events[i + 1].activity.clone());
            *out.edges.entry(key.clone()).or_insert(0) += 1;
            out.edge_samples_ms
                .entry(key)
                .or_default()
                .push(events[i + 1].ts_ms - events[i].ts_ms);
        }
        if let Some(first) = events.first() {
            *out.starts.entry(first.activity.clone()).or_insert(0) += 1;
        }
        if let Some(last) = events.last() {
            *out.ends.entry(last.activity.clone()).or_insert(0) += 1;
        }
    }
    out
}

fn loosely_equal(a: &AttributeValue, b: &AttributeValue) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a.to_string() == b.to_string() && a.value_type() == b.value_type(),
    }
}

/// Per-trace predicate scan of a filter specification.
pub fn filter_oracle(cases: &[RawCase], spec: &FilterSpec) -> BTreeSet<String> {
    let mut kept = BTreeSet::new();
    'cases: for case in cases {
        for clause in &spec.attribute_clauses {
            let mut hit = false;
            match clause.level {
                cpm_core::Level::Case => {
                    for (k, v) in &case.attrs {
                        if *k == clause.key && clause.allowed_values.iter().any(|a| loosely_equal(v, a)) {
                            hit = true;
                        }
                    }
                }
                cpm_core::Level::Event => {
                    for e in &case.events {
                        for (k, v) in &e.attrs {
                            if *k == clause.key && clause.allowed_values.iter().any(|a| loosely_equal(v, a)) {
                                hit = true;
                            }
                        }
                    }
                }
            }
            if !hit {
                continue 'cases;
            }
        }
        if let Some(w) = &spec.time_window {
            let (start, end) = (w.start.timestamp_millis(), w.end.timestamp_millis());
            let inside: Vec<bool> = case.events.iter().map(|e| start <= e.ts_ms && e.ts_ms < end).collect();
            let ok = match w.mode {
                WindowMode::Intersecting => inside.iter().any(|b| *b),
                WindowMode::Contained => {
                    let min = case.events.iter().map(|e| e.ts_ms).min().unwrap();
                    let max = case.events.iter().map(|e| e.ts_ms).max().unwrap();
                    start <= min && max < end
                }
            };
            if !ok {
                continue;
            }
        }
        kept.insert(case.id.clone());
    }
    kept
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub case_count: usize,
    pub variant_count: usize,
    pub event_count: usize,
    pub avg_case_duration_s: f64,
}

pub fn stats_oracle(cases: &[RawCase]) -> OracleStats {
    let mut variants: Vec<Vec<String>> = Vec::new();
    let mut events = 0;
    let mut total_ms = 0i64;
    for case in cases {
        let ordered = ordered(case);
        let seq: Vec<String> = ordered.iter().map(|e| e.activity.clone()).collect();
        if !variants.contains(&seq) {
            variants.push(seq);
        }
        events += case.events.len();
        let min = case.events.iter().map(|e| e.ts_ms).min().unwrap();
        let max = case.events.iter().map(|e| e.ts_ms).max().unwrap();
        total_ms += max - min;
    }
    OracleStats {
        case_count: cases.len(),
        variant_count: variants.len(),
        event_count: events,
        avg_case_duration_s: if cases.is_empty() {
            0.0
        } else {
            total_ms as f64 / cases.len() as f64 / 1000.0
        },
    }
}

/// Set differences between two brute-force DFGs: (unique left, unique right, common).
pub fn diff_oracle(
    left: &OracleDfg,
    right: &OracleDfg,
) -> (BTreeSet<String>, BTreeSet<String>, BTreeSet<String>) {
    let mut ul = BTreeSet::new();
    let mut ur = BTreeSet::new();
    let mut common = BTreeSet::new();
    for a in left.nodes.keys() {
        if right.nodes.contains_key(a) {
            common.insert(a.clone());
        } else {
            ul.insert(a.clone());
        }
    }
    for a in right.nodes.keys() {
        if !left.nodes.contains_key(a) {
            ur.insert(a.clone());
        }
    }
    (ul, ur, common)
}

type EdgeSet = BTreeSet<(String, String)>;

pub fn edge_diff_oracle(left: &OracleDfg, right: &OracleDfg) -> (EdgeSet, EdgeSet) {
    let ul = left.edges.keys().filter(|e| !right.edges.contains_key(*e)).cloned().collect();
    let ur = right.edges.keys().filter(|e| !left.edges.contains_key(*e)).cloned().collect();
    (ul, ur)
}
