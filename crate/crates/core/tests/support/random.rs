use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use cpm_core::event_log::{AttributeValue, Attributes, Event, EventLog, Trace};
use cpm_core::filtering::{FilterSpec, WindowMode};
use cpm_core::Level;

use super::oracle::{RawCase, RawEvent};

pub const WARDS: [&str; 3] = ["ICU", "WARD", "ER"];
pub const RESOURCES: [&str; 4] = ["r0", "r1", "r2", "r3"];

/// 2020-01-01T00:00:00Z in epoch milliseconds.
pub const BASE_MS: i64 = 1_577_836_800_000;
const DAY_MS: i64 = 86_400_000;

/// Random raw cases: at most `max_cases` cases of 1..=`max_events` events over an
/// alphabet of at most `max_alphabet` activities. Timestamps are shuffled and often
/// coarse so ties occur.
pub fn random_cases(rng: &mut impl Rng, max_cases: usize, max_events: usize, max_alphabet: usize) -> Vec<RawCase> {
    let alphabet_size = rng.gen_range(1..=max_alphabet);
    let alphabet: Vec<String> = (0..alphabet_size).map(|i| format!("act_{}", (b'A' + i as u8) as char)).collect();
    let case_count = rng.gen_range(0..=max_cases);
    (0..case_count)
        .map(|c| {
            let start = BASE_MS + rng.gen_range(0..365 * DAY_MS);
            let coarse = rng.gen_bool(0.3);
            let n = rng.gen_range(1..=max_events);
            let events = (0..n)
                .map(|_| {
                    let mut offset = rng.gen_range(0..10 * DAY_MS);
                    if coarse {
                        offset -= offset % 3_600_000;
                    }
                    let mut attrs = vec![(
                        "resource".to_string(),
                        AttributeValue::from(*RESOURCES.choose(rng).unwrap()),
                    )];
                    if rng.gen_bool(0.5) {
                        attrs.push(("cost".to_string(), AttributeValue::Float(rng.gen_range(0..4) as f64 * 2.5)));
                    }
                    RawEvent {
                        activity: alphabet.choose(rng).unwrap().clone(),
                        ts_ms: start + offset,
                        attrs,
                    }
                })
                .collect();
            RawCase {
                id: format!("c{c}"),
                attrs: vec![
                    ("ward".to_string(), AttributeValue::from(*WARDS.choose(rng).unwrap())),
                    ("age".to_string(), AttributeValue::Int(rng.gen_range(20..25))),
                ],
                events,
            }
        })
        .collect()
}

pub fn build_log(cases: &[RawCase]) -> EventLog {
    let traces = cases
        .iter()
        .map(|c| {
            let events = c
                .events
                .iter()
                .map(|e| {
                    let attrs: Attributes = e.attrs.iter().cloned().collect();
                    Event::new(e.activity.clone(), Utc.timestamp_millis_opt(e.ts_ms).unwrap(), attrs).unwrap()
                })
                .collect();
            Trace::new(c.id.clone(), c.attrs.iter().cloned().collect(), events).unwrap()
        })
        .collect();
    EventLog::new("random", traces).unwrap()
}

fn random_values(rng: &mut impl Rng, pool: &[AttributeValue]) -> Vec<AttributeValue> {
    let k = rng.gen_range(1..=pool.len());
    pool.choose_multiple(rng, k).cloned().collect()
}

fn random_clause(rng: &mut impl Rng, spec: FilterSpec) -> FilterSpec {
    match rng.gen_range(0..4) {
        0 => {
            let pool: Vec<AttributeValue> = WARDS.iter().map(|w| (*w).into()).collect();
            let v = random_values(rng, &pool);
            spec.with_clause("ward", Level::Case, v)
        }
        1 => {
            let pool: Vec<AttributeValue> = (20..26).map(AttributeValue::Int).collect();
            let v = random_values(rng, &pool);
            spec.with_clause("age", Level::Case, v)
        }
        2 => {
            let pool: Vec<AttributeValue> = RESOURCES.iter().map(|r| (*r).into()).collect();
            let v = random_values(rng, &pool);
            spec.with_clause("resource", Level::Event, v)
        }
        _ => {
            // Integers against float-valued attributes exercise numeric matching.
            let pool: Vec<AttributeValue> = vec![
                AttributeValue::Int(0),
                AttributeValue::Float(2.5),
                AttributeValue::Int(5),
                AttributeValue::Float(7.5),
            ];
            let v = random_values(rng, &pool);
            spec.with_clause("cost", Level::Event, v)
        }
    }
}

/// Random spec whose clause keys exist in `log`.
pub fn random_filter(rng: &mut impl Rng, log: &EventLog) -> FilterSpec {
    let mut spec = FilterSpec::default();
    for _ in 0..rng.gen_range(0..=2) {
        spec = random_clause(rng, spec);
    }
    spec.attribute_clauses.retain(|c| log.schema_entry(c.level, &c.key).is_some());
    if rng.gen_bool(0.7) {
        let a = BASE_MS + rng.gen_range(0..380 * DAY_MS);
        let b = a + rng.gen_range(1..120 * DAY_MS);
        let mode = if rng.gen_bool(0.5) {
            WindowMode::Contained
        } else {
            WindowMode::Intersecting
        };
        spec.time_window = Some(cpm_core::filtering::TimeWindow {
            start: Utc.timestamp_millis_opt(a).unwrap(),
            end: Utc.timestamp_millis_opt(b).unwrap(),
            mode,
        });
    }
    spec
}

/// `spec` plus one more random clause valid for `log`, if one can be found.
pub fn extend_filter(rng: &mut impl Rng, log: &EventLog, spec: &FilterSpec) -> Option<FilterSpec> {
    for _ in 0..8 {
        let extended = random_clause(rng, spec.clone());
        let added = extended.attribute_clauses.last().unwrap();
        if log.schema_entry(added.level, &added.key).is_some() {
            return Some(extended);
        }
    }
    None
}
