//! Deterministic synthetic hospital log used for demos and tests.
//!
//! Cases alternate between two eras. First-era cases start in January to May 2020 and
//! may receive invasive ventilation. Second-era cases start in July to November 2020 and
//! use non-invasive ventilation and antiviral therapy instead. No case lasts longer than
//! three weeks, so every case lies entirely inside the half year it started in and a split
//! at [`ERA_BOUNDARY`] yields activities unique to each side.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::event_log::{AttributeValue, Attributes, Event, EventLog, Trace};

pub const ADMISSION: &str = "Admission";
pub const PCR_TEST: &str = "PCR Test";
pub const BLOOD_TEST: &str = "Blood Test";
pub const X_RAY: &str = "Chest X-Ray";
pub const ICU_TRANSFER: &str = "ICU Transfer";
pub const INVASIVE_VENTILATION: &str = "Invasive Ventilation";
pub const NON_INVASIVE_VENTILATION: &str = "Non-Invasive Ventilation";
pub const ANTIVIRAL_THERAPY: &str = "Antiviral Therapy";
pub const WARD_TRANSFER: &str = "Ward Transfer";
pub const DISCHARGE: &str = "Discharge";
pub const DECEASED: &str = "Deceased";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DemoError {
    #[error("case_count must be at least 1, got {0}")]
    NoCases(usize),
}

impl DemoError {
    pub fn code(&self) -> &'static str {
        "validation_error"
    }
}

/// Start of the first era.
pub fn first_era_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap()
}

/// Split point between the two eras.
pub const ERA_BOUNDARY: (i32, u32, u32) = (2020, 7, 1);

pub fn era_boundary() -> DateTime<Utc> {
    let (y, m, d) = ERA_BOUNDARY;
    Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
}

/// End of the second era.
pub fn second_era_end() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap()
}

struct CaseBuilder<'r> {
    rng: &'r mut ChaCha8Rng,
    now: DateTime<Utc>,
    events: Vec<Event>,
}

impl CaseBuilder<'_> {
    /// Appends `activity` after a random gap of `min_minutes..max_minutes`.
    fn step(&mut self, activity: &str, min_minutes: i64, max_minutes: i64) {
        let ms = self.rng.gen_range(min_minutes * 60_000..=max_minutes * 60_000);
        self.now += Duration::milliseconds(ms);
        self.push(activity);
    }

    /// Appends `activity` at the same instant as the previous event.
    fn same_time(&mut self, activity: &str) {
        self.push(activity);
    }

    fn push(&mut self, activity: &str) {
        let resource = match activity {
            PCR_TEST | BLOOD_TEST => "Lab",
            X_RAY => "Radiology",
            ADMISSION | DISCHARGE | WARD_TRANSFER => "Nurse",
            _ => "Physician",
        };
        let mut attrs = Attributes::new();
        attrs.insert("resource".into(), resource.into());
        self.events
            .push(Event::new(activity, self.now, attrs).expect("non-empty activity"));
    }
}

/// Generates `case_count` cases; identical inputs give identical logs.
pub fn generate_demo_log(seed: u64, case_count: usize) -> Result<EventLog, DemoError> {
    if case_count < 1 {
        return Err(DemoError::NoCases(case_count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let era_span_ms = |start: DateTime<Utc>| (start + Duration::days(152) - start).num_milliseconds();
    let mut traces = Vec::with_capacity(case_count);
    for i in 0..case_count {
        let second_era = i % 2 == 1;
        let era_start = if second_era { era_boundary() } else { first_era_start() };
        let start = era_start + Duration::milliseconds(rng.gen_range(0..era_span_ms(era_start)));
        // The first case of each era always takes the severe path so both eras are
        // guaranteed to show their era-specific activities.
        let severe = i < 2 || rng.gen_bool(0.35);

        let mut case = CaseBuilder {
            rng: &mut rng,
            now: start,
            events: Vec::new(),
        };
        case.push(ADMISSION);
        case.step(PCR_TEST, 10, 240);
        if case.rng.gen_bool(0.6) {
            case.step(BLOOD_TEST, 20, 600);
            if case.rng.gen_bool(0.2) {
                case.step(BLOOD_TEST, 600, 2880);
            }
        }
        if case.rng.gen_bool(0.5) {
            if case.rng.gen_bool(0.15) {
                case.same_time(X_RAY);
            } else {
                case.step(X_RAY, 30, 720);
            }
        }
        if second_era && (i < 2 || case.rng.gen_bool(0.5)) {
            case.step(ANTIVIRAL_THERAPY, 60, 1440);
        }
        if severe {
            case.step(ICU_TRANSFER, 60, 2880);
            let ventilated = i < 2 || case.rng.gen_bool(0.7);
            if ventilated {
                let ventilation = if second_era {
                    NON_INVASIVE_VENTILATION
                } else {
                    INVASIVE_VENTILATION
                };
                case.step(ventilation, 30, 720);
            }
            if case.rng.gen_bool(0.6) {
                case.step(WARD_TRANSFER, 1440, 2880);
            }
        } else if case.rng.gen_bool(0.4) {
            case.step(WARD_TRANSFER, 120, 1440);
        }
        let death_rate = if severe { 0.3 } else { 0.03 };
        let outcome = if case.rng.gen_bool(death_rate) { DECEASED } else { DISCHARGE };
        case.step(outcome, 1440, 4320);
        let events = case.events;

        let mut attrs = Attributes::new();
        attrs.insert("ward".into(), if severe { "ICU" } else { "WARD" }.into());
        attrs.insert("age".into(), AttributeValue::Int(rng.gen_range(18..=95)));
        attrs.insert("sex".into(), if rng.gen_bool(0.5) { "F" } else { "M" }.into());
        traces.push(
            Trace::new(format!("case-{:04}", i + 1), attrs, events).expect("cases have events"),
        );
    }
    Ok(EventLog::new(format!("demo-seed{seed}"), traces).expect("case ids are distinct"))
}
