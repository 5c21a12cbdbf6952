use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EventLog;

/// Distinct activity sequences mapped to the number of cases following them.
pub type Variants = BTreeMap<Vec<String>, usize>;

/// Summary numbers shown next to each model.
///
/// `variant_count` counts distinct activity sequences, `case_count` counts cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogStatistics {
    pub case_count: usize,
    pub variant_count: usize,
    pub event_count: usize,
    /// Mean case running time in seconds; 0 for an empty log.
    pub avg_case_duration: f64,
}

impl LogStatistics {
    /// Element-wise absolute difference, used for the panel between two models.
    pub fn abs_diff(&self, other: &LogStatistics) -> LogStatistics {
        LogStatistics {
            case_count: self.case_count.abs_diff(other.case_count),
            variant_count: self.variant_count.abs_diff(other.variant_count),
            event_count: self.event_count.abs_diff(other.event_count),
            avg_case_duration: (self.avg_case_duration - other.avg_case_duration).abs(),
        }
    }
}

pub fn variants(log: &EventLog) -> Variants {
    let mut out = Variants::new();
    for trace in log.traces() {
        let seq = trace.activities().map(str::to_owned).collect();
        *out.entry(seq).or_default() += 1;
    }
    out
}

pub fn log_statistics(log: &EventLog) -> LogStatistics {
    let case_count = log.len();
    let total_ms: i128 = log.traces().iter().map(|t| t.duration_ms() as i128).sum();
    let avg_case_duration = if case_count == 0 {
        0.0
    } else {
        total_ms as f64 / case_count as f64 / 1000.0
    };
    LogStatistics {
        case_count,
        variant_count: variants(log).len(),
        event_count: log.event_count(),
        avg_case_duration,
    }
}
