//! Comparative process mining over event logs.
//!
//! The crate covers the analysis pipeline end to end:
//!
//! * [`event_log`] ingests XES and CSV into an immutable [`EventLog`], writes XES back
//!   out and computes variants and [`LogStatistics`].
//! * [`filtering`] slices a log with a declarative [`FilterSpec`] (attribute clauses and
//!   a half-open time window).
//! * [`discovery`] builds a directly-follows graph ([`Dfg`]) annotated with frequencies
//!   and edge duration statistics.
//! * [`comparison`] diffs exactly two model slices into a [`ComparisonResult`].
//! * [`export`] renders DOT, variant CSV and a printable HTML report.
//! * [`demo`] generates a deterministic hospital-style log for demos and tests.

pub mod comparison;
pub mod demo;
pub mod discovery;
pub mod event_log;
pub mod export;
pub mod filtering;

pub use comparison::{compare, ComparisonResult, ElementClass, ModelSlice, Side};
pub use discovery::{discover_dfg, Dfg, DurationStatistic, EdgeStats, Metric, NodeStats};
pub use event_log::{
    AttributeValue, Event, EventLog, Level, LogError, LogStatistics, Trace, ValueType,
};
pub use filtering::{apply_filter, FilterError, FilterSpec};
