//! Directly-follows graph discovery with frequency and performance annotations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::event_log::EventLog;

/// Directed edge between two activity labels.
pub type Edge = (String, String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscoveryError {
    #[error("unknown statistic `{0}`; expected mean, median, min or max")]
    UnknownStatistic(String),
    #[error("unknown metric `{0}`; expected frequency, mean, median, min or max")]
    UnknownMetric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    /// Occurrences of the activity over all events.
    pub frequency: usize,
    /// Number of cases containing the activity at least once.
    pub case_coverage: usize,
}

/// Aggregates over the durations (in seconds) between an edge's source and target events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl DurationStats {
    /// Summarizes millisecond samples. The median of an even sample count is the mean of
    /// the two central values.
    fn from_millis(mut samples: Vec<i64>) -> Self {
        assert!(!samples.is_empty(), "edges always carry at least one sample");
        samples.sort_unstable();
        let n = samples.len();
        let sum: i128 = samples.iter().map(|&s| s as i128).sum();
        let median_ms = if n % 2 == 1 {
            samples[n / 2] as f64
        } else {
            (samples[n / 2 - 1] as f64 + samples[n / 2] as f64) / 2.0
        };
        DurationStats {
            mean: sum as f64 / n as f64 / 1000.0,
            median: median_ms / 1000.0,
            min: samples[0] as f64 / 1000.0,
            max: samples[n - 1] as f64 / 1000.0,
        }
    }

    pub fn get(&self, statistic: DurationStatistic) -> f64 {
        match statistic {
            DurationStatistic::Mean => self.mean,
            DurationStatistic::Median => self.median,
            DurationStatistic::Min => self.min,
            DurationStatistic::Max => self.max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStats {
    pub frequency: usize,
    pub durations: DurationStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationStatistic {
    Mean,
    Median,
    Min,
    Max,
}

impl DurationStatistic {
    pub const ALL: [DurationStatistic; 4] = [
        DurationStatistic::Mean,
        DurationStatistic::Median,
        DurationStatistic::Min,
        DurationStatistic::Max,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DurationStatistic::Mean => "mean",
            DurationStatistic::Median => "median",
            DurationStatistic::Min => "min",
            DurationStatistic::Max => "max",
        }
    }
}

impl FromStr for DurationStatistic {
    type Err = DiscoveryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DurationStatistic::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| DiscoveryError::UnknownStatistic(s.to_owned()))
    }
}

/// What a rendered model shows on its edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Frequency,
    Duration(DurationStatistic),
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Frequency => "frequency",
            Metric::Duration(d) => d.as_str(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = DiscoveryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "frequency" {
            return Ok(Metric::Frequency);
        }
        s.parse()
            .map(Metric::Duration)
            .map_err(|_| DiscoveryError::UnknownMetric(s.to_owned()))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A discovered directly-follows graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dfg {
    nodes: BTreeMap<String, NodeStats>,
    edges: BTreeMap<Edge, EdgeStats>,
    start_activities: BTreeMap<String, usize>,
    end_activities: BTreeMap<String, usize>,
    source_case_count: usize,
}

impl Dfg {
    pub fn nodes(&self) -> &BTreeMap<String, NodeStats> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<Edge, EdgeStats> {
        &self.edges
    }

    pub fn start_activities(&self) -> &BTreeMap<String, usize> {
        &self.start_activities
    }

    pub fn end_activities(&self) -> &BTreeMap<String, usize> {
        &self.end_activities
    }

    pub fn source_case_count(&self) -> usize {
        self.source_case_count
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_set(&self) -> BTreeSet<String> {
        self.nodes.keys().cloned().collect()
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.keys().cloned().collect()
    }

    /// Value of `metric` on an edge: its frequency or the chosen duration in seconds.
    pub fn edge_value(&self, edge: &Edge, metric: Metric) -> Option<f64> {
        self.edges.get(edge).map(|e| match metric {
            Metric::Frequency => e.frequency as f64,
            Metric::Duration(d) => e.durations.get(d),
        })
    }
}

/// Builds the directly-follows graph of `log`.
pub fn discover_dfg(log: &EventLog) -> Dfg {
    let mut dfg = Dfg {
        source_case_count: log.len(),
        ..Dfg::default()
    };
    let mut samples: HashMap<(&str, &str), Vec<i64>> = HashMap::new();
    for trace in log.traces() {
        let events = trace.events();
        let mut seen_in_case = BTreeSet::new();
        for event in events {
            let node = dfg.nodes.entry(event.activity().to_owned()).or_insert(NodeStats {
                frequency: 0,
                case_coverage: 0,
            });
            node.frequency += 1;
            if seen_in_case.insert(event.activity()) {
                node.case_coverage += 1;
            }
        }
        for pair in events.windows(2) {
            let gap = (pair[1].timestamp() - pair[0].timestamp()).num_milliseconds();
            samples
                .entry((pair[0].activity(), pair[1].activity()))
                .or_default()
                .push(gap);
        }
        if let (Some(first), Some(last)) = (events.first(), events.last()) {
            *dfg.start_activities.entry(first.activity().to_owned()).or_default() += 1;
            *dfg.end_activities.entry(last.activity().to_owned()).or_default() += 1;
        }
    }
    dfg.edges = samples
        .into_iter()
        .map(|((a, b), s)| {
            let stats = EdgeStats {
                frequency: s.len(),
                durations: DurationStats::from_millis(s),
            };
            ((a.to_owned(), b.to_owned()), stats)
        })
        .collect();
    dfg
}

/// Projects one duration statistic per edge, in seconds.
pub fn dfg_performance_view(dfg: &Dfg, statistic: DurationStatistic) -> BTreeMap<Edge, f64> {
    dfg.edges
        .iter()
        .map(|(edge, stats)| (edge.clone(), stats.durations.get(statistic)))
        .collect()
}

// Canonical JSON form.

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    source: String,
    target: String,
    frequency: usize,
    mean_s: f64,
    median_s: f64,
    min_s: f64,
    max_s: f64,
}

#[derive(Serialize, Deserialize)]
struct DfgJson {
    nodes: BTreeMap<String, NodeStats>,
    edges: Vec<EdgeJson>,
    start_activities: BTreeMap<String, usize>,
    end_activities: BTreeMap<String, usize>,
    source_case_count: usize,
}

impl Serialize for Dfg {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DfgJson {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|((source, target), e)| EdgeJson {
                    source: source.clone(),
                    target: target.clone(),
                    frequency: e.frequency,
                    mean_s: e.durations.mean,
                    median_s: e.durations.median,
                    min_s: e.durations.min,
                    max_s: e.durations.max,
                })
                .collect(),
            start_activities: self.start_activities.clone(),
            end_activities: self.end_activities.clone(),
            source_case_count: self.source_case_count,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dfg {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DfgJson::deserialize(deserializer)?;
        let mut edges = BTreeMap::new();
        for e in raw.edges {
            if !raw.nodes.contains_key(&e.source) || !raw.nodes.contains_key(&e.target) {
                return Err(serde::de::Error::custom(format!(
                    "edge ({}, {}) references an unknown activity",
                    e.source, e.target
                )));
            }
            edges.insert(
                (e.source, e.target),
                EdgeStats {
                    frequency: e.frequency,
                    durations: DurationStats {
                        mean: e.mean_s,
                        median: e.median_s,
                        min: e.min_s,
                        max: e.max_s,
                    },
                },
            );
        }
        Ok(Dfg {
            nodes: raw.nodes,
            edges,
            start_activities: raw.start_activities,
            end_activities: raw.end_activities,
            source_case_count: raw.source_case_count,
        })
    }
}
