//! Structural diff of exactly two model slices.
//!
//! Activities and edges are matched by label identity only. An element present in both
//! models is `common` whatever its metrics; metric differences are reported numerically
//! through the paired statistics.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::discovery::{discover_dfg, Dfg, Edge, Metric};
use crate::event_log::{log_statistics, EventLog, LogStatistics};
use crate::filtering::{apply_filter, FilterError, FilterSpec};

/// CSS class carried by elements present in only one of the two models.
pub const UNIQUE_CLASS: &str = "unique";
/// Color of unique elements in every rendering (DOT, HTML report, UI).
pub const UNIQUE_COLOR: &str = "#d62728";

/// One filtered slice of a log with its discovered model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSlice {
    pub label: String,
    pub filter: FilterSpec,
    pub dfg: Dfg,
    pub statistics: LogStatistics,
}

impl ModelSlice {
    /// Filters `log`, discovers the DFG of the result and computes its statistics.
    pub fn build(label: impl Into<String>, filter: FilterSpec, log: &EventLog) -> Result<Self, FilterError> {
        Self::build_with_log(label, filter, log).map(|(slice, _)| slice)
    }

    /// Like [`ModelSlice::build`] but also returns the filtered log.
    pub fn build_with_log(
        label: impl Into<String>,
        filter: FilterSpec,
        log: &EventLog,
    ) -> Result<(Self, EventLog), FilterError> {
        let filtered = apply_filter(log, &filter)?;
        let slice = ModelSlice {
            label: label.into(),
            filter,
            dfg: discover_dfg(&filtered),
            statistics: log_statistics(&filtered),
        };
        Ok((slice, filtered))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementClass {
    Common,
    Unique,
}

/// A node or edge of a rendered model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Activity(String),
    Edge(String, String),
}

impl Element {
    pub fn edge(source: &str, target: &str) -> Self {
        Element::Edge(source.to_owned(), target.to_owned())
    }

    pub fn activity(name: &str) -> Self {
        Element::Activity(name.to_owned())
    }
}

pub type HighlightMap = BTreeMap<Element, ElementClass>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub left: ModelSlice,
    pub right: ModelSlice,
    pub common_activities: BTreeSet<String>,
    pub unique_activities_left: BTreeSet<String>,
    pub unique_activities_right: BTreeSet<String>,
    pub common_edges: BTreeSet<Edge>,
    pub unique_edges_left: BTreeSet<Edge>,
    pub unique_edges_right: BTreeSet<Edge>,
    pub created_at: DateTime<Utc>,
}

impl ComparisonResult {
    pub fn slice(&self, side: Side) -> &ModelSlice {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn unique_activities(&self, side: Side) -> &BTreeSet<String> {
        match side {
            Side::Left => &self.unique_activities_left,
            Side::Right => &self.unique_activities_right,
        }
    }

    pub fn unique_edges(&self, side: Side) -> &BTreeSet<Edge> {
        match side {
            Side::Left => &self.unique_edges_left,
            Side::Right => &self.unique_edges_right,
        }
    }

    /// Whether two results classify identically, ignoring creation time.
    pub fn same_outcome(&self, other: &ComparisonResult) -> bool {
        ComparisonResult {
            created_at: other.created_at,
            ..self.clone()
        } == *other
    }
}

/// Compares two slices, stamping the result with the current time.
pub fn compare(left: ModelSlice, right: ModelSlice) -> ComparisonResult {
    compare_at(left, right, Utc::now())
}

pub fn compare_at(left: ModelSlice, right: ModelSlice, created_at: DateTime<Utc>) -> ComparisonResult {
    let (ln, rn) = (left.dfg.node_set(), right.dfg.node_set());
    let (le, re) = (left.dfg.edge_set(), right.dfg.edge_set());
    ComparisonResult {
        common_activities: ln.intersection(&rn).cloned().collect(),
        unique_activities_left: ln.difference(&rn).cloned().collect(),
        unique_activities_right: rn.difference(&ln).cloned().collect(),
        common_edges: le.intersection(&re).cloned().collect(),
        unique_edges_left: le.difference(&re).cloned().collect(),
        unique_edges_right: re.difference(&le).cloned().collect(),
        left,
        right,
        created_at,
    }
}

/// Classifies every node and edge of one side's model.
pub fn highlight_classes(result: &ComparisonResult, side: Side) -> HighlightMap {
    let dfg = &result.slice(side).dfg;
    let unique_nodes = result.unique_activities(side);
    let unique_edges = result.unique_edges(side);
    let class = |unique: bool| if unique { ElementClass::Unique } else { ElementClass::Common };
    let nodes = dfg
        .nodes()
        .keys()
        .map(|a| (Element::Activity(a.clone()), class(unique_nodes.contains(a))));
    let edges = dfg
        .edges()
        .keys()
        .map(|e| (Element::Edge(e.0.clone(), e.1.clone()), class(unique_edges.contains(e))));
    nodes.chain(edges).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeView {
    pub source: String,
    pub target: String,
    pub class: ElementClass,
    /// Edge value under the requested metric (count or seconds).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceView {
    pub label: String,
    pub filter: FilterSpec,
    pub filter_description: String,
    pub dfg: Dfg,
    pub statistics: LogStatistics,
    pub empty: bool,
    pub node_classes: BTreeMap<String, ElementClass>,
    pub edges: Vec<EdgeView>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedStatistics {
    pub left: LogStatistics,
    pub right: LogStatistics,
    pub abs_diff: LogStatistics,
}

/// Canonical JSON payload consumed by the UI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonView {
    pub created_at: DateTime<Utc>,
    pub metric: Metric,
    pub unique_color: &'static str,
    pub left: SliceView,
    pub right: SliceView,
    pub common_activities: BTreeSet<String>,
    pub unique_activities_left: BTreeSet<String>,
    pub unique_activities_right: BTreeSet<String>,
    pub common_edges: BTreeSet<Edge>,
    pub unique_edges_left: BTreeSet<Edge>,
    pub unique_edges_right: BTreeSet<Edge>,
    pub statistics: PairedStatistics,
}

fn slice_view(result: &ComparisonResult, side: Side, metric: Metric) -> SliceView {
    let slice = result.slice(side);
    let classes = highlight_classes(result, side);
    let mut node_classes = BTreeMap::new();
    let mut edges = Vec::new();
    for (element, class) in classes {
        match element {
            Element::Activity(a) => {
                node_classes.insert(a, class);
            }
            Element::Edge(source, target) => {
                let value = slice
                    .dfg
                    .edge_value(&(source.clone(), target.clone()), metric)
                    .expect("classified edge exists");
                edges.push(EdgeView {
                    source,
                    target,
                    class,
                    value,
                });
            }
        }
    }
    SliceView {
        label: slice.label.clone(),
        filter: slice.filter.clone(),
        filter_description: slice.filter.to_string(),
        dfg: slice.dfg.clone(),
        statistics: slice.statistics,
        empty: slice.dfg.is_empty(),
        node_classes,
        edges,
    }
}

pub fn comparison_view(result: &ComparisonResult, metric: Metric) -> ComparisonView {
    ComparisonView {
        created_at: result.created_at,
        metric,
        unique_color: UNIQUE_COLOR,
        left: slice_view(result, Side::Left, metric),
        right: slice_view(result, Side::Right, metric),
        common_activities: result.common_activities.clone(),
        unique_activities_left: result.unique_activities_left.clone(),
        unique_activities_right: result.unique_activities_right.clone(),
        common_edges: result.common_edges.clone(),
        unique_edges_left: result.unique_edges_left.clone(),
        unique_edges_right: result.unique_edges_right.clone(),
        statistics: PairedStatistics {
            left: result.left.statistics,
            right: result.right.statistics,
            abs_diff: result.left.statistics.abs_diff(&result.right.statistics),
        },
    }
}
