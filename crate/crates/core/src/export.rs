//! Download formats: DOT graphs, variant CSV and a printable HTML comparison report.
//!
//! Every exporter is a deterministic function of its inputs. Nodes and edges are emitted
//! in lexicographic order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::comparison::{
    highlight_classes, ComparisonResult, Element, ElementClass, HighlightMap, Side, UNIQUE_CLASS,
    UNIQUE_COLOR,
};
use crate::discovery::{Dfg, Edge, Metric};
use crate::event_log::{variants, EventLog, LogStatistics};

pub use crate::event_log::{write_xes, xes_string};

/// Separator between activities in the variant column.
pub const VARIANT_SEPARATOR: &str = "→";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("highlight references {0}, which is not part of the model")]
    UnknownElement(String),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        "export_validation_error"
    }
}

fn describe(element: &Element) -> String {
    match element {
        Element::Activity(a) => format!("activity {a:?}"),
        Element::Edge(a, b) => format!("edge {a:?} -> {b:?}"),
    }
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    // DOT has no escape for a backslash right before the closing quote.
    if s.ends_with('\\') {
        out.push(' ');
    }
    out.push('"');
    out
}

/// Renders an edge value: counts as integers, durations in seconds with one decimal.
pub fn format_metric(value: f64, metric: Metric) -> String {
    match metric {
        Metric::Frequency => format!("{}", value as u64),
        Metric::Duration(_) => format!("{value:.1}s"),
    }
}

fn is_unique(highlight: Option<&HighlightMap>, element: &Element) -> bool {
    highlight.and_then(|h| h.get(element)) == Some(&ElementClass::Unique)
}

/// Renders `dfg` as a Graphviz digraph.
///
/// Node labels read `activity (frequency)`; edge labels carry `metric`. Elements classed
/// unique in `highlight` are drawn in [`UNIQUE_COLOR`], unique edges also dashed.
pub fn export_dot(dfg: &Dfg, metric: Metric, highlight: Option<&HighlightMap>) -> Result<String, ExportError> {
    if let Some(h) = highlight {
        for element in h.keys() {
            let known = match element {
                Element::Activity(a) => dfg.nodes().contains_key(a),
                Element::Edge(a, b) => dfg.edges().contains_key(&(a.clone(), b.clone())),
            };
            if !known {
                return Err(ExportError::UnknownElement(describe(element)));
            }
        }
    }
    let red = format!("color={q}, fontcolor={q}", q = dot_quote(UNIQUE_COLOR));
    let mut out = String::new();
    out.push_str("digraph dfg {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box, style=rounded, fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\"];\n");
    for (activity, stats) in dfg.nodes() {
        let label = format!("{activity} ({})", stats.frequency);
        let _ = write!(out, "  {} [label={}", dot_quote(activity), dot_quote(&label));
        if is_unique(highlight, &Element::Activity(activity.clone())) {
            let _ = write!(out, ", {red}, class={}", dot_quote(UNIQUE_CLASS));
        }
        out.push_str("];\n");
    }
    for edge @ (source, target) in dfg.edges().keys() {
        let value = dfg.edge_value(edge, metric).expect("iterating existing edges");
        let _ = write!(
            out,
            "  {} -> {} [label={}",
            dot_quote(source),
            dot_quote(target),
            dot_quote(&format_metric(value, metric))
        );
        if is_unique(highlight, &Element::Edge(source.clone(), target.clone())) {
            let _ = write!(out, ", {red}, style=dashed, class={}", dot_quote(UNIQUE_CLASS));
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    Ok(out)
}

/// Variant table with header `variant,case_count`, most frequent first, ties broken
/// lexicographically on the joined variant.
pub fn export_variants_csv(log: &EventLog) -> String {
    let mut rows: Vec<(String, usize)> = variants(log)
        .into_iter()
        .map(|(seq, count)| (seq.join(VARIANT_SEPARATOR), count))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["variant", "case_count"])
        .expect("in-memory write");
    for (variant, count) in rows {
        writer
            .write_record([variant, count.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

fn html_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Identifier used in `data-element` attributes of the report.
pub fn element_key(element: &Element) -> String {
    match element {
        Element::Activity(a) => format!("activity:{a}"),
        Element::Edge(a, b) => format!("edge:{a}{VARIANT_SEPARATOR}{b}"),
    }
}

const NODE_W: f64 = 160.0;
const NODE_H: f64 = 36.0;
const LAYER_GAP: f64 = 230.0;
const ROW_GAP: f64 = 70.0;
const MARGIN: f64 = 30.0;

/// Layered left-to-right layout: layer = BFS depth from the start activities.
fn layout(dfg: &Dfg) -> BTreeMap<String, (f64, f64)> {
    let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for a in dfg.start_activities().keys() {
        depth.insert(a, 0);
        queue.push_back(a);
    }
    let mut successors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in dfg.edges().keys() {
        successors.entry(a).or_default().push(b);
    }
    while let Some(a) = queue.pop_front() {
        let d = depth[a];
        for &b in successors.get(a).map(Vec::as_slice).unwrap_or_default() {
            if !depth.contains_key(b) {
                depth.insert(b, d + 1);
                queue.push_back(b);
            }
        }
    }
    let deepest = depth.values().copied().max().map_or(0, |d| d + 1);
    let mut layers: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for a in dfg.nodes().keys() {
        layers
            .entry(depth.get(a.as_str()).copied().unwrap_or(deepest))
            .or_default()
            .push(a);
    }
    let mut pos = BTreeMap::new();
    for (layer, members) in layers {
        for (row, a) in members.into_iter().enumerate() {
            pos.insert(
                a.to_owned(),
                (MARGIN + layer as f64 * LAYER_GAP, MARGIN + row as f64 * ROW_GAP),
            );
        }
    }
    pos
}

fn edge_path(from: (f64, f64), to: (f64, f64), self_loop: bool) -> (String, (f64, f64)) {
    if self_loop {
        let (x, y) = (from.0 + NODE_W / 2.0, from.1);
        let d = format!(
            "M {:.1} {:.1} C {:.1} {:.1}, {:.1} {:.1}, {:.1} {:.1}",
            x - 20.0, y, x - 30.0, y - 40.0, x + 30.0, y - 40.0, x + 20.0, y
        );
        return (d, (x, y - 34.0));
    }
    let forward = to.0 > from.0;
    let (sx, sy) = if forward {
        (from.0 + NODE_W, from.1 + NODE_H / 2.0)
    } else {
        (from.0 + NODE_W / 2.0, from.1 + NODE_H)
    };
    let (tx, ty) = if forward {
        (to.0, to.1 + NODE_H / 2.0)
    } else {
        (to.0 + NODE_W / 2.0, to.1 + NODE_H)
    };
    // Backward and same-layer edges bow downwards so they do not overlap forward ones.
    let (cx, cy) = if forward {
        ((sx + tx) / 2.0, (sy + ty) / 2.0 - 12.0)
    } else {
        ((sx + tx) / 2.0, sy.max(ty) + 45.0)
    };
    let d = format!("M {sx:.1} {sy:.1} Q {cx:.1} {cy:.1}, {tx:.1} {ty:.1}");
    (d, ((sx + 2.0 * cx + tx) / 4.0, (sy + 2.0 * cy + ty) / 4.0))
}

fn render_svg(result: &ComparisonResult, side: Side, metric: Metric) -> String {
    let slice = result.slice(side);
    let dfg = &slice.dfg;
    let side_name = match side {
        Side::Left => "left",
        Side::Right => "right",
    };
    if dfg.is_empty() {
        return format!(
            "<div class=\"empty-model\" data-side=\"{side_name}\">Empty model: no cases matched this slice.</div>"
        );
    }
    let classes = highlight_classes(result, side);
    let pos = layout(dfg);
    let width = pos.values().map(|p| p.0).fold(0.0, f64::max) + NODE_W + 2.0 * MARGIN;
    let height = pos.values().map(|p| p.1).fold(0.0, f64::max) + NODE_H + 2.0 * MARGIN + 50.0;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" data-side=\"{side_name}\" viewBox=\"0 0 {width:.0} {height:.0}\" width=\"100%\">"
    );
    let _ = write!(
        svg,
        "<defs><marker id=\"arrow-{side_name}\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"context-stroke\"/></marker></defs>"
    );
    for (edge, stats) in dfg.edges() {
        let element = Element::Edge(edge.0.clone(), edge.1.clone());
        let class = classes[&element];
        let (d, label_at) = edge_path(pos[&edge.0], pos[&edge.1], edge.0 == edge.1);
        let value = match metric {
            Metric::Frequency => stats.frequency as f64,
            Metric::Duration(s) => stats.durations.get(s),
        };
        let class_attr = match class {
            ElementClass::Unique => format!("edge {UNIQUE_CLASS}"),
            ElementClass::Common => "edge".to_owned(),
        };
        let _ = write!(
            svg,
            "<g class=\"{class_attr}\" data-element=\"{}\"><path d=\"{d}\" marker-end=\"url(#arrow-{side_name})\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text></g>",
            html_escape(&element_key(&element)),
            label_at.0,
            label_at.1 - 4.0,
            html_escape(&format_metric(value, metric)),
        );
    }
    for (activity, stats) in dfg.nodes() {
        let element = Element::Activity(activity.clone());
        let class_attr = match classes[&element] {
            ElementClass::Unique => format!("node {UNIQUE_CLASS}"),
            ElementClass::Common => "node".to_owned(),
        };
        let (x, y) = pos[activity];
        let _ = write!(
            svg,
            "<g class=\"{class_attr}\" data-element=\"{}\"><rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{NODE_W}\" height=\"{NODE_H}\" rx=\"6\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text></g>",
            html_escape(&element_key(&element)),
            x + NODE_W / 2.0,
            y + NODE_H / 2.0 + 4.0,
            html_escape(&format!("{activity} ({})", stats.frequency)),
        );
    }
    svg.push_str("</svg>");
    svg
}

fn stats_rows(left: &LogStatistics, right: &LogStatistics) -> String {
    let diff = left.abs_diff(right);
    let rows = [
        ("Cases", left.case_count.to_string(), right.case_count.to_string(), diff.case_count.to_string()),
        ("Variants", left.variant_count.to_string(), right.variant_count.to_string(), diff.variant_count.to_string()),
        ("Events", left.event_count.to_string(), right.event_count.to_string(), diff.event_count.to_string()),
        (
            "Avg. case duration",
            human_duration(left.avg_case_duration),
            human_duration(right.avg_case_duration),
            human_duration(diff.avg_case_duration),
        ),
    ];
    rows.iter()
        .map(|(name, l, r, d)| {
            format!(
                "<tr><th>{name}</th><td class=\"stat-left\">{l}</td><td class=\"stat-right\">{r}</td><td class=\"stat-diff\">{d}</td></tr>"
            )
        })
        .collect()
}

fn human_duration(seconds: f64) -> String {
    let days = seconds / 86_400.0;
    if days >= 1.0 {
        format!("{days:.2} d")
    } else if seconds >= 3600.0 {
        format!("{:.2} h", seconds / 3600.0)
    } else {
        format!("{seconds:.1} s")
    }
}

fn unique_list(items: impl Iterator<Item = String>) -> String {
    let items: Vec<String> = items.map(|i| format!("<li>{}</li>", html_escape(&i))).collect();
    if items.is_empty() {
        "<p class=\"none\">none</p>".to_owned()
    } else {
        format!("<ul>{}</ul>", items.join(""))
    }
}

fn edge_text((a, b): &Edge) -> String {
    format!("{a} {VARIANT_SEPARATOR} {b}")
}

/// Single-file printable HTML report of a comparison: both models side by side with
/// unique elements in [`UNIQUE_COLOR`] and the paired statistics between them.
pub fn export_comparison_report(result: &ComparisonResult, metric: Metric) -> String {
    let mut html = String::new();
    let created = result.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>Process comparison report</title>\n<style>\n");
    let _ = write!(
        html,
        "@page {{ size: A4 landscape; margin: 12mm; }}\n\
         body {{ font-family: Helvetica, Arial, sans-serif; color: #222; margin: 16px; }}\n\
         h1 {{ font-size: 20px; margin: 0 0 4px; }}\n\
         .meta {{ color: #555; font-size: 12px; margin-bottom: 12px; }}\n\
         .layout {{ display: grid; grid-template-columns: 1fr 260px 1fr; gap: 16px; align-items: start; }}\n\
         .pane {{ border: 1px solid #ccc; border-radius: 6px; padding: 8px; break-inside: avoid; }}\n\
         .pane h2 {{ font-size: 15px; margin: 0 0 4px; }}\n\
         .filter {{ font-size: 11px; color: #555; margin-bottom: 6px; }}\n\
         svg text {{ font-size: 11px; }}\n\
         .node rect {{ fill: #f4f6f8; stroke: #555; stroke-width: 1.2; }}\n\
         .edge path {{ fill: none; stroke: #777; stroke-width: 1.2; }}\n\
         .edge text {{ fill: #444; text-anchor: middle; }}\n\
         .node.{UNIQUE_CLASS} rect {{ stroke: {UNIQUE_COLOR}; fill: #fdeaea; stroke-width: 2; }}\n\
         .node.{UNIQUE_CLASS} text {{ fill: {UNIQUE_COLOR}; font-weight: bold; }}\n\
         .edge.{UNIQUE_CLASS} path {{ stroke: {UNIQUE_COLOR}; stroke-dasharray: 5 3; }}\n\
         .edge.{UNIQUE_CLASS} text {{ fill: {UNIQUE_COLOR}; }}\n\
         .empty-model {{ padding: 40px 12px; text-align: center; color: #777; border: 1px dashed #bbb; }}\n\
         table {{ border-collapse: collapse; width: 100%; font-size: 12px; }}\n\
         th, td {{ border-bottom: 1px solid #ddd; padding: 4px; text-align: right; }}\n\
         th:first-child {{ text-align: left; }}\n\
         .diffs {{ font-size: 12px; }}\n\
         .diffs ul {{ margin: 2px 0 8px; padding-left: 18px; }}\n"
    );
    html.push_str("</style>\n</head>\n<body>\n");
    let _ = writeln!(html, "<h1>Process comparison report</h1>");
    let _ = writeln!(
        html,
        "<div class=\"meta\">Created <time datetime=\"{created}\">{created}</time> &middot; edge metric: {}</div>",
        metric.as_str()
    );
    html.push_str("<div class=\"layout\">\n");
    for (side, col) in [(Side::Left, 0), (Side::Right, 2)] {
        if col == 2 {
            html.push_str("<section class=\"statistics\">\n<h2>Statistics</h2>\n<table>\n");
            let _ = write!(
                html,
                "<thead><tr><th></th><th>{}</th><th>{}</th><th>|Δ|</th></tr></thead>\n<tbody>{}</tbody>\n</table>\n",
                html_escape(&result.left.label),
                html_escape(&result.right.label),
                stats_rows(&result.left.statistics, &result.right.statistics)
            );
            html.push_str("<div class=\"diffs\">\n");
            let _ = write!(
                html,
                "<h3>Only in {}</h3>{}{}<h3>Only in {}</h3>{}{}<h3>Common activities</h3><p>{}</p>",
                html_escape(&result.left.label),
                unique_list(result.unique_activities_left.iter().cloned()),
                unique_list(result.unique_edges_left.iter().map(edge_text)),
                html_escape(&result.right.label),
                unique_list(result.unique_activities_right.iter().cloned()),
                unique_list(result.unique_edges_right.iter().map(edge_text)),
                result.common_activities.len()
            );
            html.push_str("</div>\n</section>\n");
        }
        let slice = result.slice(side);
        let _ = write!(
            html,
            "<section class=\"pane\" data-side=\"{}\">\n<h2>{}</h2>\n<div class=\"filter\">Filter: {}</div>\n{}\n</section>\n",
            if side == Side::Left { "left" } else { "right" },
            html_escape(&slice.label),
            html_escape(&slice.filter.to_string()),
            render_svg(result, side, metric)
        );
    }
    html.push_str("</div>\n</body>\n</html>\n");
    html
}
