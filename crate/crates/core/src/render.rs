//! SVG rendering of a design.

use std::fmt::Write;

use crate::catalog::SubType;
use crate::geometry::{CandidateGraph, OSS};
use crate::model::Design;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;
const LEGEND_H: f64 = 70.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Largest of 1, 2, 5 × 10^k not above `limit` metres.
fn scale_length(limit: f64) -> f64 {
    let mut best = 1.0;
    let mut p = 1.0;
    while p <= limit {
        for m in [1.0, 2.0, 5.0] {
            if m * p <= limit {
                best = m * p;
            }
        }
        p *= 10.0;
    }
    best
}

/// Stroke classes are `cable-N` for cable option `N` (1-based); widths grow
/// with capacity.
pub fn render_layout(design: &Design, graph: &CandidateGraph, cables: &[SubType], title: &str) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &graph.nodes {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1.0);
    let k = (WIDTH - 2.0 * MARGIN) / span;
    let plot_h = (y1 - y0) * k + 2.0 * MARGIN;
    let height = plot_h + LEGEND_H;
    // north up: flip y
    let px = |x: f64| MARGIN + (x - x0) * k;
    let py = |y: f64| MARGIN + (y1 - y) * k;

    let used: Vec<usize> = {
        let mut u: Vec<usize> = design.cable.iter().flatten().copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    let max_cap = cables.iter().map(|c| c.capacity_a).fold(0.0, f64::max);
    let width_of = |t: usize| 1.5 + 4.5 * cables[t].capacity_a / max_cap;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(WIDTH),
        num(height),
        num(WIDTH),
        num(height)
    );
    s.push_str("<style>\n");
    s.push_str(".wt{fill:#ffffff;stroke:#333333;stroke-width:1.5}\n.oss{fill:#333333}\n.label{font:10px sans-serif;fill:#333333}\n");
    for &t in &used {
        let _ =
            writeln!(s, ".cable-{}{{stroke:{};stroke-width:{};stroke-linecap:round}}", t + 1, PALETTE[t % PALETTE.len()], num(width_of(t)));
    }
    s.push_str("</style>\n");
    if !title.is_empty() {
        let _ = writeln!(s, r#"<text class="label" x="{}" y="20">{}</text>"#, num(MARGIN), escape(title));
    }

    s.push_str("<g id=\"edges\">\n");
    for e in design.active_edges() {
        let t = design.cable[e].expect("active");
        let (a, b) = graph.segment(e);
        let _ = writeln!(
            s,
            r#"<line class="cable-{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            t + 1,
            num(px(a.x)),
            num(py(a.y)),
            num(px(b.x)),
            num(py(b.y))
        );
    }
    s.push_str("</g>\n<g id=\"nodes\">\n");
    for (i, p) in graph.nodes.iter().enumerate() {
        if i == OSS {
            let _ = writeln!(s, r#"<rect class="oss" x="{}" y="{}" width="12" height="12"/>"#, num(px(p.x) - 6.0), num(py(p.y) - 6.0));
        } else {
            let _ = writeln!(s, r#"<circle class="wt" cx="{}" cy="{}" r="5"/>"#, num(px(p.x)), num(py(p.y)));
        }
    }
    s.push_str("</g>\n");

    // legend and scale bar below the plot
    let top = plot_h + 10.0;
    s.push_str("<g id=\"legend\">\n");
    for (row, &t) in used.iter().enumerate() {
        let x = MARGIN + 150.0 * row as f64;
        let _ = writeln!(
            s,
            r#"<line class="cable-{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            t + 1,
            num(x),
            num(top + 8.0),
            num(x + 30.0),
            num(top + 8.0)
        );
        let _ = writeln!(s, r#"<text class="label" x="{}" y="{}">{} A</text>"#, num(x + 36.0), num(top + 12.0), num(cables[t].capacity_a));
    }
    let bar_m = scale_length(span / 4.0);
    let bar_px = bar_m * k;
    let _ = writeln!(
        s,
        r##"<g id="scale"><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#333333" stroke-width="2"/><text class="label" x="{}" y="{}">{} m</text></g>"##,
        num(MARGIN),
        num(top + 40.0),
        num(MARGIN + bar_px),
        num(top + 40.0),
        num(MARGIN),
        num(top + 54.0),
        num(bar_m)
    );
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ObjectiveMode;
    use crate::geometry::{Edge, Point};
    use crate::model::CostBreakdown;

    fn cable(cap: f64) -> SubType {
        SubType { parent: 0, capacity_a: cap, cost_per_m: 1.0, resistance_ohm_per_m: 1e-4, reactance_ohm_per_m: 1e-4, loss_cost_per_m: 0.0 }
    }

    #[test]
    fn triangle() {
        let nodes = vec![Point::new(1, 0.0, 0.0), Point::new(2, 1000.0, 0.0), Point::new(3, 500.0, 800.0)];
        let g = CandidateGraph::from_edges(nodes, [Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)]).unwrap();
        let cables = vec![cable(530.0), cable(655.0)];
        let d = Design {
            mode: ObjectiveMode::InvestmentReliability,
            cable: vec![Some(1), Some(0), Some(1)],
            leaves: vec![],
            breakdown: CostBreakdown::default(),
        };
        let svg = render_layout(&d, &g, &cables, "t");
        let edges = svg.split("<g id=\"edges\">").nth(1).unwrap().split("</g>").next().unwrap();
        assert_eq!(edges.matches("<line").count(), 3);
        assert_eq!(svg.matches("<circle").count() + svg.matches("<rect").count(), 3);
        assert_eq!(svg, render_layout(&d, &g, &cables, "t"));

        let resized = Design { cable: vec![Some(0), Some(0), Some(0)], ..d.clone() };
        let other = render_layout(&resized, &g, &cables, "t");
        let coords = |s: &str| {
            s.lines().filter(|l| l.starts_with("<line class")).map(|l| l.split_once("x1").unwrap().1.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(coords(&svg)[..3], coords(&other)[..3]);
        assert_ne!(svg, other);
    }

    #[test]
    fn scale_bar_lengths() {
        assert_eq!(scale_length(730.0), 500.0);
        assert_eq!(scale_length(2100.0), 2000.0);
        assert_eq!(scale_length(0.5), 1.0);
    }
}
