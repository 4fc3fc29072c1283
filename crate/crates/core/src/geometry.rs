//! Candidate edge set and crossing detection.
//!
//! Node indices are zero-based positions in [`CandidateGraph::nodes`]; the
//! node with id 1 (index 0) is the offshore substation, ids `2..=1+n_w` are
//! turbines. Edges are stored with `a < b`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use robust::{orient2d, Coord};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the substation in every node list.
pub const OSS: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(id: usize, x: f64, y: f64) -> Self {
        Point { id, x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn coord(&self) -> Coord<f64> {
        Coord { x: self.x, y: self.y }
    }
}

/// Undirected edge between two node indices, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        debug_assert_ne!(u, v);
        Edge { a: u.min(v), b: u.max(v) }
    }

    pub fn touches(&self, node: usize) -> bool {
        self.a == node || self.b == node
    }

    pub fn shares_node(&self, other: &Edge) -> bool {
        self.touches(other.a) || self.touches(other.b)
    }

    pub fn other(&self, node: usize) -> usize {
        if self.a == node {
            self.b
        } else {
            self.a
        }
    }

    pub fn is_feeder(&self) -> bool {
        self.a == OSS
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateGraph {
    pub nodes: Vec<Point>,
    pub edges: Vec<Edge>,
    /// Meters, parallel to `edges`.
    pub lengths: Vec<f64>,
    /// Unordered pairs of edge indices, `(i, j)` with `i < j`.
    pub crossings: Vec<(usize, usize)>,
    index: HashMap<Edge, usize>,
}

impl CandidateGraph {
    /// Assembles a graph from an explicit edge list. Lengths and crossings
    /// are derived from the node coordinates.
    pub fn from_edges(nodes: Vec<Point>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let nodes = normalize_nodes(nodes)?;
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        for e in &set {
            if e.a == e.b || e.b >= nodes.len() {
                return Err(Error::invalid(format!("edge ({}, {}) is not valid for {} nodes", e.a + 1, e.b + 1, nodes.len())));
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let lengths = edges.iter().map(|e| nodes[e.a].distance(&nodes[e.b])).collect();
        let index = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut graph = CandidateGraph { nodes, edges, lengths, crossings: Vec::new(), index };
        graph.crossings = crossing_pairs(&graph);
        Ok(graph)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_turbines(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u == v {
            return None;
        }
        self.index.get(&Edge::new(u, v)).copied()
    }

    pub fn segment(&self, edge: usize) -> (Point, Point) {
        let e = self.edges[edge];
        (self.nodes[e.a], self.nodes[e.b])
    }

    /// Edge indices incident to each node.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.a].push(i);
            inc[e.b].push(i);
        }
        inc
    }
}

fn normalize_nodes(mut nodes: Vec<Point>) -> Result<Vec<Point>> {
    nodes.sort_by_key(|p| p.id);
    for (i, p) in nodes.iter().enumerate() {
        if p.id != i + 1 {
            return Err(Error::invalid(format!(
                "node ids must be exactly 1..={} (1 = substation); found id {} at position {}",
                nodes.len(),
                p.id,
                i + 1
            )));
        }
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::invalid(format!("node {} has non-finite coordinates", p.id)));
        }
    }
    if nodes.len() < 3 {
        return Err(Error::invalid(format!("a closed loop needs at least 2 turbines, got {}", nodes.len().saturating_sub(1))));
    }
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    for p in &nodes {
        // +0.0 normalizes negative zero
        let key = ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
        if let Some(other) = seen.insert(key, p.id) {
            return Err(Error::invalid(format!("nodes {} and {} share coordinates", other, p.id)));
        }
    }
    Ok(nodes)
}

/// Bounded candidate graph: each turbine connects to its `upsilon` nearest
/// turbines (symmetric union, ties broken by lower id) plus the `sigma`
/// globally shortest turbine-substation edges.
pub fn build_candidate_graph(points: Vec<Point>, upsilon: usize, sigma: usize) -> Result<CandidateGraph> {
    let nodes = normalize_nodes(points)?;
    let n_w = nodes.len() - 1;
    if upsilon >= n_w {
        return Err(Error::invalid(format!("upsilon = {upsilon} must be below the turbine count {n_w}")));
    }
    if sigma > n_w {
        return Err(Error::invalid(format!("sigma = {sigma} exceeds the turbine count {n_w}")));
    }

    let by_distance = |from: usize, a: usize, b: usize| -> Ordering {
        let da = nodes[from].distance(&nodes[a]);
        let db = nodes[from].distance(&nodes[b]);
        da.total_cmp(&db).then(a.cmp(&b))
    };

    let mut edges = BTreeSet::new();
    for wt in 1..=n_w {
        let mut others: Vec<usize> = (1..=n_w).filter(|&j| j != wt).collect();
        others.sort_by(|&a, &b| by_distance(wt, a, b));
        for &j in others.iter().take(upsilon) {
            edges.insert(Edge::new(wt, j));
        }
    }
    let mut feeders: Vec<usize> = (1..=n_w).collect();
    feeders.sort_by(|&a, &b| by_distance(OSS, a, b));
    for &j in feeders.iter().take(sigma) {
        edges.insert(Edge::new(OSS, j));
    }

    CandidateGraph::from_edges(nodes, edges)
}

fn orientation(a: &Point, b: &Point, c: &Point) -> i8 {
    let det = orient2d(a.coord(), b.coord(), c.coord());
    if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    }
}

fn same_point(a: &Point, b: &Point) -> bool {
    a.x == b.x && a.y == b.y
}

/// `c` is collinear with `a`-`b` (caller checked); is it within the closed box?
fn within_box(a: &Point, b: &Point, c: &Point) -> bool {
    c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
}

/// True when the closed segments meet somewhere other than a shared endpoint,
/// or overlap collinearly over a positive length.
pub fn segments_cross(p: (Point, Point), q: (Point, Point)) -> bool {
    let (p1, p2) = (&p.0, &p.1);
    let (q1, q2) = (&q.0, &q.1);
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);

    if o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0 {
        return collinear_overlap(p1, p2, q1, q2);
    }

    let shared = same_point(p1, q1) || same_point(p1, q2) || same_point(p2, q1) || same_point(p2, q2);
    if shared {
        // not collinear: the shared endpoint is the only common point
        return false;
    }
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && within_box(p1, p2, q1))
        || (o2 == 0 && within_box(p1, p2, q2))
        || (o3 == 0 && within_box(q1, q2, p1))
        || (o4 == 0 && within_box(q1, q2, p2))
}

fn collinear_overlap(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let span = |a: &Point, b: &Point| ((a.x - b.x).abs(), (a.y - b.y).abs());
    let (sx, sy) = {
        let (px, py) = span(p1, p2);
        let (qx, qy) = span(q1, q2);
        (px.max(qx), py.max(qy))
    };
    let key: fn(&Point) -> f64 = if sx >= sy { |pt| pt.x } else { |pt| pt.y };
    let (plo, phi) = (key(p1).min(key(p2)), key(p1).max(key(p2)));
    let (qlo, qhi) = (key(q1).min(key(q2)), key(q1).max(key(q2)));
    if plo == phi || qlo == qhi {
        // a degenerate segment: report it only when it sits strictly inside the other one
        let (lo, hi, pt) = if plo == phi { (qlo, qhi, plo) } else { (plo, phi, qlo) };
        return lo < pt && pt < hi;
    }
    phi.min(qhi) > plo.max(qlo)
}

/// All crossing edge pairs; pairs sharing a node are never reported.
pub fn crossing_pairs(graph: &CandidateGraph) -> Vec<(usize, usize)> {
    let boxes: Vec<[f64; 4]> = graph
        .edges
        .iter()
        .map(|e| {
            let (p, q) = (&graph.nodes[e.a], &graph.nodes[e.b]);
            [p.x.min(q.x), p.x.max(q.x), p.y.min(q.y), p.y.max(q.y)]
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..graph.edges.len() {
        for j in (i + 1)..graph.edges.len() {
            if graph.edges[i].shares_node(&graph.edges[j]) {
                continue;
            }
            let (bi, bj) = (&boxes[i], &boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            if segments_cross(graph.segment(i), graph.segment(j)) {
                out.push((i, j));
            }
        }
    }
    out
}
