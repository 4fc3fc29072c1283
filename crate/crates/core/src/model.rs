//! Two-stage stochastic MILP as a solver-agnostic intermediate representation.
//!
//! Variable layout: `y` per edge, `x` per (edge, cable option), then for every
//! leaf of the scenario tree (wind-major) the signed edge currents, node phase
//! angles and turbine curtailments. Edge currents are positive from the lower
//! node index to the higher one.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{ObjectiveMode, SubType};
use crate::error::{Error, Result};
use crate::geometry::{CandidateGraph, OSS};
use crate::scenario::{nominal_current, Leaf, ScenarioTree};

/// Phase angle bound (dimensionless, as printed in the formulation).
pub const ANGLE_BOUND: f64 = 0.1;

/// Tolerance on binaries and on the recomputed objective.
pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const OBJECTIVE_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint families of the formulation, `C1`..`C14`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
    C10,
    C11,
    C12,
    C13,
    C14,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::C1,
        Family::C2,
        Family::C3,
        Family::C4,
        Family::C5,
        Family::C6,
        Family::C7,
        Family::C8,
        Family::C9,
        Family::C10,
        Family::C11,
        Family::C12,
        Family::C13,
        Family::C14,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format!("{self:?}").to_lowercase())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub mode: ObjectiveMode,
    /// Maximum number of feeders at the substation.
    pub phi: usize,
    /// Currency per ampere-hour.
    pub c_e: f64,
    pub v_n_kv: f64,
    pub p_n_mw: f64,
    /// Fix all curtailment to zero (deterministic mode).
    pub zero_curtailment: bool,
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if self.phi < 2 {
            return Err(Error::invalid(format!("phi = {} leaves no room for a closed loop", self.phi)));
        }
        if !(self.c_e >= 0.0 && self.v_n_kv > 0.0 && self.p_n_mw > 0.0) {
            return Err(Error::invalid("c_e must be non-negative, V_n and P_n positive"));
        }
        Ok(())
    }

    /// Turbine current in a wind scenario of magnitude `zeta`.
    pub fn turbine_current(&self, zeta: f64) -> f64 {
        nominal_current(self.p_n_mw, self.v_n_kv, zeta)
    }
}

/// Everything the model was built from.
#[derive(Clone, Debug)]
pub struct ModelInput {
    pub graph: CandidateGraph,
    pub cables: Vec<SubType>,
    pub tree: ScenarioTree,
    pub options: ModelOptions,
}

impl ModelInput {
    /// Largest cable capacity, the symmetric flow bound.
    pub fn max_capacity(&self) -> f64 {
        self.cables.iter().map(|c| c.capacity_a).fold(0.0, f64::max)
    }

    /// Upper bound on curtailment at every turbine in a wind scenario.
    pub fn curtailment_cap(&self, wind: usize) -> f64 {
        if self.options.zero_curtailment {
            0.0
        } else {
            self.options.turbine_current(self.tree.winds[wind].magnitude)
        }
    }

    /// Objective weight of one ampere of curtailment at a leaf.
    pub fn curtailment_weight(&self, leaf: Leaf) -> f64 {
        self.options.c_e * self.tree.winds[leaf.wind].duration_h * self.tree.states[leaf.state].probability
    }

    pub fn failed_edge(&self, leaf: Leaf) -> Option<usize> {
        self.tree.states[leaf.state].failed_edge
    }
}

/// Variable indices of each block.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexMap {
    n_edges: usize,
    n_nodes: usize,
    n_cables: usize,
    n_leaves: usize,
}

impl IndexMap {
    pub fn y(&self, edge: usize) -> usize {
        edge
    }
    pub fn x(&self, edge: usize, cable: usize) -> usize {
        self.n_edges + edge * self.n_cables + cable
    }
    fn leaf_base(&self, leaf: usize) -> usize {
        self.n_edges * (1 + self.n_cables) + leaf * self.per_leaf()
    }
    fn per_leaf(&self) -> usize {
        self.n_edges + self.n_nodes + (self.n_nodes - 1)
    }
    pub fn flow(&self, leaf: usize, edge: usize) -> usize {
        self.leaf_base(leaf) + edge
    }
    pub fn angle(&self, leaf: usize, node: usize) -> usize {
        self.leaf_base(leaf) + self.n_edges + node
    }
    /// `node` is a turbine index (>= 1).
    pub fn curtail(&self, leaf: usize, node: usize) -> usize {
        debug_assert!(node >= 1);
        self.leaf_base(leaf) + self.n_edges + self.n_nodes + node - 1
    }
    pub fn n_vars(&self) -> usize {
        self.n_edges * (1 + self.n_cables) + self.n_leaves * self.per_leaf()
    }
    pub fn n_first_stage(&self) -> usize {
        self.n_edges * (1 + self.n_cables)
    }
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }
}

#[derive(Clone, Debug)]
pub struct ModelIR {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Dense objective coefficients (minimize).
    pub objective: Vec<f64>,
    /// Optional starting values, by variable index.
    pub warm_start: Option<Vec<(usize, f64)>>,
    pub index: IndexMap,
    pub input: ModelInput,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelStats {
    pub binaries: usize,
    pub continuous: usize,
    pub rows_per_family: BTreeMap<Family, usize>,
}

impl ModelIR {
    pub fn stats(&self) -> ModelStats {
        let mut s = ModelStats::default();
        for v in &self.variables {
            match v.kind {
                VarKind::Binary => s.binaries += 1,
                VarKind::Continuous => s.continuous += 1,
            }
        }
        for c in &self.constraints {
            *s.rows_per_family.entry(c.family).or_default() += 1;
        }
        s
    }

    /// Objective value of a dense assignment.
    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    pub fn first_stage_names(&self) -> impl Iterator<Item = (usize, &str)> {
        (0..self.index.n_first_stage()).map(move |i| (i, self.variables[i].name.as_str()))
    }
}

/// Per-(edge, cable) big-M for the DC-flow rows: the flow bound plus the
/// largest angle-difference term admissible under the angle bounds.
pub fn big_m(length_m: f64, cable: &SubType, v_n_kv: f64, flow_bound: f64) -> f64 {
    flow_bound + susceptance(length_m, cable, v_n_kv) * 2.0 * ANGLE_BOUND
}

/// Amperes per unit angle difference across an edge.
pub fn susceptance(length_m: f64, cable: &SubType, v_n_kv: f64) -> f64 {
    1000.0 * v_n_kv / (3f64.sqrt() * cable.reactance_ohm_per_m * length_m)
}

pub fn build_model(graph: &CandidateGraph, cables: &[SubType], tree: &ScenarioTree, opts: &ModelOptions) -> Result<ModelIR> {
    opts.validate()?;
    if cables.is_empty() {
        return Err(Error::invalid("no cable options"));
    }
    for s in &tree.states {
        if let Some(e) = s.failed_edge {
            if e >= graph.edges.len() {
                return Err(Error::invalid(format!("system state {} fails edge {e}, absent from the graph", s.id)));
            }
        }
    }
    let input = ModelInput { graph: graph.clone(), cables: cables.to_vec(), tree: tree.clone(), options: *opts };
    let n_edges = graph.edges.len();
    let n_nodes = graph.n_nodes();
    let n_cables = cables.len();
    let index = IndexMap { n_edges, n_nodes, n_cables, n_leaves: tree.n_leaves() };
    let flow_bound = input.max_capacity();

    let id = |node: usize| node + 1;
    let mut variables = Vec::with_capacity(index.n_vars());
    let mut objective = vec![0.0; index.n_vars()];

    for e in &graph.edges {
        variables.push(Variable { name: format!("y_{}_{}", id(e.a), id(e.b)), kind: VarKind::Binary, lower: 0.0, upper: 1.0 });
    }
    for (ei, e) in graph.edges.iter().enumerate() {
        for (t, cable) in cables.iter().enumerate() {
            objective[variables.len()] = cable.total_cost_per_m() * graph.lengths[ei];
            variables.push(Variable {
                name: format!("x_{}_{}_{}", id(e.a), id(e.b), t + 1),
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
            });
        }
    }
    for leaf in tree.leaves() {
        let tag = format!("{}_{}", leaf.wind, leaf.state);
        for e in &graph.edges {
            variables.push(Variable {
                name: format!("I_{}_{}_{tag}", id(e.a), id(e.b)),
                kind: VarKind::Continuous,
                lower: -flow_bound,
                upper: flow_bound,
            });
        }
        for i in 0..n_nodes {
            variables.push(Variable {
                name: format!("th_{}_{tag}", id(i)),
                kind: VarKind::Continuous,
                lower: -ANGLE_BOUND,
                upper: ANGLE_BOUND,
            });
        }
        let weight = input.curtailment_weight(leaf);
        let cap = input.curtailment_cap(leaf.wind);
        for j in 1..n_nodes {
            objective[variables.len()] = weight;
            variables.push(Variable { name: format!("dl_{}_{tag}", id(j)), kind: VarKind::Continuous, lower: 0.0, upper: cap });
        }
    }
    debug_assert_eq!(variables.len(), index.n_vars());

    let mut constraints = Vec::new();
    let incidence = graph.incidence();

    // c1: one cable type per active edge
    for (ei, e) in graph.edges.iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = (0..n_cables).map(|t| (index.x(ei, t), 1.0)).collect();
        terms.push((index.y(ei), -1.0));
        constraints.push(Constraint { name: format!("c1_{}_{}", id(e.a), id(e.b)), family: Family::C1, terms, sense: Sense::Eq, rhs: 0.0 });
    }
    // c2: closed loops, every turbine has degree two
    for j in 1..n_nodes {
        let terms = incidence[j].iter().map(|&ei| (index.y(ei), 1.0)).collect();
        constraints.push(Constraint { name: format!("c2_{}", id(j)), family: Family::C2, terms, sense: Sense::Eq, rhs: 2.0 });
    }
    // c3: feeder limit
    constraints.push(Constraint {
        name: "c3".into(),
        family: Family::C3,
        terms: incidence[OSS].iter().map(|&ei| (index.y(ei), 1.0)).collect(),
        sense: Sense::Le,
        rhs: opts.phi as f64,
    });
    // c4: no crossings
    for &(a, b) in &graph.crossings {
        constraints.push(Constraint {
            name: format!("c4_{a}_{b}"),
            family: Family::C4,
            terms: vec![(index.y(a), 1.0), (index.y(b), 1.0)],
            sense: Sense::Le,
            rhs: 1.0,
        });
    }

    for leaf in tree.leaves() {
        let li = tree.leaf_index(leaf);
        let tag = format!("{}_{}", leaf.wind, leaf.state);
        let generation = opts.turbine_current(tree.winds[leaf.wind].magnitude);
        let failed = input.failed_edge(leaf);

        // c5: conservation, net outflow plus curtailment equals generation
        for j in 1..n_nodes {
            let mut terms: Vec<(usize, f64)> = incidence[j]
                .iter()
                .map(|&ei| {
                    let sign = if graph.edges[ei].a == j { 1.0 } else { -1.0 };
                    (index.flow(li, ei), sign)
                })
                .collect();
            terms.push((index.curtail(li, j), 1.0));
            constraints.push(Constraint {
                name: format!("c5_{}_{tag}", id(j)),
                family: Family::C5,
                terms,
                sense: Sense::Eq,
                rhs: generation,
            });
        }

        for (ei, e) in graph.edges.iter().enumerate() {
            let r = if failed == Some(ei) { 1.0 } else { 0.0 };
            // c6/c7: DC power flow, relaxed by big-M when the type is not installed or the edge failed
            for (t, cable) in cables.iter().enumerate() {
                let b = susceptance(graph.lengths[ei], cable, opts.v_n_kv);
                let m = big_m(graph.lengths[ei], cable, opts.v_n_kv, flow_bound);
                let f = index.flow(li, ei);
                let (ta, tb) = (index.angle(li, e.a), index.angle(li, e.b));
                let x = index.x(ei, t);
                constraints.push(Constraint {
                    name: format!("c6_{}_{}_{}_{tag}", id(e.a), id(e.b), t + 1),
                    family: Family::C6,
                    terms: vec![(f, 1.0), (ta, -b), (tb, b), (x, m)],
                    sense: Sense::Le,
                    rhs: m * (1.0 + r),
                });
                constraints.push(Constraint {
                    name: format!("c7_{}_{}_{}_{tag}", id(e.a), id(e.b), t + 1),
                    family: Family::C7,
                    terms: vec![(f, -1.0), (ta, b), (tb, -b), (x, m)],
                    sense: Sense::Le,
                    rhs: m * (1.0 + r),
                });
            }
            // c8/c9: capacity, masked to zero for the failed edge
            let caps: Vec<(usize, f64)> =
                if r == 0.0 { cables.iter().enumerate().map(|(t, c)| (index.x(ei, t), c.capacity_a)).collect() } else { Vec::new() };
            let mut upper = vec![(index.flow(li, ei), 1.0)];
            upper.extend(caps.iter().map(|&(v, u)| (v, -u)));
            constraints.push(Constraint {
                name: format!("c8_{}_{}_{tag}", id(e.a), id(e.b)),
                family: Family::C8,
                terms: upper,
                sense: Sense::Le,
                rhs: 0.0,
            });
            let mut lower = vec![(index.flow(li, ei), -1.0)];
            lower.extend(caps.iter().map(|&(v, u)| (v, -u)));
            constraints.push(Constraint {
                name: format!("c9_{}_{}_{tag}", id(e.a), id(e.b)),
                family: Family::C9,
                terms: lower,
                sense: Sense::Le,
                rhs: 0.0,
            });
        }
    }

    Ok(ModelIR { variables, constraints, objective, warm_start: None, index, input })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub investment: f64,
    pub losses: f64,
    pub reliability: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.investment + self.losses + self.reliability
    }
}

/// Operation of the network in one leaf of the scenario tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafFlow {
    pub leaf: Leaf,
    /// Amperes per candidate edge, positive from `a` to `b`.
    pub flows: Vec<f64>,
    /// Phase angle per node.
    pub angles: Vec<f64>,
    /// Amperes per turbine; index `j - 1` for node index `j`.
    pub curtailment: Vec<f64>,
    /// Probability-weighted currency cost of the curtailment.
    pub cost: f64,
}

impl LeafFlow {
    pub fn total_curtailment(&self) -> f64 {
        self.curtailment.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub mode: ObjectiveMode,
    /// Installed cable option per candidate edge; `None` when inactive.
    pub cable: Vec<Option<usize>>,
    /// Per-leaf operation, in tree leaf order. May be empty for designs
    /// loaded from file.
    pub leaves: Vec<LeafFlow>,
    pub breakdown: CostBreakdown,
}

impl Design {
    pub fn active_edges(&self) -> Vec<usize> {
        self.cable.iter().enumerate().filter_map(|(i, c)| c.map(|_| i)).collect()
    }

    pub fn is_active(&self, edge: usize) -> bool {
        self.cable[edge].is_some()
    }

    /// Investment and losses cost of the first-stage decision.
    pub fn first_stage_cost(&self, graph: &CandidateGraph, cables: &[SubType]) -> (f64, f64) {
        let mut inv = 0.0;
        let mut loss = 0.0;
        for (e, c) in self.cable.iter().enumerate() {
            if let Some(t) = c {
                inv += cables[*t].cost_per_m * graph.lengths[e];
                loss += cables[*t].loss_cost_per_m * graph.lengths[e];
            }
        }
        (inv, loss)
    }

    /// First-stage values for a model built over the same graph and cables.
    pub fn first_stage_assignment(&self, index: &IndexMap, n_cables: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (e, c) in self.cable.iter().enumerate() {
            out.push((index.y(e), if c.is_some() { 1.0 } else { 0.0 }));
            for t in 0..n_cables {
                out.push((index.x(e, t), if *c == Some(t) { 1.0 } else { 0.0 }));
            }
        }
        out
    }
}

/// Rounds binaries, copies second-stage values and recomputes the cost
/// breakdown from the assignment. When `solver_objective` is given the
/// recomputed total must match it within [`OBJECTIVE_REL_TOL`].
pub fn extract_design(ir: &ModelIR, assignment: &[f64], solver_objective: Option<f64>) -> Result<Design> {
    if assignment.len() != ir.variables.len() {
        return Err(Error::Inconsistent(format!("assignment has {} values for {} variables", assignment.len(), ir.variables.len())));
    }
    let input = &ir.input;
    let graph = &input.graph;
    let n_cables = input.cables.len();
    let round = |v: usize| -> Result<bool> {
        let value = assignment[v];
        if (value - value.round()).abs() > INTEGRALITY_TOL || !(-INTEGRALITY_TOL..=1.0 + INTEGRALITY_TOL).contains(&value) {
            return Err(Error::Inconsistent(format!("binary {} = {value} is not integral", ir.variables[v].name)));
        }
        Ok(value.round() == 1.0)
    };

    let mut cable = vec![None; graph.edges.len()];
    for e in 0..graph.edges.len() {
        let active = round(ir.index.y(e))?;
        let mut chosen = Vec::new();
        for t in 0..n_cables {
            if round(ir.index.x(e, t))? {
                chosen.push(t);
            }
        }
        match (active, chosen.as_slice()) {
            (false, []) => {}
            (true, [t]) => cable[e] = Some(*t),
            _ => {
                return Err(Error::Inconsistent(format!(
                    "edge {} has y = {} with {} cable types selected",
                    ir.variables[ir.index.y(e)].name,
                    active as u8,
                    chosen.len()
                )))
            }
        }
    }

    let mut leaves = Vec::with_capacity(input.tree.n_leaves());
    let mut reliability = 0.0;
    for leaf in input.tree.leaves() {
        let li = input.tree.leaf_index(leaf);
        let flows = (0..graph.edges.len()).map(|e| assignment[ir.index.flow(li, e)]).collect();
        let angles = (0..graph.n_nodes()).map(|i| assignment[ir.index.angle(li, i)]).collect();
        let curtailment: Vec<f64> = (1..graph.n_nodes()).map(|j| assignment[ir.index.curtail(li, j)]).collect();
        let cost = input.curtailment_weight(leaf) * curtailment.iter().sum::<f64>();
        reliability += cost;
        leaves.push(LeafFlow { leaf, flows, angles, curtailment, cost });
    }

    let mut design = Design { mode: input.options.mode, cable, leaves, breakdown: CostBreakdown::default() };
    let (investment, losses) = design.first_stage_cost(graph, &input.cables);
    design.breakdown = CostBreakdown { investment, losses, reliability };

    if let Some(obj) = solver_objective {
        let total = design.breakdown.total();
        if (total - obj).abs() > OBJECTIVE_REL_TOL * obj.abs().max(1.0) {
            return Err(Error::Inconsistent(format!("recomputed objective {total} differs from solver objective {obj}")));
        }
    }
    Ok(design)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Largest violation per constraint family (natural units of each family).
    pub max_violation: BTreeMap<Family, f64>,
    /// `(leaf, turbine node index, residual in A)` for every conservation row.
    pub conservation: Vec<(Leaf, usize, f64)>,
    /// Human-readable findings for violations above the tolerance used.
    pub findings: Vec<String>,
}

impl ValidationReport {
    pub fn worst(&self) -> f64 {
        self.max_violation.values().cloned().fold(0.0, f64::max)
    }

    pub fn flagged(&self, tol: f64) -> Vec<Family> {
        self.max_violation.iter().filter(|(_, v)| **v > tol).map(|(f, _)| *f).collect()
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.flagged(tol).is_empty()
    }

    fn record(&mut self, family: Family, violation: f64, what: impl FnOnce() -> String) {
        let slot = self.max_violation.entry(family).or_insert(0.0);
        let violation = violation.max(0.0);
        if violation > *slot {
            *slot = violation;
        }
        if violation > INTEGRALITY_TOL {
            self.findings.push(format!("{family}: {} (violation {violation:.3e})", what()));
        }
    }
}

/// Re-checks every constraint family numerically. Leaves are matched to the
/// tree by their recorded `(wind, state)` indices.
pub fn validate_design(d: &Design, input: &ModelInput) -> ValidationReport {
    let graph = &input.graph;
    let cables = &input.cables;
    let opts = &input.options;
    let mut report = ValidationReport::default();
    for f in Family::ALL {
        report.max_violation.insert(f, 0.0);
    }

    // c1, c10, c11 hold by construction of `Design`; check option indices only.
    for (e, c) in d.cable.iter().enumerate() {
        if let Some(t) = c {
            report.record(Family::C1, if *t < cables.len() { 0.0 } else { 1.0 }, || format!("edge {e} uses unknown cable {t}"));
        }
    }
    let mut degree = vec![0usize; graph.n_nodes()];
    for e in d.active_edges() {
        degree[graph.edges[e].a] += 1;
        degree[graph.edges[e].b] += 1;
    }
    for j in 1..graph.n_nodes() {
        report.record(Family::C2, (degree[j] as f64 - 2.0).abs(), || format!("turbine {} has degree {}", j + 1, degree[j]));
    }
    report.record(Family::C3, degree[OSS] as f64 - opts.phi as f64, || format!("substation has {} feeders", degree[OSS]));
    for &(a, b) in &graph.crossings {
        if d.is_active(a) && d.is_active(b) {
            report.record(Family::C4, 1.0, || format!("edges {a} and {b} cross"));
        }
    }

    let flow_bound = input.max_capacity();
    for lf in &d.leaves {
        let leaf = lf.leaf;
        let failed = input.failed_edge(leaf);
        let generation = opts.turbine_current(input.tree.winds[leaf.wind].magnitude);
        let cap = input.curtailment_cap(leaf.wind);
        let mut net_out = vec![0.0; graph.n_nodes()];
        for (ei, e) in graph.edges.iter().enumerate() {
            net_out[e.a] += lf.flows[ei];
            net_out[e.b] -= lf.flows[ei];
        }
        for j in 1..graph.n_nodes() {
            let residual = net_out[j] + lf.curtailment[j - 1] - generation;
            report.conservation.push((leaf, j, residual));
            report.record(Family::C5, residual.abs(), || format!("turbine {} at leaf {leaf:?}", j + 1));
            let dl = lf.curtailment[j - 1];
            report.record(Family::C14, (-dl).max(dl - cap), || format!("curtailment {dl} at turbine {} leaf {leaf:?}", j + 1));
        }
        for (ei, e) in graph.edges.iter().enumerate() {
            let flow = lf.flows[ei];
            let installed = d.cable[ei];
            let is_failed = failed == Some(ei);
            if let (Some(t), false) = (installed, is_failed) {
                let b = susceptance(graph.lengths[ei], &cables[t], opts.v_n_kv);
                let mismatch = flow - b * (lf.angles[e.a] - lf.angles[e.b]);
                report.record(Family::C6, mismatch, || format!("edge {ei} leaf {leaf:?} DC flow mismatch"));
                report.record(Family::C7, -mismatch, || format!("edge {ei} leaf {leaf:?} DC flow mismatch"));
            }
            let capacity = match (installed, is_failed) {
                (Some(t), false) => cables[t].capacity_a,
                _ => 0.0,
            };
            report.record(Family::C8, flow - capacity, || format!("edge {ei} leaf {leaf:?} carries {flow} A over {capacity} A"));
            report.record(Family::C9, -flow - capacity, || format!("edge {ei} leaf {leaf:?} carries {flow} A over {capacity} A"));
            report.record(Family::C13, flow.abs() - flow_bound, || format!("edge {ei} leaf {leaf:?} exceeds the flow bound"));
        }
        for (i, th) in lf.angles.iter().enumerate() {
            report.record(Family::C12, th.abs() - ANGLE_BOUND, || format!("angle at node {} leaf {leaf:?}", i + 1));
        }
    }
    report
}
