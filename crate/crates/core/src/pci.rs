//! Progressive contingency incorporation.
//!
//! A deterministic design (nominal wind, no failures, no curtailment) seeds
//! the loop. Each iteration adds the failure states of the active edges
//! within reliability level `r_c` to the modeled set and re-solves the
//! stochastic model until the active edges are all modeled. Each solve is
//! warm-started from the cheapest design seen so far under the new tree.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::backend::{solve, BackendConfig, SolveStatus};
use crate::error::{Error, Result};
use crate::evaluate::{recourse_cost, EvalContext};
use crate::geometry::{CandidateGraph, OSS};
use crate::model::{build_model, extract_design, Design, ModelInput};
use crate::scenario::{build_system_states, ScenarioTree, SystemState};

/// Level of every candidate edge in a design: 1 for feeders, one more per
/// hop away from the substation. `None` for inactive edges and for edges
/// not connected to the substation.
pub fn edge_levels(graph: &CandidateGraph, design: &Design) -> Vec<Option<usize>> {
    let n = graph.n_nodes();
    let mut adj = vec![Vec::new(); n];
    for e in design.active_edges() {
        let edge = graph.edges[e];
        adj[edge.a].push(edge.b);
        adj[edge.b].push(edge.a);
    }
    let mut dist = vec![usize::MAX; n];
    dist[OSS] = 0;
    let mut queue = VecDeque::from([OSS]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let d = dist[edge.a].min(dist[edge.b]);
            (design.is_active(e) && d != usize::MAX).then(|| d + 1)
        })
        .collect()
}

/// Level of one active edge; `Ok(None)` when it is cut off from the substation.
pub fn edge_level(graph: &CandidateGraph, design: &Design, edge: usize) -> Result<Option<usize>> {
    if edge >= graph.edges.len() || !design.is_active(edge) {
        return Err(Error::invalid(format!("edge {edge} is not active in the design")));
    }
    Ok(edge_levels(graph, design)[edge])
}

/// Active edges whose level is at most `r_c`.
pub fn selected_edges(graph: &CandidateGraph, design: &Design, r_c: usize) -> BTreeSet<usize> {
    edge_levels(graph, design).into_iter().enumerate().filter_map(|(e, l)| l.filter(|&l| l <= r_c).map(|_| e)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PciConfig {
    pub r_c: usize,
    #[serde(default = "default_kappa_max")]
    pub kappa_max: usize,
    pub backend: BackendConfig,
}

fn default_kappa_max() -> usize {
    20
}

impl PciConfig {
    pub fn new(r_c: usize, backend: BackendConfig) -> Self {
        PciConfig { r_c, kappa_max: default_kappa_max(), backend }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_c < 1 {
            return Err(Error::invalid("reliability level r_c must be at least 1"));
        }
        if self.kappa_max < 1 {
            return Err(Error::invalid("kappa_max must be at least 1"));
        }
        self.backend.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PciRecord {
    /// 0 for the deterministic seed solve.
    pub kappa: usize,
    /// Active edges within `r_c` after this solve.
    pub selected: BTreeSet<usize>,
    /// Edges whose failure states were modeled in this solve.
    pub modeled: BTreeSet<usize>,
    /// Number of system states including the base state.
    pub states: usize,
    pub objective: f64,
    pub status: SolveStatus,
    /// Relative MIP gap reported by the backend.
    pub gap: f64,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PciTrace {
    pub records: Vec<PciRecord>,
    pub converged: bool,
}

impl PciTrace {
    pub fn solves(&self) -> usize {
        self.records.len()
    }

    /// One line per iteration; edges are written `a-b` with 1-based node ids.
    pub fn to_text(&self, graph: &CandidateGraph) -> String {
        let set = |s: &BTreeSet<usize>| {
            let names: Vec<String> = s.iter().map(|&e| format!("{}-{}", graph.edges[e].a + 1, graph.edges[e].b + 1)).collect();
            format!("[{}]", names.join(","))
        };
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(
                out,
                "kappa={} status={:?} objective={:.6} gap={:.2e} states={} modeled={} selected={} time_s={:.3}",
                r.kappa,
                r.status,
                r.objective,
                r.gap,
                r.states,
                set(&r.modeled),
                set(&r.selected),
                r.wall_time.as_secs_f64()
            );
        }
        let _ = writeln!(out, "converged={}", self.converged);
        out
    }
}

struct Solved {
    design: Design,
    status: SolveStatus,
    objective: f64,
    gap: f64,
}

fn solve_tree(
    ctx: &EvalContext,
    tree: &ScenarioTree,
    zero_curtailment: bool,
    backend: &BackendConfig,
    warm: Option<&Design>,
) -> Result<Solved> {
    let mut opts = ctx.options;
    opts.zero_curtailment = zero_curtailment;
    let ir = build_model(&ctx.graph, &ctx.cables, tree, &opts)?;
    let ws = warm.map(|d| d.first_stage_assignment(&ir.index, ctx.cables.len()));
    let result = solve(&ir, backend, ws.as_deref())?;
    let assignment = match (&result.status, &result.assignment) {
        (SolveStatus::Infeasible, _) => return Err(Error::Infeasible("no closed-loop layout satisfies the constraints".into())),
        (_, None) => return Err(Error::solver(format!("solver stopped with status {:?} and no solution", result.status))),
        (_, Some(a)) => a,
    };
    let design = extract_design(&ir, assignment, Some(result.objective))?;
    Ok(Solved { design, status: result.status, objective: result.objective, gap: result.gap })
}

/// The deterministic seed design: nominal wind, base state only, no curtailment.
pub fn solve_deterministic(ctx: &EvalContext, backend: &BackendConfig) -> Result<Design> {
    let tree = ScenarioTree::deterministic(&ctx.winds)?;
    Ok(solve_tree(ctx, &tree, true, backend, None)?.design)
}

/// Failure states for `edges` plus the base state.
fn states_for(ctx: &EvalContext, edges: &BTreeSet<usize>) -> Result<Vec<SystemState>> {
    if edges.is_empty() {
        return Ok(vec![SystemState::base(1.0)]);
    }
    let list: Vec<(usize, f64)> = edges.iter().map(|&e| (e, ctx.graph.lengths[e])).collect();
    build_system_states(&list, &ctx.failure)
}

/// Runs the loop. The stochastic model of iteration κ contains every wind
/// scenario and the failure states of all edges selected so far; the base
/// state's probability is the remainder over exactly those states.
pub fn run_pci(ctx: &EvalContext, cfg: &PciConfig) -> Result<(Design, PciTrace)> {
    cfg.validate()?;
    let mut trace = PciTrace::default();

    let started = Instant::now();
    let det_tree = ScenarioTree::deterministic(&ctx.winds)?;
    let seed = solve_tree(ctx, &det_tree, true, &cfg.backend, None).map_err(|e| context(e, "deterministic solve"))?;
    let mut design = seed.design;
    let mut seen = vec![design.clone()];
    let mut selected = selected_edges(&ctx.graph, &design, cfg.r_c);
    trace.records.push(PciRecord {
        kappa: 0,
        selected: selected.clone(),
        modeled: BTreeSet::new(),
        states: 1,
        objective: seed.objective,
        status: seed.status,
        gap: seed.gap,
        wall_time: started.elapsed(),
    });

    let mut modeled = BTreeSet::new();
    for kappa in 1..=cfg.kappa_max {
        if selected.is_subset(&modeled) {
            trace.converged = true;
            break;
        }
        modeled.extend(selected.iter().copied());
        let started = Instant::now();
        let tree = ScenarioTree::new(ctx.winds.clone(), states_for(ctx, &modeled)?)?;
        let warm = cheapest(ctx, &tree, &seen)?;
        let next = solve_tree(ctx, &tree, false, &cfg.backend, Some(warm)).map_err(|e| context(e, &format!("iteration {kappa}")))?;
        design = next.design;
        seen.push(design.clone());
        selected = selected_edges(&ctx.graph, &design, cfg.r_c);
        trace.records.push(PciRecord {
            kappa,
            selected: selected.clone(),
            modeled: modeled.clone(),
            states: tree.states.len(),
            objective: next.objective,
            status: next.status,
            gap: next.gap,
            wall_time: started.elapsed(),
        });
    }
    if !trace.converged && selected.is_subset(&modeled) {
        trace.converged = true;
    }
    Ok((design, trace))
}

/// The candidate with the lowest investment plus recourse under `tree`.
fn cheapest<'a>(ctx: &EvalContext, tree: &ScenarioTree, candidates: &'a [Design]) -> Result<&'a Design> {
    let mut options = ctx.options;
    options.zero_curtailment = false;
    let input = ModelInput { graph: ctx.graph.clone(), cables: ctx.cables.clone(), tree: tree.clone(), options };
    let mut best: Option<(f64, &Design)> = None;
    for d in candidates {
        let (investment, losses) = d.first_stage_cost(&ctx.graph, &ctx.cables);
        let total = investment + losses + recourse_cost(d, &input)?.cost;
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, d));
        }
    }
    best.map(|(_, d)| d).ok_or_else(|| Error::Inconsistent("no warm-start candidate".into()))
}

fn context(e: Error, what: &str) -> Error {
    match e {
        Error::Infeasible(m) => Error::Infeasible(format!("{what}: {m}")),
        Error::Solver(m) => Error::Solver(format!("{what}: {m}")),
        Error::Inconsistent(m) => Error::Inconsistent(format!("{what}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ObjectiveMode;
    use crate::geometry::{Edge, Point};
    use crate::model::CostBreakdown;

    fn square() -> CandidateGraph {
        let nodes = vec![Point::new(1, 0.0, 0.0), Point::new(2, 1000.0, 0.0), Point::new(3, 1000.0, 1000.0), Point::new(4, 0.0, 1000.0)];
        let edges = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)].map(|(a, b)| Edge::new(a, b));
        CandidateGraph::from_edges(nodes, edges).unwrap()
    }

    fn design(graph: &CandidateGraph, active: &[(usize, usize)]) -> Design {
        let mut cable = vec![None; graph.edges.len()];
        for &(a, b) in active {
            cable[graph.edge_index(a, b).unwrap()] = Some(0);
        }
        Design { mode: ObjectiveMode::InvestmentReliability, cable, leaves: vec![], breakdown: CostBreakdown::default() }
    }

    #[test]
    fn levels_on_a_loop() {
        let g = square();
        let d = design(&g, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let lv = edge_levels(&g, &d);
        assert_eq!(lv[g.edge_index(0, 1).unwrap()], Some(1));
        assert_eq!(lv[g.edge_index(0, 3).unwrap()], Some(1));
        assert_eq!(lv[g.edge_index(1, 2).unwrap()], Some(2));
        assert_eq!(lv[g.edge_index(2, 3).unwrap()], Some(2));
        assert_eq!(lv[g.edge_index(0, 2).unwrap()], None);
        let feeders = selected_edges(&g, &d, 1);
        assert_eq!(feeders, BTreeSet::from([g.edge_index(0, 1).unwrap(), g.edge_index(0, 3).unwrap()]));
        assert!(edge_level(&g, &d, g.edge_index(0, 2).unwrap()).is_err());
    }

    #[test]
    fn isolated_cycle_has_no_level() {
        let g = square();
        let d = design(&g, &[(1, 2), (2, 3)]);
        let lv = edge_levels(&g, &d);
        assert!(lv.iter().all(Option::is_none));
        assert!(selected_edges(&g, &d, 100).is_empty());
    }

    #[test]
    fn config_ranges() {
        assert!(PciConfig::new(0, BackendConfig::enumeration()).validate().is_err());
        let mut c = PciConfig::new(1, BackendConfig::enumeration());
        c.kappa_max = 0;
        assert!(c.validate().is_err());
    }
}
