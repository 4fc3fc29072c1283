//! Exhaustive oracle for desk-scale instances.
//!
//! Topologies are edge subsets in which every turbine has degree two, the
//! substation has at most `phi` feeders and no two edges cross. Each topology
//! is then tried with every cable assignment, pruned by an investment lower
//! bound and by aborting leaf evaluation once the running cost exceeds the
//! incumbent. Assigning only the cheapest sufficient cable is not exact under
//! the stochastic objective (a larger cable can cut curtailment and its
//! reactance moves the loop flow split), so the full product is searched.

use std::time::Instant;

use super::{SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::evaluate::scenario_flow;
use crate::geometry::OSS;
use crate::model::{CostBreakdown, Design, LeafFlow, ModelIR, ModelInput};
use crate::scenario::Leaf;

pub const ENUMERATION_MAX_TURBINES: usize = 8;

const MAX_TOPOLOGIES: usize = 2_000_000;

/// Best design found by [`enumerate_optimal`], or `None` when no topology
/// admits a feasible operation.
#[derive(Clone, Debug)]
pub struct Enumerated {
    pub design: Option<Design>,
    pub topologies: usize,
    pub assignments: usize,
    started: Instant,
}

impl Enumerated {
    /// Dense IR assignment of the optimum.
    pub fn into_result(self, ir: &ModelIR) -> SolveResult {
        let wall_time = self.started.elapsed();
        let Some(design) = self.design else {
            return SolveResult { status: SolveStatus::Infeasible, assignment: None, objective: f64::INFINITY, gap: 0.0, wall_time };
        };
        let index = &ir.index;
        let mut values = vec![0.0; ir.variables.len()];
        for (v, x) in design.first_stage_assignment(index, ir.input.cables.len()) {
            values[v] = x;
        }
        for lf in &design.leaves {
            let li = ir.input.tree.leaf_index(lf.leaf);
            for (e, f) in lf.flows.iter().enumerate() {
                values[index.flow(li, e)] = *f;
            }
            for (i, a) in lf.angles.iter().enumerate() {
                values[index.angle(li, i)] = *a;
            }
            for (j, d) in lf.curtailment.iter().enumerate() {
                values[index.curtail(li, j + 1)] = *d;
            }
        }
        let objective = ir.evaluate_objective(&values);
        SolveResult { status: SolveStatus::Optimal, assignment: Some(values), objective, gap: 0.0, wall_time }
    }
}

/// All admissible edge subsets, each as sorted edge indices.
pub(crate) fn topologies(input: &ModelInput) -> Result<Vec<Vec<usize>>> {
    let graph = &input.graph;
    let n = graph.n_nodes();
    let m = graph.edges.len();
    let mut crosses = vec![Vec::new(); m];
    for &(a, b) in &graph.crossings {
        crosses[a].push(b);
        crosses[b].push(a);
    }
    let mut remaining = vec![0usize; n];
    for e in &graph.edges {
        remaining[e.a] += 1;
        remaining[e.b] += 1;
    }
    let cap = |node: usize| if node == OSS { input.options.phi } else { 2 };

    struct Search<'a> {
        edges: &'a [crate::geometry::Edge],
        crosses: &'a [Vec<usize>],
        degree: Vec<usize>,
        remaining: Vec<usize>,
        chosen: Vec<bool>,
        stack: Vec<usize>,
        out: Vec<Vec<usize>>,
        overflow: bool,
    }

    fn dfs(s: &mut Search, pos: usize, cap: &dyn Fn(usize) -> usize) {
        if s.overflow {
            return;
        }
        if pos == s.edges.len() {
            if s.degree[1..].iter().all(|&d| d == 2) {
                if s.out.len() == MAX_TOPOLOGIES {
                    s.overflow = true;
                    return;
                }
                s.out.push(s.stack.clone());
            }
            return;
        }
        let e = s.edges[pos];
        s.remaining[e.a] -= 1;
        s.remaining[e.b] -= 1;
        if s.degree[e.a] < cap(e.a) && s.degree[e.b] < cap(e.b) && !s.crosses[pos].iter().any(|&o| s.chosen[o]) {
            s.degree[e.a] += 1;
            s.degree[e.b] += 1;
            s.chosen[pos] = true;
            s.stack.push(pos);
            dfs(s, pos + 1, cap);
            s.stack.pop();
            s.chosen[pos] = false;
            s.degree[e.a] -= 1;
            s.degree[e.b] -= 1;
        }
        let viable = |node: usize| node == OSS || s.degree[node] + s.remaining[node] >= 2;
        if viable(e.a) && viable(e.b) {
            dfs(s, pos + 1, cap);
        }
        s.remaining[e.a] += 1;
        s.remaining[e.b] += 1;
    }

    let mut s = Search {
        edges: &graph.edges,
        crosses: &crosses,
        degree: vec![0; n],
        remaining,
        chosen: vec![false; m],
        stack: Vec::new(),
        out: Vec::new(),
        overflow: false,
    };
    dfs(&mut s, 0, &cap);
    if s.overflow {
        return Err(Error::invalid(format!("more than {MAX_TOPOLOGIES} topologies; instance too large to enumerate")));
    }
    Ok(s.out)
}

/// Curtailment cost of a cable assignment, or `None` once it reaches
/// `budget` or the operation is infeasible.
struct Evaluator<'a> {
    input: &'a ModelInput,
    /// `(wind, weight of base-like leaves)`, then failure leaves per wind.
    plan: Vec<Leaf>,
}

impl<'a> Evaluator<'a> {
    fn new(input: &'a ModelInput) -> Self {
        let tree = &input.tree;
        let base = tree.base_state();
        let mut plan: Vec<Leaf> =
            (0..tree.winds.len()).filter(|&w| tree.winds[w].magnitude > 0.0).map(|w| Leaf { wind: w, state: base }).collect();
        for w in 0..tree.winds.len() {
            if tree.winds[w].magnitude > 0.0 {
                plan.extend((0..tree.states.len()).filter(|&s| s != base).map(|s| Leaf { wind: w, state: s }));
            }
        }
        Evaluator { input, plan }
    }

    fn reliability(&self, cable: &[Option<usize>], budget: f64) -> Result<Option<f64>> {
        let tree = &self.input.tree;
        let mut base_curtailment = vec![0.0; tree.winds.len()];
        let mut total = 0.0;
        for &leaf in &self.plan {
            let state = &tree.states[leaf.state];
            let curtailed = match state.failed_edge {
                Some(e) if cable[e].is_some() => match scenario_flow(self.input, cable, leaf) {
                    Ok(f) => f.total_curtailment(),
                    Err(Error::Infeasible(_)) => return Ok(None),
                    Err(e) => return Err(e),
                },
                Some(_) => base_curtailment[leaf.wind],
                None => {
                    let c = match scenario_flow(self.input, cable, leaf) {
                        Ok(f) => f.total_curtailment(),
                        Err(Error::Infeasible(_)) => return Ok(None),
                        Err(e) => return Err(e),
                    };
                    base_curtailment[leaf.wind] = c;
                    c
                }
            };
            total += self.input.curtailment_weight(leaf) * curtailed;
            if total >= budget {
                return Ok(None);
            }
        }
        Ok(Some(total))
    }
}

fn first_stage(input: &ModelInput, cable: &[Option<usize>]) -> f64 {
    cable.iter().enumerate().filter_map(|(e, c)| c.map(|t| input.cables[t].total_cost_per_m() * input.graph.lengths[e])).sum()
}

/// Cheapest cable per edge able to carry the nominal base-state flow obtained
/// with every edge at the largest cable.
fn sufficient_assignment(input: &ModelInput, topo: &[usize]) -> Result<Option<Vec<Option<usize>>>> {
    let largest =
        (0..input.cables.len()).max_by(|&a, &b| input.cables[a].capacity_a.total_cmp(&input.cables[b].capacity_a)).expect("cables");
    let mut cable = vec![None; input.graph.edges.len()];
    for &e in topo {
        cable[e] = Some(largest);
    }
    let tree = &input.tree;
    let nominal = tree.winds.iter().position(|w| w.nominal).unwrap_or(0);
    let flow = match scenario_flow(input, &cable, Leaf { wind: nominal, state: tree.base_state() }) {
        Ok(f) => f,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    for &e in topo {
        let need = flow.flows[e].abs();
        cable[e] = (0..input.cables.len())
            .filter(|&t| input.cables[t].capacity_a + 1e-9 >= need)
            .min_by(|&a, &b| input.cables[a].total_cost_per_m().total_cmp(&input.cables[b].total_cost_per_m()));
    }
    Ok(Some(cable))
}

pub fn enumerate_optimal(input: &ModelInput) -> Result<Enumerated> {
    let started = Instant::now();
    let n_w = input.graph.n_turbines();
    if n_w > ENUMERATION_MAX_TURBINES {
        return Err(Error::invalid(format!("enumeration backend is limited to {ENUMERATION_MAX_TURBINES} turbines, instance has {n_w}")));
    }
    let topos = topologies(input)?;
    let eval = Evaluator::new(input);
    let n_cables = input.cables.len();
    let mut best_cost = f64::INFINITY;
    let mut best: Option<Vec<Option<usize>>> = None;
    let mut assignments = 0;

    let consider = |cable: Vec<Option<usize>>, best_cost: &mut f64, best: &mut Option<Vec<Option<usize>>>| -> Result<()> {
        let fs = first_stage(input, &cable);
        if fs >= *best_cost {
            return Ok(());
        }
        if let Some(rel) = eval.reliability(&cable, *best_cost - fs)? {
            *best_cost = fs + rel;
            *best = Some(cable);
        }
        Ok(())
    };

    // heuristic incumbents tighten the bound before the exact search
    for topo in &topos {
        if let Some(cable) = sufficient_assignment(input, topo)? {
            if cable.iter().enumerate().all(|(e, c)| c.is_some() == topo.contains(&e)) {
                consider(cable, &mut best_cost, &mut best)?;
            }
        }
    }

    for topo in &topos {
        let costs: Vec<Vec<f64>> =
            topo.iter().map(|&e| input.cables.iter().map(|c| c.total_cost_per_m() * input.graph.lengths[e]).collect()).collect();
        let mut suffix = vec![0.0; topo.len() + 1];
        for i in (0..topo.len()).rev() {
            suffix[i] = suffix[i + 1] + costs[i].iter().cloned().fold(f64::INFINITY, f64::min);
        }
        if suffix[0] >= best_cost {
            continue;
        }
        // odometer over cable choices, skipping subtrees by the bound
        let mut choice = vec![0usize; topo.len()];
        let mut partial = vec![0.0; topo.len() + 1];
        let mut depth = 0;
        loop {
            if depth == topo.len() {
                assignments += 1;
                let mut cable = vec![None; input.graph.edges.len()];
                for (i, &e) in topo.iter().enumerate() {
                    cable[e] = Some(choice[i]);
                }
                consider(cable, &mut best_cost, &mut best)?;
                depth -= 1;
                choice[depth] += 1;
                continue;
            }
            if choice[depth] == n_cables {
                if depth == 0 {
                    break;
                }
                choice[depth] = 0;
                depth -= 1;
                choice[depth] += 1;
                continue;
            }
            partial[depth + 1] = partial[depth] + costs[depth][choice[depth]];
            if partial[depth + 1] + suffix[depth + 1] >= best_cost {
                choice[depth] += 1;
                continue;
            }
            depth += 1;
        }
    }

    let design = match best {
        Some(cable) => Some(operate(input, cable)?),
        None => None,
    };
    Ok(Enumerated { design, topologies: topos.len(), assignments, started })
}

/// Full design with every leaf solved.
fn operate(input: &ModelInput, cable: Vec<Option<usize>>) -> Result<Design> {
    let tree = &input.tree;
    let base = tree.base_state();
    let mut base_flows: Vec<Option<LeafFlow>> = vec![None; tree.winds.len()];
    let mut leaves = Vec::with_capacity(tree.n_leaves());
    let mut reliability = 0.0;
    for leaf in tree.leaves() {
        let flow = match tree.states[leaf.state].failed_edge {
            Some(e) if cable[e].is_some() => scenario_flow(input, &cable, leaf)?,
            _ => {
                if base_flows[leaf.wind].is_none() {
                    base_flows[leaf.wind] = Some(scenario_flow(input, &cable, Leaf { wind: leaf.wind, state: base })?);
                }
                let b = base_flows[leaf.wind].as_ref().unwrap();
                LeafFlow { leaf, cost: input.curtailment_weight(leaf) * b.total_curtailment(), ..b.clone() }
            }
        };
        reliability += flow.cost;
        leaves.push(flow);
    }
    let mut design = Design { mode: input.options.mode, cable, leaves, breakdown: CostBreakdown::default() };
    let (investment, losses) = design.first_stage_cost(&input.graph, &input.cables);
    design.breakdown = CostBreakdown { investment, losses, reliability };
    Ok(design)
}
