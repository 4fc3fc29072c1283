//! Second-stage evaluation of a fixed design: per-leaf minimum-curtailment DC
//! flow, the expected recourse cost, design comparison and a Monte-Carlo
//! cross-check of the expectation.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::SubType;
use crate::error::{Error, Result};
use crate::geometry::CandidateGraph;
use crate::model::{susceptance, CostBreakdown, Design, LeafFlow, ModelInput, ModelOptions, ANGLE_BOUND};
use crate::pci::edge_levels;
use crate::scenario::{build_system_states, FailureParams, Leaf, ScenarioTree, SystemState, WindScenario};

/// Solves the leaf LP: minimize total curtailment subject to conservation,
/// DC flow on installed non-failed edges, capacities and angle bounds.
///
/// Returns [`Error::Infeasible`] only when curtailment is fixed at zero and
/// the installed network cannot carry the generation.
pub fn scenario_flow(input: &ModelInput, cable: &[Option<usize>], leaf: Leaf) -> Result<LeafFlow> {
    let graph = &input.graph;
    let opts = &input.options;
    let failed = input.failed_edge(leaf);
    let generation = opts.turbine_current(input.tree.winds[leaf.wind].magnitude);
    let cap = input.curtailment_cap(leaf.wind);

    let live: Vec<(usize, f64, f64)> = cable
        .iter()
        .enumerate()
        .filter(|(e, c)| c.is_some() && failed != Some(*e))
        .map(|(e, c)| {
            let t = &input.cables[c.unwrap()];
            (e, susceptance(graph.lengths[e], t, opts.v_n_kv), t.capacity_a)
        })
        .collect();

    // angles are scaled so the susceptance coefficients are of order one
    let scale = if live.is_empty() { 1.0 } else { live.iter().map(|l| l.1).sum::<f64>() / live.len() as f64 };

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let angle: Vec<_> = (0..graph.n_nodes()).map(|_| lp.add_var(0.0, (-ANGLE_BOUND * scale, ANGLE_BOUND * scale))).collect();
    let curtail: Vec<_> = (1..graph.n_nodes()).map(|_| lp.add_var(1.0, (0.0, cap))).collect();

    // net outflow of node j as coefficients on the angles
    let mut outflow: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); graph.n_nodes()];
    for &(e, b, u) in &live {
        let edge = graph.edges[e];
        let k = b / scale;
        lp.add_constraint([(angle[edge.a], k), (angle[edge.b], -k)], ComparisonOp::Le, u);
        lp.add_constraint([(angle[edge.a], k), (angle[edge.b], -k)], ComparisonOp::Ge, -u);
        for (from, to) in [(edge.a, edge.b), (edge.b, edge.a)] {
            *outflow[from].entry(from).or_default() += k;
            *outflow[from].entry(to).or_default() -= k;
        }
    }
    for j in 1..graph.n_nodes() {
        let mut expr = LinearExpr::empty();
        for (&node, &c) in &outflow[j] {
            expr.add(angle[node], c);
        }
        expr.add(curtail[j - 1], 1.0);
        lp.add_constraint(expr, ComparisonOp::Eq, generation);
    }

    let solution = match lp.solve() {
        Ok(outcome) => outcome.into_solution().map_err(|_| Error::solver("leaf LP interrupted"))?,
        Err(microlp::Error::Infeasible) => return Err(Error::Infeasible(format!("leaf {leaf:?} cannot be operated without curtailment"))),
        Err(e) => return Err(Error::solver(format!("leaf LP failed: {e}"))),
    };

    let angles: Vec<f64> = angle.iter().map(|&v| solution.var_value(v) / scale).collect();
    let mut flows = vec![0.0; graph.edges.len()];
    for &(e, b, _) in &live {
        let edge = graph.edges[e];
        flows[e] = b * (angles[edge.a] - angles[edge.b]);
    }
    let curtailment: Vec<f64> = curtail.iter().map(|&v| solution.var_value(v).clamp(0.0, cap)).collect();
    let cost = input.curtailment_weight(leaf) * curtailment.iter().sum::<f64>();
    Ok(LeafFlow { leaf, flows, angles, curtailment, cost })
}

/// Expected curtailment cost of a design over a tree, with per-leaf detail.
#[derive(Clone, Debug, PartialEq)]
pub struct Recourse {
    pub cost: f64,
    pub leaves: Vec<LeafFlow>,
}

/// Sums the probability- and duration-weighted curtailment cost of every
/// leaf. Failure states of edges the design does not use reuse the base
/// state's operation.
pub fn recourse_cost(design: &Design, input: &ModelInput) -> Result<Recourse> {
    let tree = &input.tree;
    let base = tree.base_state();
    let mut leaves = Vec::with_capacity(tree.n_leaves());
    let mut cost = 0.0;
    let mut compensation = 0.0;
    for w in 0..tree.winds.len() {
        let base_leaf = Leaf { wind: w, state: base };
        let base_flow = scenario_flow(input, &design.cable, base_leaf)?;
        for s in 0..tree.states.len() {
            let leaf = Leaf { wind: w, state: s };
            let flow = match tree.states[s].failed_edge {
                Some(e) if design.is_active(e) => scenario_flow(input, &design.cable, leaf)?,
                _ => LeafFlow { leaf, cost: input.curtailment_weight(leaf) * base_flow.total_curtailment(), ..base_flow.clone() },
            };
            // Kahan summation
            let y = flow.cost - compensation;
            let t = cost + y;
            compensation = (t - cost) - y;
            cost = t;
            leaves.push(flow);
        }
    }
    Ok(Recourse { cost, leaves })
}

/// Parameters to evaluate any design of an instance.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub graph: CandidateGraph,
    pub cables: Vec<SubType>,
    pub winds: Vec<WindScenario>,
    pub options: ModelOptions,
    pub failure: FailureParams,
    /// Edges whose level exceeds this are not subject to failure.
    pub reliability_level: usize,
}

impl EvalContext {
    /// Failure states of the design's active edges within the reliability
    /// level, plus the base state.
    pub fn states_for(&self, design: &Design) -> Result<Vec<SystemState>> {
        let levels = edge_levels(&self.graph, design);
        let edges: Vec<(usize, f64)> = design
            .active_edges()
            .into_iter()
            .filter(|&e| levels[e].is_some_and(|l| l <= self.reliability_level))
            .map(|e| (e, self.graph.lengths[e]))
            .collect();
        if edges.is_empty() {
            return Ok(vec![SystemState::base(1.0)]);
        }
        build_system_states(&edges, &self.failure)
    }

    /// Recourse inputs for a design: all wind scenarios, curtailment free.
    pub fn input_for(&self, design: &Design) -> Result<ModelInput> {
        let tree = ScenarioTree::new(self.winds.clone(), self.states_for(design)?)?;
        let mut options = self.options;
        options.zero_curtailment = false;
        Ok(ModelInput { graph: self.graph.clone(), cables: self.cables.clone(), tree, options })
    }

    /// Investment (and losses) from the first stage, reliability from the
    /// recourse over the design's own contingencies.
    pub fn cost_of(&self, design: &Design) -> Result<CostBreakdown> {
        let (investment, losses) = design.first_stage_cost(&self.graph, &self.cables);
        let reliability = recourse_cost(design, &self.input_for(design)?)?.cost;
        Ok(CostBreakdown { investment, losses, reliability })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mtbf: f64,
    pub deterministic: CostBreakdown,
    pub stochastic: CostBreakdown,
    /// `(det - stoch) / stoch_total * 100` for the total.
    pub total_pct: f64,
    pub investment_pct: f64,
    pub reliability_pct: f64,
}

impl ComparisonRow {
    pub fn new(mtbf: f64, det: CostBreakdown, stoch: CostBreakdown) -> Self {
        let base = stoch.total();
        let pct = |d: f64, s: f64| if base == 0.0 { 0.0 } else { (d - s) / base * 100.0 };
        ComparisonRow {
            mtbf,
            deterministic: det,
            stochastic: stoch,
            total_pct: pct(det.total(), stoch.total()),
            investment_pct: pct(det.investment + det.losses, stoch.investment + stoch.losses),
            reliability_pct: pct(det.reliability, stoch.reliability),
        }
    }

    pub const CSV_HEADER: &'static str =
        "mtbf,det_investment,det_losses,det_reliability,det_total,stoch_investment,stoch_losses,stoch_reliability,stoch_total,diff_total_pct,diff_investment_pct,diff_reliability_pct";

    pub fn csv(&self) -> String {
        let d = &self.deterministic;
        let s = &self.stochastic;
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.mtbf,
            d.investment,
            d.losses,
            d.reliability,
            d.total(),
            s.investment,
            s.losses,
            s.reliability,
            s.total(),
            self.total_pct,
            self.investment_pct,
            self.reliability_pct
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ComparisonRow::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }
}

/// Costs both designs under the context's failure parameters. Percentages
/// are relative to the stochastic design's total cost, so positive values
/// mean the stochastic design is cheaper.
pub fn compare_designs(det: &Design, stoch: &Design, ctx: &EvalContext) -> Result<ComparisonRow> {
    Ok(ComparisonRow::new(ctx.failure.mtbf_years_km, ctx.cost_of(det)?, ctx.cost_of(stoch)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Samples one system state (by probability) and one wind scenario (by
/// duration) per trial and scores `c_e * horizon * curtailment`. Unbiased for
/// the recourse cost when `horizon_h` equals the total scenario duration.
pub fn monte_carlo_curtailment(design: &Design, input: &ModelInput, horizon_h: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::invalid("Monte-Carlo needs at least one sample"));
    }
    let tree = &input.tree;
    let state_dist =
        WeightedIndex::new(tree.states.iter().map(|s| s.probability)).map_err(|e| Error::invalid(format!("state probabilities: {e}")))?;
    let wind_dist =
        WeightedIndex::new(tree.winds.iter().map(|w| w.duration_h)).map_err(|e| Error::invalid(format!("wind durations: {e}")))?;

    // curtailment per leaf, solved lazily
    let mut cache: Vec<Option<f64>> = vec![None; tree.n_leaves()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..n_samples {
        let leaf = Leaf { wind: wind_dist.sample(&mut rng), state: state_dist.sample(&mut rng) };
        let slot = tree.leaf_index(leaf);
        let curtailed = match cache[slot] {
            Some(v) => v,
            None => {
                let v = scenario_flow(input, &design.cable, leaf)?.total_curtailment();
                cache[slot] = Some(v);
                v
            }
        };
        let x = input.options.c_e * horizon_h * curtailed;
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let variance = if n_samples > 1 { m2 / (n_samples - 1) as f64 } else { 0.0 };
    Ok(McEstimate { mean, std_error: (variance / n_samples as f64).sqrt(), samples: n_samples, seed })
}
