//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use petal::backend::{BackendConfig, SolveResult};
use petal::catalog::{ObjectiveMode, SubType};
use petal::evaluate::EvalContext;
use petal::geometry::{build_candidate_graph, CandidateGraph, Point};
use petal::model::{build_model, ModelIR, ModelOptions};
use petal::scenario::{build_system_states, FailureParams, ScenarioTree, WindScenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const P_N: f64 = 5.0;
pub const V_N: f64 = 33.0;

pub fn cable(capacity_a: f64, cost_per_m: f64, x_ohm_per_km: f64) -> SubType {
    SubType {
        parent: 0,
        capacity_a,
        cost_per_m,
        resistance_ohm_per_m: 1e-4,
        reactance_ohm_per_m: x_ohm_per_km / 1000.0,
        loss_cost_per_m: 0.0,
    }
}

pub fn two_winds() -> Vec<WindScenario> {
    vec![
        WindScenario { id: 1, magnitude: 1.0, duration_h: 4000.0, nominal: true },
        WindScenario { id: 2, magnitude: 0.4, duration_h: 6000.0, nominal: false },
    ]
}

pub fn options(phi: usize, zero_curtailment: bool) -> ModelOptions {
    ModelOptions { mode: ObjectiveMode::InvestmentReliability, phi, c_e: 2.86, v_n_kv: V_N, p_n_mw: P_N, zero_curtailment }
}

#[derive(Clone, Debug)]
pub struct Case {
    pub seed: u64,
    pub graph: CandidateGraph,
    pub cables: Vec<SubType>,
    pub winds: Vec<WindScenario>,
    pub options: ModelOptions,
    pub failure: FailureParams,
}

/// Turbines on a jittered grid with ~600 m spacing, the substation just
/// outside one side; 1 or 2 cable types able to carry 2 and 4 turbines.
pub fn random_case(seed: u64, n_w: usize, n_types: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (n_w as f64).sqrt().ceil() as usize;
    let mut pts = vec![Point::new(1, -700.0 + rng.gen_range(-100.0..100.0), 300.0 * cols as f64 + rng.gen_range(-200.0..200.0))];
    for i in 0..n_w {
        let (r, c) = (i / cols, i % cols);
        let x = 600.0 * c as f64 + rng.gen_range(-150.0..150.0);
        let y = 600.0 * r as f64 + rng.gen_range(-150.0..150.0);
        pts.push(Point::new(i + 2, x, y));
    }
    let upsilon = 3.min(n_w - 1);
    let sigma = n_w.min(4);
    let graph = build_candidate_graph(pts, upsilon, sigma).unwrap();
    let all = [cable(180.0, 300.0, 0.13), cable(360.0, 380.0, 0.12)];
    let cables = if n_types == 1 { vec![cable(360.0, 380.0, 0.12)] } else { all.to_vec() };
    let mtbf = rng.gen_range(1.0..10.0);
    let phi = if rng.gen_bool(0.5) { 4 } else { 2 * n_w.div_ceil(2).max(1) }.min(6);
    Case {
        seed,
        graph,
        cables,
        winds: two_winds(),
        options: options(phi, false),
        failure: FailureParams { mtbf_years_km: mtbf, mttr_h: 720.0 },
    }
}

impl Case {
    /// Failure states for every candidate edge.
    pub fn full_tree(&self) -> ScenarioTree {
        let edges: Vec<(usize, f64)> = (0..self.graph.edges.len()).map(|e| (e, self.graph.lengths[e])).collect();
        ScenarioTree::new(self.winds.clone(), build_system_states(&edges, &self.failure).unwrap()).unwrap()
    }

    pub fn tree_for(&self, edges: &[usize]) -> ScenarioTree {
        let list: Vec<(usize, f64)> = edges.iter().map(|&e| (e, self.graph.lengths[e])).collect();
        ScenarioTree::new(self.winds.clone(), build_system_states(&list, &self.failure).unwrap()).unwrap()
    }

    pub fn model(&self, tree: &ScenarioTree) -> ModelIR {
        build_model(&self.graph, &self.cables, tree, &self.options).unwrap()
    }

    pub fn context(&self, r_c: usize) -> EvalContext {
        EvalContext {
            graph: self.graph.clone(),
            cables: self.cables.clone(),
            winds: self.winds.clone(),
            options: self.options,
            failure: self.failure,
            reliability_level: r_c,
        }
    }
}

pub fn external() -> BackendConfig {
    BackendConfig { time_limit_s: 600.0, ..BackendConfig::default() }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn objective(r: &SolveResult) -> f64 {
    assert!(r.has_solution(), "no solution: {:?}", r.status);
    r.objective
}
