//! Wind scenarios, N-1 system states and the two-stage scenario tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Normalization tolerance for state probabilities.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindScenario {
    pub id: usize,
    /// Per-unit generation, in `[0, 1]`.
    pub magnitude: f64,
    /// Hours over the project lifetime.
    pub duration_h: f64,
    /// The nominal scenario runs every turbine at full output.
    pub nominal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub id: usize,
    /// Candidate-graph edge index; `None` is the intact base state.
    pub failed_edge: Option<usize>,
    pub probability: f64,
}

impl SystemState {
    pub fn base(probability: f64) -> Self {
        SystemState { id: 0, failed_edge: None, probability }
    }

    pub fn is_base(&self) -> bool {
        self.failed_edge.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureParams {
    /// Mean time between failures, years·km per failure.
    pub mtbf_years_km: f64,
    /// Mean time to repair, hours.
    pub mttr_h: f64,
}

impl FailureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mtbf_years_km > 0.0) || !(self.mttr_h > 0.0) || self.mttr_h.is_infinite() {
            return Err(Error::invalid(format!("MTBF and MTTR must be positive, got {self:?}")));
        }
        Ok(())
    }
}

/// Two-state Markov unavailability of a cable of length `length_m`.
pub fn failure_probability(p: &FailureParams, length_m: f64) -> f64 {
    let length_km = length_m / 1000.0;
    if p.mtbf_years_km.is_infinite() || p.mttr_h <= 0.0 {
        return 0.0;
    }
    p.mttr_h / (p.mttr_h + p.mtbf_years_km * HOURS_PER_YEAR / length_km)
}

/// Current injected by one turbine, Amperes.
pub fn nominal_current(p_n_mw: f64, v_n_kv: f64, magnitude: f64) -> f64 {
    p_n_mw * magnitude * 1000.0 / (3f64.sqrt() * v_n_kv)
}

/// One failure state per listed edge plus the base state (id 0, first), whose
/// probability is the normalization remainder.
pub fn build_system_states(edges: &[(usize, f64)], p: &FailureParams) -> Result<Vec<SystemState>> {
    if edges.is_empty() {
        return Err(Error::invalid("no edges to attach failure states to"));
    }
    p.validate()?;
    let mut states = vec![SystemState::base(1.0)];
    let mut total = 0.0;
    for (k, &(edge, length)) in edges.iter().enumerate() {
        if !(length > 0.0) {
            return Err(Error::invalid(format!("edge {edge} has non-positive length {length}")));
        }
        let psi = failure_probability(p, length);
        total += psi;
        states.push(SystemState { id: k + 1, failed_edge: Some(edge), probability: psi });
    }
    if total >= 1.0 {
        return Err(Error::invalid(format!(
            "failure probabilities sum to {total:.6} >= 1; MTBF {} / MTTR {} make the N-1 assumption invalid",
            p.mtbf_years_km, p.mttr_h
        )));
    }
    states[0].probability = 1.0 - total;
    Ok(states)
}

/// Index of a leaf `(wind, state)` of the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Leaf {
    pub wind: usize,
    pub state: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub winds: Vec<WindScenario>,
    pub states: Vec<SystemState>,
}

impl ScenarioTree {
    pub fn new(winds: Vec<WindScenario>, states: Vec<SystemState>) -> Result<Self> {
        validate_winds(&winds)?;
        if states.is_empty() {
            return Err(Error::invalid("scenario tree has no system states"));
        }
        if states.iter().filter(|s| s.is_base()).count() != 1 {
            return Err(Error::invalid("scenario tree needs exactly one base (no-failure) state"));
        }
        let mut failed: Vec<usize> = states.iter().filter_map(|s| s.failed_edge).collect();
        failed.sort_unstable();
        if failed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("an edge has more than one failure state"));
        }
        if states.iter().any(|s| !(0.0..=1.0).contains(&s.probability)) {
            return Err(Error::invalid("state probabilities must lie in [0, 1]"));
        }
        let sum: f64 = states.iter().map(|s| s.probability).sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::invalid(format!("state probabilities sum to {sum}, expected 1")));
        }
        Ok(ScenarioTree { winds, states })
    }

    /// The single-leaf tree `{nominal wind, base state}`.
    pub fn deterministic(winds: &[WindScenario]) -> Result<Self> {
        validate_winds(winds)?;
        let nominal = *winds.iter().find(|w| w.nominal).expect("validated");
        ScenarioTree::new(vec![nominal], vec![SystemState::base(1.0)])
    }

    pub fn n_leaves(&self) -> usize {
        self.winds.len() * self.states.len()
    }

    /// Leaves in wind-major order.
    pub fn leaves(&self) -> impl Iterator<Item = Leaf> + '_ {
        let ns = self.states.len();
        (0..self.winds.len()).flat_map(move |w| (0..ns).map(move |s| Leaf { wind: w, state: s }))
    }

    pub fn leaf_index(&self, leaf: Leaf) -> usize {
        leaf.wind * self.states.len() + leaf.state
    }

    pub fn base_state(&self) -> usize {
        self.states.iter().position(|s| s.is_base()).expect("validated")
    }

    pub fn total_hours(&self) -> f64 {
        self.winds.iter().map(|w| w.duration_h).sum()
    }
}

/// Cross product of wind scenarios and system states.
pub fn build_scenario_tree(winds: Vec<WindScenario>, states: Vec<SystemState>) -> Result<ScenarioTree> {
    ScenarioTree::new(winds, states)
}

pub fn validate_winds(winds: &[WindScenario]) -> Result<()> {
    if winds.is_empty() {
        return Err(Error::invalid("no wind scenarios"));
    }
    for w in winds {
        if !(0.0..=1.0).contains(&w.magnitude) {
            return Err(Error::invalid(format!("wind scenario {} magnitude {} outside [0, 1]", w.id, w.magnitude)));
        }
        if !(w.duration_h > 0.0) || !w.duration_h.is_finite() {
            return Err(Error::invalid(format!("wind scenario {} duration must be positive", w.id)));
        }
    }
    let nominal: Vec<&WindScenario> = winds.iter().filter(|w| w.nominal).collect();
    match nominal.as_slice() {
        [n] if n.magnitude == 1.0 => Ok(()),
        [n] => Err(Error::invalid(format!("nominal scenario {} must have magnitude 1", n.id))),
        [] => Err(Error::invalid("no nominal wind scenario")),
        _ => Err(Error::invalid("more than one nominal wind scenario")),
    }
}
