//! Cable catalog and the loss pre-processing that expands catalog types into
//! per-WT-count sub-types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{nominal_current, WindScenario};

/// Slack for floor operations on capacities that land exactly on a level.
const FLOOR_SLACK: f64 = 1e-9;

/// Losses factor for joule, screen and armouring losses in a three-phase cable.
const LOSS_FACTOR: f64 = 3.0 * 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CableType {
    /// Amperes.
    pub capacity_a: f64,
    /// Currency per meter.
    pub cost_per_m: f64,
    /// Ohm per meter.
    pub resistance_ohm_per_m: f64,
    /// Ohm per meter.
    pub reactance_ohm_per_m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    types: Vec<CableType>,
}

impl Catalog {
    /// Validates positivity and comonotonic capacity/cost ordering. Types are
    /// sorted by capacity first.
    pub fn new(mut types: Vec<CableType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("cable catalog is empty"));
        }
        for (i, t) in types.iter().enumerate() {
            let fields = [t.capacity_a, t.cost_per_m, t.resistance_ohm_per_m, t.reactance_ohm_per_m];
            if fields.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::invalid(format!("cable type {} has a non-positive field: {t:?}", i + 1)));
            }
        }
        types.sort_by(|a, b| a.capacity_a.total_cmp(&b.capacity_a).then(a.cost_per_m.total_cmp(&b.cost_per_m)));
        if types.windows(2).any(|w| w[1].cost_per_m < w[0].cost_per_m) {
            return Err(Error::invalid("cable costs must be non-decreasing in capacity"));
        }
        Ok(Catalog { types })
    }

    pub fn types(&self) -> &[CableType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// Number of turbines of `p_n_mw` at `v_n_kv` a cable can carry.
pub fn wt_capacity(t: &CableType, p_n_mw: f64, v_n_kv: f64) -> Result<usize> {
    let count = wt_capacity_stepped(t, p_n_mw, v_n_kv, 1.0)?;
    Ok(count.round() as usize)
}

/// Capacity in turbine units rounded down to a multiple of `step`.
fn wt_capacity_stepped(t: &CableType, p_n_mw: f64, v_n_kv: f64, step: f64) -> Result<f64> {
    if !(p_n_mw > 0.0 && v_n_kv > 0.0) {
        return Err(Error::invalid("nominal power and voltage must be positive"));
    }
    let raw = 3f64.sqrt() * v_n_kv * t.capacity_a / (p_n_mw * 1000.0);
    let units = (raw / step + FLOOR_SLACK).floor();
    if units < 1.0 {
        return Err(Error::invalid(format!("a {} A cable cannot carry a single {} MW turbine at {} kV", t.capacity_a, p_n_mw, v_n_kv)));
    }
    Ok(units * step)
}

/// A cable option as seen by the model: either a catalog type or a sub-type
/// of one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubType {
    /// Index into the catalog.
    pub parent: usize,
    /// Amperes.
    pub capacity_a: f64,
    /// Investment cost per meter, inherited from the parent.
    pub cost_per_m: f64,
    pub resistance_ohm_per_m: f64,
    pub reactance_ohm_per_m: f64,
    /// Lifetime losses cost per meter; zero until computed.
    pub loss_cost_per_m: f64,
}

impl SubType {
    fn from_parent(parent: usize, t: &CableType, capacity_a: f64) -> Self {
        SubType {
            parent,
            capacity_a,
            cost_per_m: t.cost_per_m,
            resistance_ohm_per_m: t.resistance_ohm_per_m,
            reactance_ohm_per_m: t.reactance_ohm_per_m,
            loss_cost_per_m: 0.0,
        }
    }

    pub fn total_cost_per_m(&self) -> f64 {
        self.cost_per_m + self.loss_cost_per_m
    }
}

/// Expands the catalog into sub-types at every `step` turbines up to the
/// largest cable's capacity. Each level inherits from the cheapest catalog
/// type that can carry it.
pub fn expand_subtypes(catalog: &Catalog, p_n_mw: f64, v_n_kv: f64, step: f64) -> Result<Vec<SubType>> {
    if catalog.is_empty() {
        return Err(Error::invalid("cable catalog is empty"));
    }
    if !(step > 0.0 && step <= 1.0) || ((1.0 / step) - (1.0 / step).round()).abs() > 1e-9 {
        return Err(Error::invalid(format!("sub-type step {step} must divide 1 evenly")));
    }
    let levels = catalog.types().iter().map(|t| wt_capacity_stepped(t, p_n_mw, v_n_kv, step)).collect::<Result<Vec<_>>>()?;
    let unit = nominal_current(p_n_mw, v_n_kv, 1.0);
    let max_level = levels.iter().cloned().fold(0.0, f64::max);
    let count = (max_level / step).round() as usize;

    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        let level = k as f64 * step;
        let parent = (0..catalog.len())
            .filter(|&i| levels[i] + FLOOR_SLACK >= level)
            .min_by(|&a, &b| catalog.types()[a].cost_per_m.total_cmp(&catalog.types()[b].cost_per_m).then(a.cmp(&b)))
            .expect("the largest type covers every level");
        out.push(SubType::from_parent(parent, &catalog.types()[parent], level * unit));
    }
    Ok(out)
}

/// Lifetime cost of losses per meter for a sub-type loaded at its full
/// capacity scaled by each scenario's magnitude.
pub fn loss_cost_per_meter(s: &SubType, scenarios: &[WindScenario], c_e: f64, v_n_kv: f64) -> f64 {
    let energy: f64 = scenarios
        .iter()
        .map(|w| {
            let i = s.capacity_a * w.magnitude;
            i * i * w.duration_h
        })
        .sum();
    LOSS_FACTOR * s.resistance_ohm_per_m * (c_e / (3f64.sqrt() * v_n_kv * 1000.0)) * energy
}

/// Which objective the model minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveMode {
    /// Investment plus reliability.
    InvestmentReliability,
    /// Investment plus pre-processed losses plus reliability, over sub-types.
    InvestmentLossesReliability,
}

/// Cable options handed to the model: catalog types as-is for the
/// investment+reliability objective, loss-priced sub-types otherwise.
pub fn model_cables(
    catalog: &Catalog,
    mode: ObjectiveMode,
    scenarios: &[WindScenario],
    p_n_mw: f64,
    v_n_kv: f64,
    c_e: f64,
    step: f64,
) -> Result<Vec<SubType>> {
    match mode {
        ObjectiveMode::InvestmentReliability => {
            for t in catalog.types() {
                wt_capacity(t, p_n_mw, v_n_kv)?;
            }
            Ok(catalog.types().iter().enumerate().map(|(i, t)| SubType::from_parent(i, t, t.capacity_a)).collect())
        }
        ObjectiveMode::InvestmentLossesReliability => {
            let mut subs = expand_subtypes(catalog, p_n_mw, v_n_kv, step)?;
            for s in &mut subs {
                s.loss_cost_per_m = loss_cost_per_meter(s, scenarios, c_e, v_n_kv);
            }
            Ok(subs)
        }
    }
}
