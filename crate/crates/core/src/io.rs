//! Instance and design files.
//!
//! Both are TOML documents with a `schema_version` key; unknown keys are
//! rejected. The grammar is documented in `docs/formats.md`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::BackendConfig;
use crate::catalog::{model_cables, CableType, Catalog, ObjectiveMode, SubType};
use crate::error::{Error, Result};
use crate::evaluate::EvalContext;
use crate::geometry::{build_candidate_graph, CandidateGraph, Point};
use crate::model::{CostBreakdown, Design, ModelOptions};
use crate::pci::PciConfig;
use crate::scenario::{validate_winds, FailureParams, WindScenario};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Electrical {
    pub p_n_mw: f64,
    pub v_n_kv: f64,
    /// Currency per ampere-hour of curtailed current.
    pub c_e: f64,
    pub lifetime_years: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    /// Nearest turbines connected to each turbine.
    pub upsilon: usize,
    /// Shortest turbine-substation edges kept.
    pub sigma: usize,
    /// Feeder limit at the substation.
    pub phi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub objective: ObjectiveMode,
    /// Reliability level: edges up to this depth from the substation may fail.
    pub r_c: usize,
    #[serde(default = "default_step")]
    pub subtype_step: f64,
    #[serde(default = "default_kappa_max")]
    pub kappa_max: usize,
}

fn default_step() -> f64 {
    1.0
}

fn default_kappa_max() -> usize {
    20
}

/// Catalog row in file units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSpec {
    pub capacity_a: f64,
    /// k-currency per km, numerically currency per meter.
    pub cost_k_per_km: f64,
    pub resistance_ohm_per_km: f64,
    pub reactance_ohm_per_km: f64,
}

impl CableSpec {
    pub fn to_type(&self) -> CableType {
        CableType {
            capacity_a: self.capacity_a,
            cost_per_m: self.cost_k_per_km,
            resistance_ohm_per_m: self.resistance_ohm_per_km / 1000.0,
            reactance_ohm_per_m: self.reactance_ohm_per_km / 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub mtbf_years_km: f64,
    pub mttr_h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wind {
    pub id: usize,
    pub magnitude: f64,
    pub duration_h: f64,
    #[serde(default)]
    pub nominal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarlo {
    pub seed: u64,
    pub samples: usize,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { seed: 20_200_501, samples: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarmInstance {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub electrical: Electrical,
    pub layout: Layout,
    pub model: ModelSection,
    pub failure: Failure,
    pub backend: BackendConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarlo,
    #[serde(rename = "cable")]
    pub cables: Vec<CableSpec>,
    #[serde(rename = "wind")]
    pub winds: Vec<Wind>,
    #[serde(rename = "node")]
    pub nodes: Vec<Node>,
}

fn field(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::invalid(format!("{path}: {msg}"))
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field(path, format!("{v} must be positive and finite")))
    }
}

impl FarmInstance {
    pub fn n_turbines(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Checks every documented range. Structural checks that need the
    /// derived objects (catalog ordering, candidate graph) run here too.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version)));
        }
        let e = &self.electrical;
        positive("electrical.p_n_mw", e.p_n_mw)?;
        positive("electrical.v_n_kv", e.v_n_kv)?;
        positive("electrical.lifetime_years", e.lifetime_years)?;
        if !(e.c_e >= 0.0 && e.c_e.is_finite()) {
            return Err(field("electrical.c_e", format!("{} must be non-negative", e.c_e)));
        }
        if self.layout.phi < 2 {
            return Err(field("layout.phi", "at least 2 feeders are needed for a closed loop"));
        }
        if self.layout.upsilon < 1 {
            return Err(field("layout.upsilon", "must be at least 1"));
        }
        if self.layout.sigma < 1 {
            return Err(field("layout.sigma", "must be at least 1"));
        }
        if self.model.r_c < 1 {
            return Err(field("model.r_c", "must be at least 1"));
        }
        if self.model.kappa_max < 1 {
            return Err(field("model.kappa_max", "must be at least 1"));
        }
        positive("model.subtype_step", self.model.subtype_step)?;
        positive("failure.mtbf_years_km", self.failure.mtbf_years_km)?;
        positive("failure.mttr_h", self.failure.mttr_h)?;
        if self.monte_carlo.samples == 0 {
            return Err(field("monte_carlo.samples", "must be at least 1"));
        }
        self.backend.validate().map_err(|e| field("backend", e))?;
        if self.cables.is_empty() {
            return Err(field("cable", "at least one cable type is required"));
        }
        for (i, c) in self.cables.iter().enumerate() {
            positive(&format!("cable[{i}].capacity_a"), c.capacity_a)?;
            positive(&format!("cable[{i}].cost_k_per_km"), c.cost_k_per_km)?;
            positive(&format!("cable[{i}].resistance_ohm_per_km"), c.resistance_ohm_per_km)?;
            positive(&format!("cable[{i}].reactance_ohm_per_km"), c.reactance_ohm_per_km)?;
        }
        for (i, w) in self.winds.iter().enumerate() {
            if !(0.0..=1.0).contains(&w.magnitude) {
                return Err(field(&format!("wind[{i}].magnitude"), format!("{} outside [0, 1]", w.magnitude)));
            }
            positive(&format!("wind[{i}].duration_h"), w.duration_h)?;
        }
        let ids: BTreeSet<usize> = self.winds.iter().map(|w| w.id).collect();
        if ids.len() != self.winds.len() {
            return Err(field("wind", "scenario ids must be unique"));
        }
        validate_winds(&self.wind_scenarios()).map_err(|e| field("wind", e))?;
        let n_w = self.n_turbines();
        if self.layout.upsilon >= n_w {
            return Err(field("layout.upsilon", format!("{} must be below the turbine count {n_w}", self.layout.upsilon)));
        }
        if self.layout.sigma > n_w {
            return Err(field("layout.sigma", format!("{} exceeds the turbine count {n_w}", self.layout.sigma)));
        }
        self.catalog().map_err(|e| field("cable", e))?;
        self.cables().map_err(|e| field("cable", e))?;
        self.graph().map_err(|e| field("node", e))?;
        Ok(())
    }

    pub fn wind_scenarios(&self) -> Vec<WindScenario> {
        self.winds.iter().map(|w| WindScenario { id: w.id, magnitude: w.magnitude, duration_h: w.duration_h, nominal: w.nominal }).collect()
    }

    pub fn failure_params(&self) -> FailureParams {
        FailureParams { mtbf_years_km: self.failure.mtbf_years_km, mttr_h: self.failure.mttr_h }
    }

    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::new(self.cables.iter().map(CableSpec::to_type).collect())
    }

    /// Cable options seen by the model (catalog types or loss-priced sub-types).
    pub fn cables(&self) -> Result<Vec<SubType>> {
        let e = &self.electrical;
        model_cables(&self.catalog()?, self.model.objective, &self.wind_scenarios(), e.p_n_mw, e.v_n_kv, e.c_e, self.model.subtype_step)
    }

    pub fn points(&self) -> Vec<Point> {
        self.nodes.iter().map(|n| Point::new(n.id, n.x, n.y)).collect()
    }

    pub fn graph(&self) -> Result<CandidateGraph> {
        build_candidate_graph(self.points(), self.layout.upsilon, self.layout.sigma)
    }

    pub fn options(&self) -> ModelOptions {
        ModelOptions {
            mode: self.model.objective,
            phi: self.layout.phi,
            c_e: self.electrical.c_e,
            v_n_kv: self.electrical.v_n_kv,
            p_n_mw: self.electrical.p_n_mw,
            zero_curtailment: false,
        }
    }

    pub fn context(&self) -> Result<EvalContext> {
        Ok(EvalContext {
            graph: self.graph()?,
            cables: self.cables()?,
            winds: self.wind_scenarios(),
            options: self.options(),
            failure: self.failure_params(),
            reliability_level: self.model.r_c,
        })
    }

    pub fn pci_config(&self) -> PciConfig {
        PciConfig { r_c: self.model.r_c, kappa_max: self.model.kappa_max, backend: self.backend.clone() }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance serializes")
    }
}

/// Parses and validates instance text; `origin` names the source in errors.
pub fn parse_instance_str(text: &str, origin: &str) -> Result<FarmInstance> {
    let inst: FarmInstance =
        toml::from_str(text).map_err(|e| Error::Parse { path: origin.into(), message: e.to_string().trim_end().into() })?;
    inst.validate().map_err(|e| match e {
        Error::Invalid(m) => Error::Parse { path: origin.into(), message: m },
        other => other,
    })?;
    Ok(inst)
}

pub fn parse_instance(path: &Path) -> Result<FarmInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance_str(&text, &path.display().to_string())
}

/// One installed edge in a design file; node ids and option numbers are
/// 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignEdge {
    pub a: usize,
    pub b: usize,
    pub option: usize,
    pub capacity_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub schema_version: u32,
    /// `deterministic` or `stochastic`.
    pub kind: String,
    pub objective: ObjectiveMode,
    pub mtbf_years_km: f64,
    pub r_c: usize,
    pub costs: CostBreakdown,
    #[serde(rename = "edge")]
    pub edges: Vec<DesignEdge>,
}

impl DesignFile {
    pub fn from_design(design: &Design, inst: &FarmInstance, graph: &CandidateGraph, cables: &[SubType], kind: &str) -> Self {
        let edges = design
            .active_edges()
            .into_iter()
            .map(|e| {
                let t = design.cable[e].expect("active");
                DesignEdge { a: graph.edges[e].a + 1, b: graph.edges[e].b + 1, option: t + 1, capacity_a: cables[t].capacity_a }
            })
            .collect();
        DesignFile {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            objective: design.mode,
            mtbf_years_km: inst.failure.mtbf_years_km,
            r_c: inst.model.r_c,
            costs: design.breakdown,
            edges,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("design serializes")
    }

    /// The first-stage decision over `graph`; leaf operations are left empty.
    pub fn to_design(&self, graph: &CandidateGraph, cables: &[SubType]) -> Result<Design> {
        let mut cable = vec![None; graph.edges.len()];
        for (i, d) in self.edges.iter().enumerate() {
            let at = |m: String| Error::invalid(format!("edge[{i}]: {m}"));
            if d.a == 0 || d.b == 0 {
                return Err(at("node ids are 1-based".into()));
            }
            let e = graph.edge_index(d.a - 1, d.b - 1).ok_or_else(|| at(format!("({}, {}) is not a candidate edge", d.a, d.b)))?;
            if d.option == 0 || d.option > cables.len() {
                return Err(at(format!("cable option {} outside 1..={}", d.option, cables.len())));
            }
            if (cables[d.option - 1].capacity_a - d.capacity_a).abs() > 1e-6 * d.capacity_a.abs().max(1.0) {
                return Err(at(format!(
                    "option {} has capacity {} A, file says {}",
                    d.option,
                    cables[d.option - 1].capacity_a,
                    d.capacity_a
                )));
            }
            if cable[e].is_some() {
                return Err(at("edge listed twice".into()));
            }
            cable[e] = Some(d.option - 1);
        }
        Ok(Design { mode: self.objective, cable, leaves: Vec::new(), breakdown: self.costs })
    }
}

pub fn parse_design_str(text: &str, origin: &str) -> Result<DesignFile> {
    let d: DesignFile = toml::from_str(text).map_err(|e| Error::Parse { path: origin.into(), message: e.to_string().trim_end().into() })?;
    if d.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse { path: origin.into(), message: format!("schema_version: unsupported version {}", d.schema_version) });
    }
    if d.kind != "deterministic" && d.kind != "stochastic" {
        return Err(Error::Parse { path: origin.into(), message: format!("kind: `{}` is neither deterministic nor stochastic", d.kind) });
    }
    Ok(d)
}

pub fn parse_design(path: &Path) -> Result<DesignFile> {
    let text = std::fs::read_to_string(path)?;
    parse_design_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"
schema_version = 1
name = "small"

[electrical]
p_n_mw = 5.0
v_n_kv = 33.0
c_e = 2.86
lifetime_years = 30.0

[layout]
upsilon = 2
sigma = 3
phi = 4

[model]
objective = "investment-reliability"
r_c = 1

[failure]
mtbf_years_km = 10.0
mttr_h = 720.0

[backend]
kind = "enumeration"

[[cable]]
capacity_a = 530.0
cost_k_per_km = 450.0
resistance_ohm_per_km = 0.098
reactance_ohm_per_km = 0.123

[[wind]]
id = 1
magnitude = 1.0
duration_h = 65700.0
nominal = true

[[wind]]
id = 2
magnitude = 0.5
duration_h = 91980.0

[[node]]
id = 1
x = 0.0
y = 0.0

[[node]]
id = 2
x = 800.0
y = 0.0

[[node]]
id = 3
x = 800.0
y = 800.0

[[node]]
id = 4
x = 0.0
y = 900.0
"#;

    #[test]
    fn parse_and_round_trip() {
        let inst = parse_instance_str(SMALL, "small.toml").unwrap();
        assert_eq!(inst.n_turbines(), 3);
        assert_eq!(inst.monte_carlo, MonteCarlo::default());
        let again = parse_instance_str(&inst.to_toml(), "again").unwrap();
        assert_eq!(inst, again);
        let cables = inst.cables().unwrap();
        assert!((cables[0].reactance_ohm_per_m - 1.23e-4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = SMALL.replace("magnitude = 0.5", "magnitude = 1.2");
        let err = parse_instance_str(&bad, "x").unwrap_err().to_string();
        assert!(err.contains("wind[1].magnitude"), "{err}");

        let no_nominal = SMALL.replace("nominal = true", "");
        assert!(parse_instance_str(&no_nominal, "x").unwrap_err().to_string().contains("nominal"));

        let unknown = SMALL.replace("[layout]", "[layout]\ncolour = 1");
        let err = parse_instance_str(&unknown, "x").unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line"), "{err}");

        let version = SMALL.replace("schema_version = 1", "schema_version = 9");
        assert!(parse_instance_str(&version, "x").is_err());
    }

    #[test]
    fn design_round_trip() {
        let inst = parse_instance_str(SMALL, "small.toml").unwrap();
        let graph = inst.graph().unwrap();
        let cables = inst.cables().unwrap();
        let mut cable = vec![None; graph.edges.len()];
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            cable[graph.edge_index(a, b).unwrap()] = Some(0);
        }
        let design = Design {
            mode: inst.model.objective,
            cable,
            leaves: vec![],
            breakdown: CostBreakdown { investment: 1.0, losses: 0.0, reliability: 2.0 },
        };
        let file = DesignFile::from_design(&design, &inst, &graph, &cables, "stochastic");
        let parsed = parse_design_str(&file.to_toml(), "d").unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_design(&graph, &cables).unwrap().cable, design.cable);

        let mut wrong = file.clone();
        wrong.edges[0].option = 2;
        assert!(wrong.to_design(&graph, &cables).is_err());
    }
}
