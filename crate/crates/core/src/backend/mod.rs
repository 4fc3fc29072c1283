//! Solving a [`ModelIR`]: exhaustive enumeration for desk-scale instances,
//! or an external MILP solver driven through MPS files.

mod enumerate;
mod external;
mod mps;
mod solution;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use enumerate::{enumerate_optimal, ENUMERATION_MAX_TURBINES};
pub use external::{SolverCommand, BUILTIN_DRIVER, SOLVER_ENV};
pub use mps::{column_name, emit_model_file, row_name};
pub use solution::{parse_solution, ParsedSolution, SolutionFormat};

use crate::error::{Error, Result};
use crate::model::{Family, ModelIR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleGap,
    Infeasible,
    TimeLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Dense values by IR variable index; `None` only when infeasible or
    /// no incumbent was found.
    pub assignment: Option<Vec<f64>>,
    pub objective: f64,
    pub gap: f64,
    pub wall_time: Duration,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        self.assignment.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Enumeration,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Relative optimality gap target.
    #[serde(default)]
    pub gap: f64,
    /// Seconds per solve.
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    /// Command template; see [`SolverCommand`]. Falls back to the
    /// `PETAL_SOLVER_CMD` environment variable, then the built-in HiGHS driver.
    #[serde(default)]
    pub command: Option<String>,
    /// Parent directory for per-solve scratch directories.
    #[serde(default)]
    pub scratch_dir: Option<PathBuf>,
}

fn default_time_limit() -> f64 {
    3600.0
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig { kind: BackendKind::External, gap: 0.0, time_limit_s: default_time_limit(), command: None, scratch_dir: None }
    }
}

impl BackendConfig {
    pub fn enumeration() -> Self {
        BackendConfig { kind: BackendKind::Enumeration, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gap) {
            return Err(Error::invalid(format!("gap {} must lie in [0, 1)", self.gap)));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::invalid("time limit must be positive"));
        }
        Ok(())
    }
}

/// Solves the model. A warm start is a hint only: it is forwarded to the
/// external solver and never changes which solution is reported optimal.
pub fn solve(ir: &ModelIR, cfg: &BackendConfig, warm_start: Option<&[(usize, f64)]>) -> Result<SolveResult> {
    cfg.validate()?;
    if let Some(ws) = warm_start {
        check_warm_start(ir, ws)?;
    }
    match cfg.kind {
        BackendKind::Enumeration => enumerate_optimal(&ir.input).map(|found| found.into_result(ir)),
        BackendKind::External => external::solve_external(ir, cfg, warm_start),
    }
}

/// The warm start must satisfy the first-stage rows (c1-c4).
fn check_warm_start(ir: &ModelIR, ws: &[(usize, f64)]) -> Result<()> {
    let mut values = vec![None; ir.variables.len()];
    for &(v, x) in ws {
        if v >= ir.variables.len() {
            return Err(Error::invalid(format!("warm start references variable {v} outside the model")));
        }
        values[v] = Some(x);
    }
    for c in ir.constraints.iter().filter(|c| matches!(c.family, Family::C1 | Family::C2 | Family::C3 | Family::C4)) {
        if c.terms.iter().any(|(v, _)| values[*v].is_none()) {
            return Err(Error::invalid(format!("warm start does not cover row {}", c.name)));
        }
        let lhs: f64 = c.terms.iter().map(|(v, a)| a * values[*v].unwrap()).sum();
        let ok = match c.sense {
            crate::model::Sense::Le => lhs <= c.rhs + 1e-9,
            crate::model::Sense::Ge => lhs >= c.rhs - 1e-9,
            crate::model::Sense::Eq => (lhs - c.rhs).abs() <= 1e-9,
        };
        if !ok {
            return Err(Error::invalid(format!("warm start violates {}", c.name)));
        }
    }
    Ok(())
}
