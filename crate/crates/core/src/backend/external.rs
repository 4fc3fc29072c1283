//! External MILP solver driven through files and a subprocess.
//!
//! The command template is split on whitespace (no shell) and each token has
//! its placeholders substituted: `{model}`, `{solution}`, `{gap}`,
//! `{time_limit}`, `{warm_start}` and `{driver}` (path of the bundled HiGHS
//! driver script, written into the scratch directory on demand).

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use super::mps::{column_index, emit_model_file, fmt_num};
use super::solution::{parse_solution, SolutionFormat};
use super::{BackendConfig, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::model::ModelIR;

/// Environment variable holding a command template.
pub const SOLVER_ENV: &str = "PETAL_SOLVER_CMD";

/// HiGHS driver script shipped with the crate.
pub const BUILTIN_DRIVER: &str = include_str!("../../scripts/highs_driver.py");

const DEFAULT_TEMPLATE: &str = "python3 {driver} {model} {solution} --gap {gap} --time-limit {time_limit} --warm-start {warm_start}";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCommand {
    template: String,
}

impl SolverCommand {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        if template.split_whitespace().next().is_none() {
            return Err(Error::invalid("empty solver command template"));
        }
        for token in template.split_whitespace() {
            let mut rest = token;
            while let Some(open) = rest.find('{') {
                let close = rest[open..].find('}').ok_or_else(|| Error::invalid(format!("unterminated placeholder in `{token}`")))?;
                let key = &rest[open + 1..open + close];
                if !matches!(key, "model" | "solution" | "gap" | "time_limit" | "warm_start" | "driver") {
                    return Err(Error::invalid(format!("unknown placeholder {{{key}}} in solver command")));
                }
                rest = &rest[open + close + 1..];
            }
        }
        if !template.contains("{model}") || !template.contains("{solution}") {
            return Err(Error::invalid("solver command must reference {model} and {solution}"));
        }
        Ok(SolverCommand { template })
    }

    /// Explicit template, else the environment variable, else the built-in driver.
    pub fn resolve(configured: Option<&str>) -> Result<Self> {
        match configured {
            Some(t) => SolverCommand::new(t),
            None => match std::env::var(SOLVER_ENV) {
                Ok(t) if !t.trim().is_empty() => SolverCommand::new(t),
                _ => SolverCommand::new(DEFAULT_TEMPLATE),
            },
        }
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn uses_driver(&self) -> bool {
        self.template.contains("{driver}")
    }

    /// Program and arguments with placeholders substituted.
    pub fn argv(&self, values: &[(&str, &str)]) -> Vec<String> {
        self.template
            .split_whitespace()
            .map(|token| {
                let mut t = token.to_string();
                for (k, v) in values {
                    t = t.replace(&format!("{{{k}}}"), v);
                }
                t
            })
            .collect()
    }
}

fn scratch(cfg: &BackendConfig) -> Result<tempfile::TempDir> {
    let builder = {
        let mut b = tempfile::Builder::new();
        b.prefix("petal-solve-");
        b
    };
    Ok(match &cfg.scratch_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            builder.tempdir_in(dir)?
        }
        None => builder.tempdir()?,
    })
}

pub(crate) fn solve_external(ir: &ModelIR, cfg: &BackendConfig, warm_start: Option<&[(usize, f64)]>) -> Result<SolveResult> {
    let started = Instant::now();
    let command = SolverCommand::resolve(cfg.command.as_deref())?;
    let dir = scratch(cfg)?;
    let path = |name: &str| dir.path().join(name);
    let model = path("model.mps");
    let solution = path("model.sol");
    let warm = path("warm.txt");
    let driver = path("highs_driver.py");

    fs::write(&model, emit_model_file(ir))?;
    let mut hint = String::new();
    for &(v, x) in warm_start.unwrap_or(&[]) {
        hint.push_str(&format!("{} {}\n", super::column_name(v), fmt_num(x)));
    }
    fs::write(&warm, hint)?;
    if command.uses_driver() {
        fs::write(&driver, BUILTIN_DRIVER)?;
    }

    let s = |p: &Path| p.to_string_lossy().into_owned();
    let gap = format!("{}", cfg.gap);
    let time_limit = format!("{}", cfg.time_limit_s);
    let (model_s, solution_s, warm_s, driver_s) = (s(&model), s(&solution), s(&warm), s(&driver));
    let argv = command.argv(&[
        ("model", &model_s),
        ("solution", &solution_s),
        ("gap", &gap),
        ("time_limit", &time_limit),
        ("warm_start", &warm_s),
        ("driver", &driver_s),
    ]);
    let output = Command::new(&argv[0])
        .args(&argv[1..])
        .current_dir(dir.path())
        .output()
        .map_err(|e| Error::solver(format!("cannot run `{}`: {e}", argv[0])))?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(Error::solver(format!("`{}` exited with {}: {}", argv[0], output.status, stderr.trim())));
    }
    let text = fs::read_to_string(&solution).map_err(|e| Error::solver(format!("solver wrote no solution file: {e}")))?;
    let parsed = parse_solution(&text, SolutionFormat::Auto)?;

    let wall_time = started.elapsed();
    if parsed.status == SolveStatus::Infeasible {
        return Ok(SolveResult { status: SolveStatus::Infeasible, assignment: None, objective: f64::INFINITY, gap: 0.0, wall_time });
    }
    if !parsed.has_values() {
        return Ok(SolveResult { status: parsed.status, assignment: None, objective: f64::INFINITY, gap: 1.0, wall_time });
    }

    // solvers may omit zero-valued columns
    let mut values = vec![0.0; ir.variables.len()];
    for (name, x) in &parsed.values {
        match column_index(name) {
            Some(i) if i < values.len() => values[i] = *x,
            _ => return Err(Error::Inconsistent(format!("solution names unknown column `{name}`"))),
        }
    }
    let objective = ir.evaluate_objective(&values);
    let gap = match parsed.status {
        SolveStatus::Optimal => 0.0,
        _ => parsed.gap.unwrap_or(1.0),
    };
    Ok(SolveResult { status: parsed.status, assignment: Some(values), objective, gap, wall_time })
}
