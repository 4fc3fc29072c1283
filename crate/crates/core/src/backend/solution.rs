//! Readers for solver solution files.
//!
//! Three layouts are understood: the petal driver format (`status`,
//! `objective`, `gap` headers then `name value` lines), CBC's `solu` output
//! and the HiGHS `.sol` text format.

use super::SolveStatus;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionFormat {
    Auto,
    Native,
    Cbc,
    Highs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSolution {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    /// Column values in file order.
    pub values: Vec<(String, f64)>,
}

impl ParsedSolution {
    pub fn has_values(&self) -> bool {
        !self.values.is_empty()
    }
}

fn err(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse { path: "solution".into(), message: format!("line {line}: {message}") }
}

fn number(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| err(line, format!("`{s}` is not a number")))?;
    if v.is_nan() {
        return Err(err(line, "NaN value"));
    }
    Ok(v)
}

pub fn detect_format(text: &str) -> SolutionFormat {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    if first.starts_with("status ") || first == "status" {
        SolutionFormat::Native
    } else if first == "Model status" {
        SolutionFormat::Highs
    } else {
        SolutionFormat::Cbc
    }
}

pub fn parse_solution(text: &str, format: SolutionFormat) -> Result<ParsedSolution> {
    match format {
        SolutionFormat::Auto => parse_solution(text, detect_format(text)),
        SolutionFormat::Native => parse_native(text),
        SolutionFormat::Cbc => parse_cbc(text),
        SolutionFormat::Highs => parse_highs(text),
    }
}

fn parse_native(text: &str) -> Result<ParsedSolution> {
    let mut status = None;
    let mut objective = None;
    let mut gap = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(n, "expected `key value`"));
        };
        match key {
            "status" => {
                if status.is_some() {
                    return Err(err(n, "duplicate status"));
                }
                status = Some(match val {
                    "optimal" => SolveStatus::Optimal,
                    "feasible-gap" | "feasible" => SolveStatus::FeasibleGap,
                    "infeasible" => SolveStatus::Infeasible,
                    "time-limit" | "time-limit-no-solution" => SolveStatus::TimeLimit,
                    other => return Err(err(n, format!("unknown status `{other}`"))),
                });
            }
            _ if status.is_none() => return Err(err(n, "status line must come first")),
            "objective" => objective = Some(number(n, val)?),
            "gap" => gap = Some(number(n, val)?),
            name => values.push((name.to_string(), number(n, val)?)),
        }
    }
    let status = status.ok_or_else(|| err(0, "missing status line"))?;
    Ok(ParsedSolution { status, objective, gap, values })
}

fn parse_cbc(text: &str) -> Result<ParsedSolution> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| err(0, "empty solution file"))?;
    let head = head.trim();
    let lower = head.to_ascii_lowercase();
    let status = if lower.starts_with("optimal") {
        SolveStatus::Optimal
    } else if lower.starts_with("infeasible") || lower.contains("integer infeasible") {
        SolveStatus::Infeasible
    } else if lower.starts_with("stopped on time") || lower.starts_with("stopped on iterations") {
        SolveStatus::TimeLimit
    } else if lower.starts_with("stopped on gap") || lower.starts_with("stopped on ratio") {
        SolveStatus::FeasibleGap
    } else {
        return Err(err(1, format!("unrecognized CBC status `{head}`")));
    };
    let objective = match lower.find("objective value") {
        Some(p) => Some(number(1, head[p + "objective value".len()..].trim())?),
        None => None,
    };
    let mut values = Vec::new();
    for (i, raw) in lines {
        let n = i + 1;
        // infeasible rows are flagged with a leading `**`
        let line = raw.trim().trim_start_matches("**").trim();
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() < 3 {
            return Err(err(n, "expected `index name value [reduced cost]`"));
        }
        parts[0].parse::<usize>().map_err(|_| err(n, "column index is not an integer"))?;
        values.push((parts[1].to_string(), number(n, parts[2])?));
    }
    if status == SolveStatus::Infeasible {
        values.clear();
    }
    Ok(ParsedSolution { status, objective, gap: None, values })
}

fn parse_highs(text: &str) -> Result<ParsedSolution> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).collect();
    let mut it = lines.iter().copied().filter(|(_, l)| !l.is_empty());
    match it.next() {
        Some((_, "Model status")) => {}
        _ => return Err(err(1, "expected `Model status` header")),
    }
    let (n, model_status) = it.next().ok_or_else(|| err(2, "missing model status"))?;
    let status = match model_status {
        "Optimal" => SolveStatus::Optimal,
        "Infeasible" => SolveStatus::Infeasible,
        "Time limit reached" => SolveStatus::TimeLimit,
        s if s.contains("limit") => SolveStatus::TimeLimit,
        s => return Err(err(n, format!("unsupported model status `{s}`"))),
    };

    let mut objective = None;
    let mut values = Vec::new();
    let mut in_primal = false;
    let mut remaining_cols: Option<usize> = None;
    for (n, line) in it {
        if let Some(k) = remaining_cols {
            if k == 0 {
                remaining_cols = None;
                in_primal = false;
            } else {
                let mut parts = line.split_whitespace();
                let (Some(name), Some(val)) = (parts.next(), parts.next()) else {
                    return Err(err(n, "expected `name value`"));
                };
                values.push((name.to_string(), number(n, val)?));
                remaining_cols = Some(k - 1);
                continue;
            }
        }
        if line == "# Primal solution values" {
            in_primal = true;
        } else if line.starts_with("# Dual") || line.starts_with("# Basis") {
            in_primal = false;
        } else if in_primal {
            if let Some(rest) = line.strip_prefix("Objective ") {
                objective = Some(number(n, rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("# Columns ") {
                let k = rest.trim().parse().map_err(|_| err(n, "bad column count"))?;
                remaining_cols = Some(k);
            }
        }
    }
    if matches!(remaining_cols, Some(k) if k > 0) {
        return Err(err(lines.len(), "column section ends early"));
    }
    Ok(ParsedSolution { status, objective, gap: None, values })
}
