//! Fixed-format MPS writer.
//!
//! Names are eight characters derived from IR indices (`C0000042` for
//! variable 42, `R0000007` for constraint 7, `COST` for the objective), so
//! output is stable across runs. Fields start at the classic columns 2, 5,
//! 15, 25; numbers carry at most 12 significant digits and may run past
//! column 36, so readers should split on whitespace.

use std::fmt::Write;

use crate::model::{ModelIR, Sense, VarKind};

pub const OBJECTIVE_ROW: &str = "COST";

pub fn column_name(index: usize) -> String {
    format!("C{index:07}")
}

pub fn row_name(index: usize) -> String {
    format!("R{index:07}")
}

/// Index of a column name produced by [`column_name`].
pub fn column_index(name: &str) -> Option<usize> {
    name.strip_prefix('C').filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())).and_then(|d| d.parse().ok())
}

/// Shortest rendering with at most 12 significant digits.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.fract() == 0.0 && v.abs() < 1e12 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        // plain decimal is shorter and friendlier to fixed-column readers
        let plain: f64 = format!("{mantissa}e{exp}").parse().expect("valid float");
        let digits = mantissa.trim_start_matches('-').replace('.', "").len() as i32;
        let decimals = (digits - 1 - exp).max(0) as usize;
        return format!("{plain:.decimals$}");
    }
    format!("{mantissa}e{exp}")
}

fn entry(out: &mut String, col: &str, row: &str, value: f64) {
    let _ = writeln!(out, "    {col:<8}  {row:<8}  {:>12}", fmt_num(value));
}

pub fn emit_model_file(ir: &ModelIR) -> String {
    let n = ir.variables.len();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, c) in ir.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            if a != 0.0 {
                columns[v].push((r, a));
            }
        }
    }

    let mut out = String::with_capacity(64 * (n + ir.constraints.len()));
    out.push_str("NAME          PETAL\n");
    out.push_str("OBJSENSE\n    MIN\n");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for (r, c) in ir.constraints.iter().enumerate() {
        let kind = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {kind}  {}", row_name(r));
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (v, var) in ir.variables.iter().enumerate() {
        let binary = var.kind == VarKind::Binary;
        if binary != in_int {
            let tag = if binary { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 '{tag}'");
            marker += 1;
            in_int = binary;
        }
        let col = column_name(v);
        let obj = ir.objective[v];
        if obj != 0.0 || columns[v].is_empty() {
            entry(&mut out, &col, OBJECTIVE_ROW, obj);
        }
        for &(r, a) in &columns[v] {
            entry(&mut out, &col, &row_name(r), a);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for (r, c) in ir.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            entry(&mut out, "RHS", &row_name(r), c.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for (v, var) in ir.variables.iter().enumerate() {
        let col = column_name(v);
        let bound = |out: &mut String, kind: &str, value: f64| {
            let _ = writeln!(out, " {kind} BND       {col:<8}  {:>12}", fmt_num(value));
        };
        if var.lower == var.upper {
            bound(&mut out, "FX", var.lower);
            continue;
        }
        if var.lower == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI BND       {col}");
        } else if var.lower != 0.0 {
            bound(&mut out, "LO", var.lower);
        }
        if var.upper.is_finite() {
            bound(&mut out, "UP", var.upper);
        }
    }
    out.push_str("ENDATA\n");
    out
}
