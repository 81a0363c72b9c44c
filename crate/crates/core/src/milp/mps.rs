//! Fixed-form MPS writer.
//!
//! Fields sit at the classic column offsets. Names longer than eight
//! characters are written in full, which free-form readers accept.

use std::fmt::Write;

use super::{MilpModel, ObjectiveSense, RowSense, VarKind};

const OBJ_ROW: &str = "OBJ";

/// Formats `v` with 12 significant digits, dropping trailing zeros.
pub(crate) fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let plain = format!("{:.*}", decimals, v);
        trim_zeros(&plain).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn line(out: &mut String, code: &str, name: &str, entries: &[(&str, f64)]) {
    let mut l = format!(" {:<2} {:<8}", code, name);
    for (k, (other, value)) in entries.iter().enumerate() {
        if k > 0 {
            l.push_str("   ");
        }
        let _ = write!(l, "  {:<8}  {:>12}", other, format_number(*value));
    }
    out.push_str(l.trim_end());
    out.push('\n');
}

pub fn export_mps(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    if model.sense == ObjectiveSense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }

    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for r in model.rows() {
        let code = match r.sense {
            RowSense::Le => "L",
            RowSense::Eq => "E",
            RowSense::Ge => "G",
        };
        let _ = writeln!(out, " {code}  {}", r.name);
    }

    // Column-major view of the row coefficients.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_columns()];
    for (i, r) in model.rows().iter().enumerate() {
        for &(j, a) in &r.coeffs {
            if a != 0.0 {
                by_col[j].push((i, a));
            }
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (j, c) in model.columns().iter().enumerate() {
        let binary = c.kind == VarKind::Binary;
        if binary != in_int {
            let tag = if binary { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER{markers:<4}  'MARKER'                 {tag}");
            markers += 1;
            in_int = binary;
        }
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if c.objective != 0.0 {
            entries.push((OBJ_ROW, c.objective));
        }
        for &(i, a) in &by_col[j] {
            entries.push((&model.rows()[i].name, a));
        }
        if entries.is_empty() {
            // Keep the column visible to readers.
            entries.push((OBJ_ROW, 0.0));
        }
        for pair in entries.chunks(2) {
            line(&mut out, "", &c.name, pair);
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER{markers:<4}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for r in model.rows() {
        if r.rhs != 0.0 {
            line(&mut out, "", "RHS", &[(&r.name, r.rhs)]);
        }
    }

    let mut bounds = String::new();
    for c in model.columns() {
        let name = c.name.as_str();
        let bound = |out: &mut String, code: &str, v: f64| {
            let _ = writeln!(out, " {code} BND       {name:<8}  {:>12}", format_number(v));
        };
        let flag = |out: &mut String, code: &str| {
            let _ = writeln!(out, " {code} BND       {name}");
        };
        match (c.lower, c.upper) {
            _ if c.kind == VarKind::Binary => bound(&mut bounds, "UP", 1.0),
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => flag(&mut bounds, "FR"),
            (l, u) if l == u => bound(&mut bounds, "FX", l),
            (l, u) => {
                if l == f64::NEG_INFINITY {
                    flag(&mut bounds, "MI");
                } else if l != 0.0 {
                    bound(&mut bounds, "LO", l);
                }
                if u != f64::INFINITY {
                    bound(&mut bounds, "UP", u);
                }
            }
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }
    out.push_str("ENDATA\n");
    out
}
