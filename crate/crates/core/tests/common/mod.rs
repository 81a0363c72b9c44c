//! Test-side oracles shared by the integration tests.
#![allow(dead_code)]

use ocs::milp::{Column, MilpModel, ObjectiveSense, Row, RowSense, VarKind};
use ocs::EdpInstance;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The fifty seeded desk-scale instances the acceptance criteria share.
pub fn desk_instances() -> Vec<EdpInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    (0..50)
        .map(|_| {
            let m = rng.gen_range(8..=14);
            let n = rng.gen_range(2..=5);
            ocs::synth::binding_instance(&mut rng, m, n, 0.6)
        })
        .collect()
}

/// Random mixed-binary model with bounded continuous columns.
pub fn random_model<R: Rng>(rng: &mut R, binaries: usize, continuous: usize) -> MilpModel {
    let sense = if rng.gen_bool(0.5) {
        ObjectiveSense::Maximize
    } else {
        ObjectiveSense::Minimize
    };
    let mut m = MilpModel::new("rand", sense);
    for j in 0..binaries {
        m.add_column(Column::binary(format!("b{j}"), rng.gen_range(-5.0..5.0)));
    }
    for j in 0..continuous {
        let lo = rng.gen_range(-3.0..1.0f64).round();
        let hi = lo + rng.gen_range(1.0..5.0f64).round();
        m.add_column(Column::continuous(format!("x{j}"), lo, hi, rng.gen_range(-5.0..5.0)));
    }
    let ncols = binaries + continuous;
    let nrows = rng.gen_range(2..=5);
    for i in 0..nrows {
        let mut coeffs = Vec::new();
        for j in 0..ncols {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-4.0..4.0f64).round()));
            }
        }
        coeffs.retain(|&(_, a)| a != 0.0);
        if coeffs.is_empty() {
            coeffs.push((i % ncols, 1.0));
        }
        let sense = match rng.gen_range(0..6) {
            0 => RowSense::Ge,
            1 if i == 0 => RowSense::Eq,
            _ => RowSense::Le,
        };
        let rhs = rng.gen_range(-2.0..8.0f64).round();
        m.push_row(Row::new(format!("r{i}"), coeffs, sense, rhs)).unwrap();
    }
    m
}

/// Dense two-phase tableau simplex with Bland's rule:
/// `max cᵀx` s.t. `A x ≤ b`, `x ≥ 0`. Returns `None` when infeasible.
/// Only for small bounded problems.
pub fn tableau_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    const EPS: f64 = 1e-10;
    let (rows, n) = (a.len(), c.len());
    // Columns: x (n), slack (rows), artificial (rows), rhs.
    let width = n + 2 * rows + 1;
    let mut t = vec![vec![0.0; width]; rows];
    let mut basis = vec![0usize; rows];
    for i in 0..rows {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = flip;
        t[i][n + rows + i] = 1.0;
        t[i][width - 1] = flip * b[i];
        basis[i] = n + rows + i;
    }

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != 0.0 {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        basis[r] = col;
    };

    // Maximize `obj` over columns `allowed`; Bland's rule.
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, obj: &[f64], allowed: usize| -> bool {
        loop {
            let mut enter = None;
            for col in 0..allowed {
                if basis.contains(&col) {
                    continue;
                }
                let reduced = obj[col] - (0..rows).map(|i| obj[basis[i]] * t[i][col]).sum::<f64>();
                if reduced > EPS {
                    enter = Some(col);
                    break;
                }
            }
            let Some(col) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..rows {
                if t[i][col] > EPS {
                    let ratio = t[i][width - 1] / t[i][col];
                    match leave {
                        Some((li, lr)) if ratio > lr + EPS || (ratio >= lr - EPS && basis[i] > basis[li]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            pivot(t, basis, r, col);
        }
    };

    let mut phase1 = vec![0.0; width - 1];
    for v in &mut phase1[n + rows..] {
        *v = -1.0;
    }
    run(&mut t, &mut basis, &phase1, width - 1);
    let infeas: f64 = (0..rows)
        .filter(|&i| basis[i] >= n + rows)
        .map(|i| t[i][width - 1])
        .sum();
    if infeas > 1e-7 {
        return None;
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..rows {
        if basis[i] >= n + rows {
            if let Some(col) = (0..n + rows).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut basis, i, col);
            }
        }
    }
    let mut obj = vec![0.0; width - 1];
    obj[..n].copy_from_slice(c);
    // Artificials stay out: they are never offered as entering columns.
    if !run(&mut t, &mut basis, &obj, n + rows) {
        return Some(f64::INFINITY);
    }
    Some((0..rows).filter(|&i| basis[i] < n).map(|i| c[basis[i]] * t[i][width - 1]).sum())
}

/// Optimum of `model` by enumerating every binary pattern and solving the
/// continuous remainder with [`tableau_max`]. `None` when infeasible.
pub fn enumerate_milp(model: &MilpModel) -> Option<f64> {
    let cols = model.columns();
    let bins: Vec<usize> = (0..cols.len()).filter(|&j| cols[j].kind == VarKind::Binary).collect();
    let conts: Vec<usize> = (0..cols.len()).filter(|&j| cols[j].kind == VarKind::Continuous).collect();
    let sign = match model.sense {
        ObjectiveSense::Maximize => 1.0,
        ObjectiveSense::Minimize => -1.0,
    };
    let mut best: Option<f64> = None;
    for pattern in 0u32..(1 << bins.len()) {
        let mut fixed = vec![0.0; cols.len()];
        for (k, &j) in bins.iter().enumerate() {
            fixed[j] = ((pattern >> k) & 1) as f64;
        }
        // x = lower + x', 0 ≤ x' ≤ upper − lower.
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut base = 0.0;
        for &j in &conts {
            fixed[j] = cols[j].lower;
        }
        for (k, &j) in conts.iter().enumerate() {
            let mut row = vec![0.0; conts.len()];
            row[k] = 1.0;
            a.push(row);
            b.push(cols[j].upper - cols[j].lower);
        }
        for r in model.rows() {
            let mut row = vec![0.0; conts.len()];
            for &(j, v) in &r.coeffs {
                if let Some(k) = conts.iter().position(|&c| c == j) {
                    row[k] = v;
                }
            }
            let rest = r.rhs - r.activity(&fixed);
            if matches!(r.sense, RowSense::Le | RowSense::Eq) {
                a.push(row.clone());
                b.push(rest);
            }
            if matches!(r.sense, RowSense::Ge | RowSense::Eq) {
                a.push(row.iter().map(|v| -v).collect());
                b.push(-rest);
            }
        }
        base += sign * model.objective_value(&fixed);
        let c: Vec<f64> = conts.iter().map(|&j| sign * cols[j].objective).collect();
        let value = if conts.is_empty() {
            if a.iter().zip(&b).all(|(_, &bi)| bi >= -1e-9) {
                Some(0.0)
            } else {
                None
            }
        } else {
            tableau_max(&c, &a, &b)
        };
        if let Some(v) = value {
            let total = base + v;
            if best.is_none_or(|bv| total > bv) {
                best = Some(total);
            }
        }
    }
    best.map(|v| sign * v)
}
