//! Browser bindings for three small interactive views: projecting a point
//! onto a parabolic cone, drawing the polyhedral block that stands in for a
//! rotated cone, and running the cutting-plane loop on a random instance.
//!
//! Every export returns a JSON string so the page needs no glue beyond
//! `JSON.parse`. Failures come back as `{"error": "..."}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::time::Duration;

use ocs::cdm::{run_cdm, CdmParams};
use ocs::lpp::{block_row_count, build_w_block, AngleSchedule, BlockVars};
use ocs::milp::{self, Column, MilpModel, MilpStatus, ObjectiveSense};
use ocs::oracle::enumerate_optimum;
use ocs::projection::{geometric_cut, project, ConePoint};
use ocs::SolveStatus;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

const LP_LIMIT: Duration = Duration::from_secs(5);

#[derive(Debug, Serialize)]
pub struct ProjectionView {
    pub inside: bool,
    pub foot: [f64; 2],
    /// `a_z·z + a_w·w ≤ b`, scaled to a unit normal. Absent when inside.
    pub cut: Option<[f64; 3]>,
    pub distance: f64,
}

pub fn projection_view(z: f64, w: f64, c0: f64) -> Result<ProjectionView, String> {
    if !(c0 > 0.0) || !z.is_finite() || !w.is_finite() {
        return Err("need finite z, w and c0 > 0".into());
    }
    let hat = ConePoint::new(z, w, c0);
    let bar = project(hat);
    let cut = if hat.is_inside() {
        None
    } else {
        let c = geometric_cut(hat, bar).map_err(|e| e.to_string())?;
        let norm = c.a_z.hypot(c.a_w);
        Some([c.a_z / norm, c.a_w / norm, c.b / norm])
    };
    Ok(ProjectionView {
        inside: hat.is_inside(),
        foot: [bar.z, bar.w],
        cut,
        distance: hat.dist2(&bar).sqrt(),
    })
}

#[derive(Debug, Serialize)]
pub struct BlockView {
    pub depth: usize,
    pub rows: usize,
    /// Extreme points of the `v0 = 1` slice, in angular order. Empty when unbounded.
    pub boundary: Vec<[f64; 2]>,
    pub unbounded: bool,
    pub max_radius: Option<f64>,
    /// `1 / cos(π / 2^s)`, the radius the slice should not exceed. Absent for `s = 1`.
    pub radius_bound: Option<f64>,
}

fn slice_model(s: usize, schedule: AngleSchedule, phi: f64) -> MilpModel {
    let mut m = MilpModel::new("slice", ObjectiveSense::Maximize);
    m.add_column(Column::continuous("v0", 1.0, 1.0, 0.0));
    m.add_column(Column::continuous("v1", f64::NEG_INFINITY, f64::INFINITY, phi.cos()));
    m.add_column(Column::continuous("v2", f64::NEG_INFINITY, f64::INFINITY, phi.sin()));
    for k in 0..2 * s {
        m.add_column(Column::free(format!("aux{k}")));
    }
    let vars = BlockVars {
        v0: 0,
        v1: 1,
        v2: 2,
        alpha: (3..3 + s).collect(),
        beta: (3 + s..3 + 2 * s).collect(),
    };
    let block = build_w_block(s, &vars, schedule, false, "w");
    m.extend_rows(block.rows.into_iter().map(|(_, r)| r))
        .expect("block rows index existing columns");
    m
}

pub fn block_view(s: usize, folded: bool, directions: usize) -> Result<BlockView, String> {
    if !(1..=12).contains(&s) {
        return Err("depth must be between 1 and 12".into());
    }
    let schedule = if folded {
        AngleSchedule::Folded
    } else {
        AngleSchedule::Reflected
    };
    let mut boundary: Vec<[f64; 2]> = Vec::new();
    let mut unbounded = false;
    for k in 0..directions.clamp(8, 720) {
        let phi = 2.0 * PI * k as f64 / directions.clamp(8, 720) as f64;
        let sol = milp::solve(&slice_model(s, schedule, phi), 0.0, LP_LIMIT).map_err(|e| e.to_string())?;
        match sol.status {
            MilpStatus::OptimalWithinGap => {
                let p = [sol.values[1], sol.values[2]];
                let fresh = boundary
                    .last()
                    .is_none_or(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-9);
                if fresh {
                    boundary.push(p);
                }
            }
            MilpStatus::Unbounded => {
                unbounded = true;
                break;
            }
            other => return Err(format!("slice LP ended with {other:?}")),
        }
    }
    if unbounded {
        boundary.clear();
    }
    if boundary.len() > 1 {
        let (a, b) = (boundary[0], boundary[boundary.len() - 1]);
        if (a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-9 {
            boundary.pop();
        }
    }
    let max_radius = (!unbounded).then(|| boundary.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max));
    Ok(BlockView {
        depth: s,
        rows: block_row_count(s),
        boundary,
        unbounded,
        max_radius,
        radius_bound: (s > 1).then(|| 1.0 / (PI / f64::powi(2.0, s as i32)).cos()),
    })
}

#[derive(Debug, Serialize)]
pub struct CdmView {
    pub m: usize,
    pub n: usize,
    pub two_theta: f64,
    pub ebv: Vec<f64>,
    /// Objective of every master solve, in order.
    pub master_objectives: Vec<f64>,
    /// Violated cones found after each master solve.
    pub violated: Vec<usize>,
    pub cuts_added: usize,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub coancestry: Option<f64>,
    /// One-based candidate ids.
    pub selected: Vec<usize>,
    pub oracle_objective: Option<f64>,
}

pub fn cdm_view(seed: u64, m: usize, n: usize, gap: f64) -> Result<CdmView, String> {
    if !(4..=16).contains(&m) || n < 1 || n >= m {
        return Err("need 4 ≤ m ≤ 16 and 1 ≤ N < m".into());
    }
    if !(0.0..1.0).contains(&gap) {
        return Err("gap must lie in [0, 1)".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = ocs::synth::binding_instance(&mut rng, m, n, 0.6);
    let params = CdmParams {
        gap,
        time_limit: Duration::from_secs(20),
        ..Default::default()
    };
    let run = run_cdm(&inst, &params).map_err(|e| e.to_string())?;
    let oracle = enumerate_optimum(&inst).map_err(|e| e.to_string())?;
    let finite = |v: f64| v.is_finite().then_some(v);
    let json = run.report.to_json();
    Ok(CdmView {
        m,
        n,
        two_theta: inst.two_theta(),
        ebv: inst.ebv().to_vec(),
        master_objectives: run.log.iter().map(|it| it.master_objective).collect(),
        violated: run.log.iter().map(|it| it.violated).collect(),
        cuts_added: run.report.cuts_added,
        status: run.report.status,
        objective: json.objective,
        coancestry: json.coancestry,
        selected: json.selected,
        oracle_objective: finite(oracle.objective),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("views serialize"),
        Err(e) => serde_json::json!({ "error": e }).to_string(),
    }
}

/// Foot of the projection of `(z, w)` onto `z² ≤ w·c0` and the separating cut.
#[wasm_bindgen]
pub fn project_point(z: f64, w: f64, c0: f64) -> String {
    to_json(projection_view(z, w, c0))
}

/// Slice `v0 = 1` of the depth-`s` block, traced along `directions` rays.
#[wasm_bindgen]
pub fn w_block(s: usize, folded: bool, directions: usize) -> String {
    to_json(block_view(s, folded, directions))
}

/// Cutting-plane run on a seeded random pedigree instance.
#[wasm_bindgen]
pub fn cdm_run(seed: u64, m: usize, n: usize, gap: f64) -> String {
    to_json(cdm_view(seed, m, n, gap))
}
