//! Cone decomposition cutting-plane loop.
//!
//! The diversity cone is rewritten as `z_i² ≤ w_i·c0` for every coordinate
//! of `z = Uy` plus `Σ w_i ≤ c0`. The master problem keeps only the linear
//! part; each round projects every violated `(ẑ_i, ŵ_i)` onto its parabolic
//! cone and adds the supporting hyperplane at the foot.

use std::time::Duration;

use thiserror::Error;

use crate::Instant;
use crate::instance::EdpInstance;
use crate::milp::{self, Column, MilpError, MilpModel, MilpStatus, ObjectiveSense, Row, RowSense, SolveOptions};
use crate::oracle::COANCESTRY_SLACK;
use crate::projection::{geometric_cut, project, violation_tolerance, ConePoint, GeometricCut, ProjectionError};
use crate::report::{Method, SolveReport, SolveStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CdmError {
    #[error("invalid parameter: {0}")]
    Params(&'static str),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdmParams {
    /// Stall threshold on successive `ẑ` and `ŵ`.
    pub delta: f64,
    /// Relative gap for every master solve.
    pub gap: f64,
    /// Excess `ẑ² − ŵc0` above which a cone counts as violated; `None`
    /// uses [`violation_tolerance`].
    pub violation_tol: Option<f64>,
    pub max_iterations: usize,
    pub time_limit: Duration,
    /// Before cutting, test whether `w_i = ẑ_i²/c0` already satisfies
    /// `Σ w_i ≤ c0`. If so the master point is feasible as it stands and
    /// the loop exits without chasing the master's arbitrary split of `w`.
    pub lift_w: bool,
}

impl Default for CdmParams {
    fn default() -> Self {
        Self {
            delta: 1e-8,
            gap: 0.01,
            violation_tol: None,
            max_iterations: 500,
            time_limit: Duration::from_secs(3 * 3600),
            lift_w: true,
        }
    }
}

impl CdmParams {
    fn validate(&self) -> Result<(), CdmError> {
        if !(self.delta >= 0.0) {
            return Err(CdmError::Params("delta must be nonnegative"));
        }
        if !(self.gap >= 0.0) {
            return Err(CdmError::Params("gap must be nonnegative"));
        }
        if self.violation_tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(CdmError::Params("violation tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Column positions in the master: `y`, then `z`, then `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MasterLayout {
    pub m: usize,
}

impl MasterLayout {
    pub fn y(&self, i: usize) -> usize {
        i
    }
    pub fn z(&self, i: usize) -> usize {
        self.m + i
    }
    pub fn w(&self, i: usize) -> usize {
        2 * self.m + i
    }
}

/// `c0 = √(2θN²)`.
pub fn cone_scale(inst: &EdpInstance) -> f64 {
    inst.cone_radius()
}

/// Linear part of the decomposed problem: `eᵀy = N`, `z = Uy`, `Σw ≤ c0`.
pub fn build_master(inst: &EdpInstance) -> MilpModel {
    let m = inst.m();
    let lay = MasterLayout { m };
    let n = inst.n() as f64;
    let mut model = MilpModel::new(format!("cdm_m{m}_n{}", inst.n()), ObjectiveSense::Maximize);
    for (i, &gi) in inst.ebv().iter().enumerate() {
        model.add_column(Column::binary(format!("y{}", i + 1), gi / n));
    }
    for i in 0..m {
        model.add_column(Column::free(format!("z{}", i + 1)));
    }
    for i in 0..m {
        model.add_column(Column::continuous(format!("w{}", i + 1), 0.0, f64::INFINITY, 0.0));
    }
    let push = |model: &mut MilpModel, row: Row| {
        model.push_row(row).expect("master rows reference existing columns");
    };
    push(&mut model, Row::new("card", (0..m).map(|i| (lay.y(i), 1.0)).collect(), RowSense::Eq, n));
    let u = inst.u();
    for i in 0..m {
        let mut coeffs = vec![(lay.z(i), 1.0)];
        for (k, &uik) in u.row_tail(i).iter().enumerate() {
            if uik != 0.0 {
                coeffs.push((lay.y(i + k), -uik));
            }
        }
        push(&mut model, Row::new(format!("zdef{}", i + 1), coeffs, RowSense::Eq, 0.0));
    }
    push(
        &mut model,
        Row::new("wsum", (0..m).map(|i| (lay.w(i), 1.0)).collect(), RowSense::Le, cone_scale(inst)),
    );
    model
}

/// Coordinates whose parabolic cone `values` violates by more than `tol`,
/// as `(i, ẑ_i, ŵ_i)`.
pub fn violated_cones(inst: &EdpInstance, values: &[f64], tol: f64) -> Vec<(usize, f64, f64)> {
    let lay = MasterLayout { m: inst.m() };
    let c0 = cone_scale(inst);
    (0..inst.m())
        .filter_map(|i| {
            let (z, w) = (values[lay.z(i)], values[lay.w(i)]);
            (z * z - w * c0 > tol).then_some((i, z, w))
        })
        .collect()
}

/// One generated cut, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutRecord {
    /// Master solve (1-based) whose incumbent produced the cut.
    pub iteration: usize,
    pub index: usize,
    pub cut: GeometricCut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdmIteration {
    pub master_objective: f64,
    pub master_bound: f64,
    pub violated: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct CdmRun {
    pub report: SolveReport,
    pub cuts: Vec<CutRecord>,
    pub log: Vec<CdmIteration>,
    /// Master including every cut added before exit.
    pub final_master: MilpModel,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn solve_edp_cdm(inst: &EdpInstance, params: &CdmParams) -> Result<SolveReport, CdmError> {
    Ok(run_cdm(inst, params)?.report)
}

/// Full loop with cut pool and per-iteration log.
pub fn run_cdm(inst: &EdpInstance, params: &CdmParams) -> Result<CdmRun, CdmError> {
    params.validate()?;
    let start = Instant::now();
    let m = inst.m();
    let lay = MasterLayout { m };
    let c0 = cone_scale(inst);
    let tol = params.violation_tol.unwrap_or_else(|| violation_tolerance(c0));

    let mut master = build_master(inst);
    let mut report = SolveReport::new(Method::Cdm);
    report.gap_requested = params.gap;
    report.constraints_first = master.num_rows();
    let mut cuts: Vec<CutRecord> = Vec::new();
    let mut log: Vec<CdmIteration> = Vec::new();
    let mut warm = None;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;

    let status = loop {
        if report.iterations >= params.max_iterations {
            break SolveStatus::IterationLimit;
        }
        let Some(remaining) = params.time_limit.checked_sub(start.elapsed()) else {
            break SolveStatus::TimeLimit;
        };
        let sol = milp::solve_with(
            &master,
            &SolveOptions {
                gap: params.gap,
                time_limit: remaining,
                warm_start: warm.take(),
                trace_bounds: false,
            },
        )?;
        report.iterations += 1;
        let k = report.iterations;
        match sol.status {
            MilpStatus::Infeasible | MilpStatus::Unbounded => {
                report.selected.clear();
                break SolveStatus::Infeasible;
            }
            MilpStatus::TimeLimit if !sol.has_incumbent() => break SolveStatus::TimeLimit,
            _ => {}
        }
        report.master_objectives.push(sol.objective);
        report.bound_final = sol.best_bound;
        report.selected = (0..m).filter(|&i| sol.values[lay.y(i)] > 0.5).collect();
        if sol.status == MilpStatus::TimeLimit {
            break SolveStatus::TimeLimit;
        }

        let z: Vec<f64> = (0..m).map(|i| sol.values[lay.z(i)]).collect();
        let w: Vec<f64> = (0..m).map(|i| sol.values[lay.w(i)]).collect();
        let lifted = params.lift_w && z.iter().map(|v| v * v).sum::<f64>() - c0 * c0 <= tol;
        let violated = if lifted { Vec::new() } else { violated_cones(inst, &sol.values, tol) };
        log.push(CdmIteration {
            master_objective: sol.objective,
            master_bound: sol.best_bound,
            violated: violated.len(),
            wall_time: start.elapsed(),
        });
        if violated.is_empty() {
            break SolveStatus::Optimal;
        }

        if let Some((pz, pw)) = &previous {
            if max_abs_diff(&z, pz) <= params.delta && max_abs_diff(&w, pw) <= params.delta {
                break SolveStatus::Stalled;
            }
        }
        previous = Some((z, w));

        let mut rows = Vec::with_capacity(violated.len());
        for (i, zh, wh) in violated {
            let hat = ConePoint::new(zh, wh, c0);
            let raw = geometric_cut(hat, project(hat))?;
            // Unit normal keeps cut rows on the scale of the other rows.
            let norm = raw.a_z.hypot(raw.a_w);
            let cut = GeometricCut {
                a_z: raw.a_z / norm,
                a_w: raw.a_w / norm,
                b: raw.b / norm,
            };
            let coeffs = [(lay.z(i), cut.a_z), (lay.w(i), cut.a_w)]
                .into_iter()
                .filter(|&(_, a)| a != 0.0)
                .collect();
            rows.push(Row::new(format!("cut_{k}_{}", i + 1), coeffs, RowSense::Le, cut.b));
            cuts.push(CutRecord {
                iteration: k,
                index: i,
                cut,
            });
        }
        warm = sol.root_basis.map(|b| b.with_added_rows(rows.len()));
        report.cuts_added += rows.len();
        master.extend_rows(rows)?;
    };

    report.constraints_last = master.num_rows();
    if status == SolveStatus::Infeasible || report.selected.is_empty() {
        report.selected.clear();
    } else {
        report.objective = inst.objective(&report.selected);
        report.coancestry = inst.coancestry(&report.selected);
    }
    report.status = match status {
        // Every cone within tol gives ‖z‖² ≤ c0² + m·tol.
        SolveStatus::Optimal
            if report.coancestry
                > inst.two_theta() + COANCESTRY_SLACK + m as f64 * tol / (inst.n() * inst.n()) as f64 =>
        {
            SolveStatus::RelaxationViolated
        }
        s => s,
    };
    report.wall_time = start.elapsed();
    Ok(CdmRun {
        report,
        cuts,
        log,
        final_master: master,
    })
}
