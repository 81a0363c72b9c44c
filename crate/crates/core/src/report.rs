//! Solver-agnostic result record and its JSON form.

use std::fmt;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cdm,
    Lpp,
    LppAcsm,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cdm => "cdm",
            Method::Lpp => "lpp",
            Method::LppAcsm => "lpp-acsm",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Solved to the requested gap and the selection meets the diversity cap.
    Optimal,
    Infeasible,
    TimeLimit,
    /// Cutting-plane iterates stopped moving before all cones were satisfied.
    Stalled,
    IterationLimit,
    /// A relaxation was solved, but its selection exceeds the diversity cap.
    RelaxationViolated,
}

impl SolveStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::RelaxationViolated)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    /// `gᵀx`.
    pub objective: f64,
    /// `xᵀAx`.
    pub coancestry: f64,
    /// Zero-based candidate indices, sorted.
    pub selected: Vec<usize>,
    pub iterations: usize,
    pub cuts_added: usize,
    pub constraints_first: usize,
    pub constraints_last: usize,
    pub gap_requested: f64,
    /// Last proven upper bound on the objective.
    pub bound_final: f64,
    pub wall_time: Duration,
    /// Objective of every master/model solve, in order.
    pub master_objectives: Vec<f64>,
}

impl SolveReport {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            coancestry: f64::NAN,
            selected: Vec::new(),
            iterations: 0,
            cuts_added: 0,
            constraints_first: 0,
            constraints_last: 0,
            gap_requested: 0.0,
            bound_final: f64::NAN,
            wall_time: Duration::ZERO,
            master_objectives: Vec::new(),
        }
    }

    pub fn to_json(&self) -> ReportJson {
        let finite = |v: f64| v.is_finite().then_some(v);
        ReportJson {
            method: self.method.to_string(),
            objective: finite(self.objective),
            coancestry: finite(self.coancestry),
            selected: self.selected.iter().map(|i| i + 1).collect(),
            n_selected: self.selected.len(),
            iterations: self.iterations,
            constraints_first: self.constraints_first,
            constraints_last: self.constraints_last,
            cuts_added: self.cuts_added,
            gap_requested: self.gap_requested,
            bound_final: finite(self.bound_final),
            wall_time_sec: self.wall_time.as_secs_f64(),
            status: self.status,
        }
    }
}

/// On-disk report schema. Candidate ids are one-based, matching input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub method: String,
    pub objective: Option<f64>,
    pub coancestry: Option<f64>,
    pub selected: Vec<usize>,
    pub n_selected: usize,
    pub iterations: usize,
    pub constraints_first: usize,
    pub constraints_last: usize,
    pub cuts_added: usize,
    pub gap_requested: f64,
    pub bound_final: Option<f64>,
    pub wall_time_sec: f64,
    pub status: SolveStatus,
}

pub fn report_to_string(report: &SolveReport) -> String {
    serde_json::to_string_pretty(&report.to_json()).expect("report is always serializable")
}

pub fn write_report(report: &SolveReport, path: &Path) -> std::io::Result<()> {
    let mut text = report_to_string(report);
    text.push('\n');
    std::fs::write(path, text)
}
