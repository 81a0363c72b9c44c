//! Mixed-binary linear programming: model representation, a bounded-variable
//! primal simplex, best-bound branch-and-bound, and fixed-form MPS export.

mod branch;
mod mps;
mod simplex;

use thiserror::Error;

pub use branch::{solve, solve_with, MilpSolution, MilpStatus, SolveOptions};
pub use mps::export_mps;
pub use simplex::Basis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("row `{row}` references column {col}, but the model has {ncols} columns")]
    UnknownColumn { row: String, col: usize, ncols: usize },
    #[error("row `{row}` lists column {col} more than once")]
    DuplicateColumn { row: String, col: usize },
    #[error("column `{0}` is binary but its bounds are not [0, 1]")]
    BinaryBounds(String),
    #[error("column `{0}` has lower bound above upper bound")]
    EmptyBounds(String),
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("simplex failed to converge within {0} pivots")]
    IterationCap(usize),
    #[error("basis matrix became singular")]
    SingularBasis,
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

impl Column {
    pub fn binary(name: impl Into<String>, objective: f64) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
            objective,
        }
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
            objective,
        }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self::continuous(name, f64::NEG_INFINITY, f64::INFINITY, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Self {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub sense: ObjectiveSense,
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, sense: ObjectiveSense) -> Self {
        Self {
            name: name.into(),
            sense,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_column(&mut self, column: Column) -> usize {
        self.columns.push(column);
        self.columns.len() - 1
    }

    /// Appends a row after checking its column references.
    pub fn push_row(&mut self, row: Row) -> Result<usize, MilpError> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    /// Returns a copy of the model with `rows` appended after the existing ones.
    pub fn add_rows(&self, rows: impl IntoIterator<Item = Row>) -> Result<MilpModel, MilpError> {
        let mut out = self.clone();
        out.extend_rows(rows)?;
        Ok(out)
    }

    /// In-place form of [`MilpModel::add_rows`]; on error the model is unchanged.
    pub fn extend_rows(&mut self, rows: impl IntoIterator<Item = Row>) -> Result<(), MilpError> {
        let rows: Vec<Row> = rows.into_iter().collect();
        for r in &rows {
            self.check_row(r)?;
        }
        self.rows.extend(rows);
        Ok(())
    }

    fn check_row(&self, row: &Row) -> Result<(), MilpError> {
        let n = self.columns.len();
        let mut seen = vec![false; n];
        for &(j, a) in &row.coeffs {
            if j >= n {
                return Err(MilpError::UnknownColumn {
                    row: row.name.clone(),
                    col: j,
                    ncols: n,
                });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(MilpError::DuplicateColumn {
                    row: row.name.clone(),
                    col: j,
                });
            }
            if !a.is_finite() {
                return Err(MilpError::NonFinite(row.name.clone()));
            }
        }
        if !row.rhs.is_finite() {
            return Err(MilpError::NonFinite(row.name.clone()));
        }
        Ok(())
    }

    /// Checks every model invariant.
    pub fn validate(&self) -> Result<(), MilpError> {
        for c in &self.columns {
            if c.kind == VarKind::Binary && (c.lower != 0.0 || c.upper != 1.0) {
                return Err(MilpError::BinaryBounds(c.name.clone()));
            }
            if c.lower > c.upper || c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(MilpError::EmptyBounds(c.name.clone()));
            }
            if !c.objective.is_finite() {
                return Err(MilpError::NonFinite(c.name.clone()));
            }
        }
        for r in &self.rows {
            self.check_row(r)?;
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.objective * v).sum()
    }

    /// Largest row violation or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        self.columns
            .iter()
            .zip(x)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0))
            .fold(rows, f64::max)
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }
}
