//! Best-bound branch-and-bound over the binary columns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Duration;

use crate::Instant;
use super::simplex::{Basis, LpEngine, LpOutcome, LpStatus};
use super::{MilpError, MilpModel, ObjectiveSense, VarKind};

/// Distance from {0, 1} still treated as integral during the search.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Row and bound tolerance for accepting a rounded incumbent.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Relative slack when pruning against the incumbent at zero gap.
const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    OptimalWithinGap,
    Infeasible,
    Unbounded,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Column values of the incumbent; empty when there is none.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven bound on the objective, in the model's sense.
    pub best_bound: f64,
    /// `|bound − objective| / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: usize,
    pub lp_pivots: usize,
    /// Optimal basis of the root relaxation, reusable as a warm start.
    pub root_basis: Option<Basis>,
    /// Global best bound after each processed node (model sense).
    pub bound_trace: Vec<f64>,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub gap: f64,
    pub time_limit: Duration,
    /// Basis to seed the root LP with.
    pub warm_start: Option<Basis>,
    /// Record [`MilpSolution::bound_trace`].
    pub trace_bounds: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap: 0.0,
            time_limit: Duration::from_secs(3 * 3600),
            warm_start: None,
            trace_bounds: false,
        }
    }
}

pub fn solve(model: &MilpModel, gap: f64, time_limit: Duration) -> Result<MilpSolution, MilpError> {
    solve_with(
        model,
        &SolveOptions {
            gap,
            time_limit,
            ..Default::default()
        },
    )
}

struct Node {
    id: usize,
    /// LP value in minimization orientation.
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Basis,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    engine: LpEngine,
    binaries: Vec<usize>,
    sign: f64,
    pivots: usize,
}

impl Search<'_> {
    fn lp(&mut self, lower: &[f64], upper: &[f64], warm: Option<&Basis>) -> Result<LpOutcome, MilpError> {
        let out = self.engine.solve(lower, upper, warm)?;
        self.pivots += out.pivots;
        Ok(out)
    }

    /// Most fractional binary, ties to the lowest index.
    fn branching_column(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let frac = (x[j] - x[j].round()).abs();
            if frac <= INTEGRALITY_TOL {
                continue;
            }
            if best.is_none_or(|(_, f)| frac > f) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Rounds the binaries of an integral LP point, re-solves for the
    /// continuous part, and checks the result against the original model.
    fn polish(&mut self, node: &Node) -> Result<Option<(f64, Vec<f64>)>, MilpError> {
        let mut lower = node.lower.clone();
        let mut upper = node.upper.clone();
        for &j in &self.binaries {
            let v = node.x[j].round();
            lower[j] = v;
            upper[j] = v;
        }
        let out = self.lp(&lower, &upper, Some(&node.basis))?;
        if out.status != LpStatus::Optimal {
            return Ok(None);
        }
        let mut x = out.x;
        for &j in &self.binaries {
            x[j] = lower[j];
        }
        let scale = x.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if self.model.max_violation(&x) > FEASIBILITY_TOL * scale {
            return Ok(None);
        }
        Ok(Some((self.sign * self.model.objective_value(&x), x)))
    }
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound).max(0.0)) / incumbent.abs().max(1.0)
}

pub fn solve_with(model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, MilpError> {
    model.validate()?;
    let start = Instant::now();
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let binaries: Vec<usize> = model
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let engine = LpEngine::new(model);
    let (lower, upper) = engine.column_bounds();
    let mut search = Search {
        model,
        engine,
        binaries,
        sign,
        pivots: 0,
    };

    let mut solution = MilpSolution {
        status: MilpStatus::Infeasible,
        values: Vec::new(),
        objective: f64::NAN,
        best_bound: f64::NAN,
        gap: f64::INFINITY,
        nodes: 0,
        lp_pivots: 0,
        root_basis: None,
        bound_trace: Vec::new(),
    };

    let root = search.lp(&lower, &upper, opts.warm_start.as_ref())?;
    match root.status {
        LpStatus::Infeasible => {
            solution.lp_pivots = search.pivots;
            solution.nodes = 1;
            return Ok(solution);
        }
        LpStatus::Unbounded => {
            solution.status = MilpStatus::Unbounded;
            solution.lp_pivots = search.pivots;
            solution.nodes = 1;
            return Ok(solution);
        }
        LpStatus::Optimal => {}
    }
    solution.root_basis = Some(root.basis.clone());

    let mut next_id = 0usize;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: next_id,
        bound: sign * root.objective,
        lower,
        upper,
        x: root.x,
        basis: root.basis,
    });
    next_id += 1;

    // Incumbent in minimization orientation.
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut global_bound = f64::NEG_INFINITY;
    let mut timed_out = false;

    while let Some(node) = heap.pop() {
        global_bound = global_bound.max(node.bound);
        if let Some((inc, _)) = &incumbent {
            if relative_gap(*inc, node.bound) <= opts.gap
                || node.bound >= inc - PRUNE_TOL * inc.abs().max(1.0)
            {
                // Best-first: every remaining node is at least as bad.
                global_bound = global_bound.max(node.bound.min(*inc));
                heap.clear();
                break;
            }
        }
        if start.elapsed() > opts.time_limit {
            heap.push(node);
            timed_out = true;
            break;
        }
        solution.nodes += 1;
        if opts.trace_bounds {
            solution.bound_trace.push(sign * global_bound);
        }

        let Some(j) = search.branching_column(&node.x) else {
            if let Some((value, x)) = search.polish(&node)? {
                if incumbent.as_ref().is_none_or(|(inc, _)| value < *inc) {
                    incumbent = Some((value, x));
                }
            }
            continue;
        };

        for fix in [0.0, 1.0] {
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[j] = fix;
            upper[j] = fix;
            let out = search.lp(&lower, &upper, Some(&node.basis))?;
            if out.status != LpStatus::Optimal {
                continue;
            }
            // Children cannot beat their parent; clamp roundoff.
            let bound = (sign * out.objective).max(node.bound);
            if let Some((inc, _)) = &incumbent {
                if bound >= inc - PRUNE_TOL * inc.abs().max(1.0) {
                    continue;
                }
            }
            heap.push(Node {
                id: next_id,
                bound,
                lower,
                upper,
                x: out.x,
                basis: out.basis,
            });
            next_id += 1;
        }
    }

    solution.lp_pivots = search.pivots;
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    match incumbent {
        Some((value, x)) => {
            let bound = if timed_out {
                open_bound.min(value)
            } else if heap.is_empty() && global_bound == f64::NEG_INFINITY {
                value
            } else {
                global_bound.min(value)
            };
            solution.values = x;
            solution.objective = sign * value;
            solution.best_bound = sign * bound;
            solution.gap = relative_gap(value, bound);
            solution.status = if timed_out && solution.gap > opts.gap {
                MilpStatus::TimeLimit
            } else {
                MilpStatus::OptimalWithinGap
            };
        }
        None => {
            if timed_out {
                solution.status = MilpStatus::TimeLimit;
                solution.best_bound = sign * open_bound;
            }
        }
    }
    Ok(solution)
}
