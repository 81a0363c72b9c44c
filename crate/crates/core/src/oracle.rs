//! Brute-force EDP solver: scans every `N`-subset of the `m` candidates.
//!
//! Intentionally unclever. It is the ground truth the cutting-plane and
//! relaxation solvers are checked against on small instances.

use thiserror::Error;

use crate::Instant;
use crate::instance::EdpInstance;
use crate::report::{Method, SolveReport, SolveStatus};

/// Largest number of subsets [`enumerate_optimum`] will scan.
pub const MAX_SUBSETS: u128 = 10_000_000;

/// Slack on the coancestry test so that a selection sitting exactly on the
/// cap does not flap at machine epsilon.
pub const COANCESTRY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("C({m}, {n}) = {count} subsets exceeds the enumeration guard of {MAX_SUBSETS}")]
    TooManySubsets { m: usize, n: usize, count: u128 },
}

/// `C(m, n)`, saturating at `u128::MAX`.
pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let k = n.min(m - n) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(m as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic iterator over the `n`-subsets of `0..m`.
#[derive(Debug, Clone)]
pub struct Combinations {
    m: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            current: (0..n).collect(),
            done: n > m,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        // Advance: rightmost position that can still move.
        let mut i = n;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.m - n + i {
                self.current[i] += 1;
                for k in (i + 1)..n {
                    self.current[k] = self.current[k - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Best feasible selection (ties go to the lexicographically smallest set),
/// or a report with status [`SolveStatus::Infeasible`].
pub fn enumerate_optimum(inst: &EdpInstance) -> Result<SolveReport, OracleError> {
    let (m, n) = (inst.m(), inst.n());
    let count = binomial(m, n);
    if count > MAX_SUBSETS {
        return Err(OracleError::TooManySubsets { m, n, count });
    }
    let start = Instant::now();
    let cap = inst.two_theta() + COANCESTRY_SLACK;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in Combinations::new(m, n) {
        let obj = inst.objective(&subset);
        if best.as_ref().is_some_and(|(b, _)| obj <= *b) {
            continue;
        }
        if inst.coancestry(&subset) <= cap {
            best = Some((obj, subset));
        }
    }
    let mut report = SolveReport::new(Method::Oracle);
    report.iterations = 1;
    report.wall_time = start.elapsed();
    match best {
        Some((obj, selected)) => {
            report.coancestry = inst.coancestry(&selected);
            report.objective = obj;
            report.bound_final = obj;
            report.selected = selected;
            report.status = SolveStatus::Optimal;
        }
        None => report.status = SolveStatus::Infeasible,
    }
    Ok(report)
}
