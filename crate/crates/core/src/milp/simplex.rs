//! Bounded-variable primal simplex on `A x − r = 0`, where `r` holds one
//! logical variable per row whose bounds encode the row sense.
//!
//! The basis inverse is kept dense, updated by elementary row operations and
//! rebuilt by Gauss-Jordan elimination every [`REFACTOR_EVERY`] pivots.
//! Phase one minimizes the sum of bound violations of the basic variables
//! from whatever basis it is handed, which is what makes warm starts after
//! bound changes or row additions work.

use super::{MilpError, MilpModel, ObjectiveSense, RowSense};

pub(crate) const REFACTOR_EVERY: usize = 50;
/// Consecutive degenerate pivots before switching to Bland's rule.
pub(crate) const BLAND_AFTER: usize = 500;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Zero,
}

/// Simplex basis: a status for every structural column followed by every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    ncols: usize,
    status: Vec<VarStatus>,
}

impl Basis {
    fn slack(ncols: usize, nrows: usize) -> Self {
        let mut status = vec![VarStatus::AtLower; ncols];
        status.extend(std::iter::repeat_n(VarStatus::Basic, nrows));
        Self { ncols, status }
    }

    pub fn num_columns(&self) -> usize {
        self.ncols
    }

    pub fn num_rows(&self) -> usize {
        self.status.len() - self.ncols
    }

    /// The same basis after `extra` rows were appended to the model; the new
    /// rows' logicals enter the basis.
    pub fn with_added_rows(&self, extra: usize) -> Self {
        let mut out = self.clone();
        out.status
            .extend(std::iter::repeat_n(VarStatus::Basic, extra));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Structural values.
    pub x: Vec<f64>,
    /// Objective in the model's own sense.
    pub objective: f64,
    pub basis: Basis,
    pub pivots: usize,
}

/// Reusable LP solver for one model; only column bounds vary between solves.
pub(crate) struct LpEngine {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    /// Minimization costs of the structurals.
    cost: Vec<f64>,
    sign: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    // Working state.
    binv: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    loaded: bool,
    since_refactor: usize,
}

impl LpEngine {
    pub fn new(model: &MilpModel) -> Self {
        let n = model.num_columns();
        let m = model.num_rows();
        let mut counts = vec![0usize; n + 1];
        for r in model.rows() {
            for &(j, _) in &r.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut row_idx = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        for (i, r) in model.rows().iter().enumerate() {
            for &(j, a) in &r.coeffs {
                row_idx[fill[j]] = i;
                vals[fill[j]] = a;
                fill[j] += 1;
            }
        }
        let sign = match model.sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let cost = model.columns().iter().map(|c| sign * c.objective).collect();
        let mut lower: Vec<f64> = model.columns().iter().map(|c| c.lower).collect();
        let mut upper: Vec<f64> = model.columns().iter().map(|c| c.upper).collect();
        for r in model.rows() {
            let (l, u) = match r.sense {
                RowSense::Le => (f64::NEG_INFINITY, r.rhs),
                RowSense::Ge => (r.rhs, f64::INFINITY),
                RowSense::Eq => (r.rhs, r.rhs),
            };
            lower.push(l);
            upper.push(u);
        }
        Self {
            n,
            m,
            col_start,
            row_idx,
            vals,
            cost,
            sign,
            lower,
            upper,
            binv: vec![0.0; m * m],
            head: Vec::new(),
            status: Vec::new(),
            x: vec![0.0; n + m],
            loaded: false,
            since_refactor: 0,
        }
    }

    pub fn column_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lower[..self.n].to_vec(), self.upper[..self.n].to_vec())
    }

    /// Solves with the given structural bounds, starting from `warm` if it
    /// fits the model, else from the all-logical basis.
    pub fn solve(
        &mut self,
        col_lower: &[f64],
        col_upper: &[f64],
        warm: Option<&Basis>,
    ) -> Result<LpOutcome, MilpError> {
        self.lower[..self.n].copy_from_slice(col_lower);
        self.upper[..self.n].copy_from_slice(col_upper);

        let fits = |b: &Basis| {
            b.ncols == self.n
                && b.status.len() == self.n + self.m
                && b.status.iter().filter(|s| **s == VarStatus::Basic).count() == self.m
        };
        let wanted = match warm {
            Some(b) if fits(b) => b.clone(),
            _ => Basis::slack(self.n, self.m),
        };
        let same_basis = self.loaded
            && wanted
                .status
                .iter()
                .zip(&self.status)
                .all(|(a, b)| (*a == VarStatus::Basic) == (*b == VarStatus::Basic));
        if same_basis {
            self.status = wanted.status;
            for p in 0..self.m {
                let v = self.head[p];
                self.status[v] = VarStatus::Basic;
            }
        } else {
            self.status = wanted.status;
            self.head = (0..self.n + self.m)
                .filter(|&j| self.status[j] == VarStatus::Basic)
                .collect();
            if self.refactor().is_err() {
                let slack = Basis::slack(self.n, self.m);
                self.status = slack.status;
                self.head = (self.n..self.n + self.m).collect();
                self.refactor()?;
            }
        }
        self.place_nonbasics();
        self.compute_basics();
        self.loaded = true;
        let result = self.iterate();
        if result.is_err() {
            self.loaded = false;
        }
        result
    }

    fn place_nonbasics(&mut self) {
        for j in 0..self.n + self.m {
            let (l, u) = (self.lower[j], self.upper[j]);
            let st = self.status[j];
            if st == VarStatus::Basic {
                continue;
            }
            let (st, v) = match st {
                VarStatus::AtUpper if u.is_finite() => (VarStatus::AtUpper, u),
                _ if l.is_finite() => (VarStatus::AtLower, l),
                _ if u.is_finite() => (VarStatus::AtUpper, u),
                _ => (VarStatus::Zero, 0.0),
            };
            self.status[j] = st;
            self.x[j] = v;
        }
    }

    /// Scatters column `j` of `[A, −I]` as (row, value) pairs into `f`.
    #[inline]
    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.row_idx[k], self.vals[k]);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    fn refactor(&mut self) -> Result<(), MilpError> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (p, &j) in self.head.iter().enumerate() {
            self.for_column(j, |i, a| b[i * m + p] = a);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (piv_row, piv_abs) = (c..m)
                .map(|r| (r, b[r * m + c].abs()))
                .fold((c, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if piv_abs < SINGULAR_TOL {
                return Err(MilpError::SingularBasis);
            }
            if piv_row != c {
                for k in 0..m {
                    b.swap(c * m + k, piv_row * m + k);
                    inv.swap(c * m + k, piv_row * m + k);
                }
            }
            let d = 1.0 / b[c * m + c];
            for k in 0..m {
                b[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = b[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in c..m {
                    b[r * m + k] -= f * b[c * m + k];
                }
                for k in 0..m {
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        // Gauss-Jordan on B with column p ↔ position p yields B⁻¹ whose row
        // p belongs to basic position p.
        self.binv = inv;
        self.since_refactor = 0;
        Ok(())
    }

    fn compute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.x[j];
            if v != 0.0 {
                self.for_column(j, |i, a| rhs[i] -= a * v);
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.head[p]] = v;
        }
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let x = self.x[v];
        if x < self.lower[v] - PRIMAL_TOL {
            -1.0
        } else if x > self.upper[v] + PRIMAL_TOL {
            1.0
        } else {
            0.0
        }
    }

    fn iterate(&mut self) -> Result<LpOutcome, MilpError> {
        let (n, m) = (self.n, self.m);
        let cap = 50 * (n + m) + 10_000;
        let mut pivots = 0usize;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut cb = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];

        loop {
            if pivots > cap {
                return Err(MilpError::IterationCap(cap));
            }
            let mut phase_one = false;
            for p in 0..m {
                let s = self.infeasibility(self.head[p]);
                if s != 0.0 {
                    phase_one = true;
                }
                cb[p] = s;
            }
            if !phase_one {
                for p in 0..m {
                    let v = self.head[p];
                    cb[p] = if v < n { self.cost[v] } else { 0.0 };
                }
            }
            y.iter_mut().for_each(|v| *v = 0.0);
            for p in 0..m {
                if cb[p] != 0.0 {
                    let row = &self.binv[p * m..(p + 1) * m];
                    for (yk, b) in y.iter_mut().zip(row) {
                        *yk += cb[p] * b;
                    }
                }
            }

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n + m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if !phase_one && j < n { self.cost[j] } else { 0.0 };
                let mut d = c;
                self.for_column(j, |i, a| d -= y[i] * a);
                let can_up = matches!(st, VarStatus::AtLower | VarStatus::Zero) && d < -DUAL_TOL;
                let can_down = matches!(st, VarStatus::AtUpper | VarStatus::Zero) && d > DUAL_TOL;
                if !(can_up || can_down) {
                    continue;
                }
                let better = match entering {
                    None => true,
                    Some((_, best)) => !bland && d.abs() > best.abs(),
                };
                if better {
                    entering = Some((j, d));
                }
            }

            let Some((q, dq)) = entering else {
                if self.since_refactor > 0 {
                    // Confirm against a fresh factorization before stopping.
                    self.refactor()?;
                    self.compute_basics();
                    let still = (0..m).any(|p| self.infeasibility(self.head[p]) != 0.0);
                    if still != phase_one {
                        continue;
                    }
                    if !phase_one {
                        // Reduced costs may shift too; re-price once.
                        self.since_refactor = 0;
                        let again = self.has_improving_column();
                        if again {
                            continue;
                        }
                    }
                }
                let status = if phase_one {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
                return Ok(self.outcome(status, pivots));
            };

            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            alpha.iter_mut().for_each(|v| *v = 0.0);
            {
                let binv = &self.binv;
                let mut acc = |i: usize, a: f64| {
                    for p in 0..m {
                        alpha[p] += binv[p * m + i] * a;
                    }
                };
                if q < n {
                    for k in self.col_start[q]..self.col_start[q + 1] {
                        acc(self.row_idx[k], self.vals[k]);
                    }
                } else {
                    acc(q - n, -1.0);
                }
            }

            // Ratio test (Harris two-pass outside Bland mode).
            let flip = self.upper[q] - self.lower[q];
            let mut relaxed_min = f64::INFINITY;
            let mut exact_min = f64::INFINITY;
            let mut ratios: Vec<(usize, f64, bool)> = Vec::new();
            for p in 0..m {
                let rate = -dir * alpha[p];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let v = self.head[p];
                let (xv, l, u) = (self.x[v], self.lower[v], self.upper[v]);
                let below = xv < l - PRIMAL_TOL;
                let above = xv > u + PRIMAL_TOL;
                // (limit the variable will stop at, leaves at upper?)
                let target = if below {
                    (rate > 0.0).then_some((l, false))
                } else if above {
                    (rate < 0.0).then_some((u, true))
                } else if rate < 0.0 {
                    l.is_finite().then_some((l, false))
                } else {
                    u.is_finite().then_some((u, true))
                };
                let Some((bound, at_upper)) = target else {
                    continue;
                };
                let t = ((bound - xv) / rate).max(0.0);
                let slack = if rate > 0.0 { PRIMAL_TOL } else { -PRIMAL_TOL };
                let tr = ((bound + slack - xv) / rate).max(0.0);
                relaxed_min = relaxed_min.min(tr);
                exact_min = exact_min.min(t);
                ratios.push((p, t, at_upper));
            }

            if flip.is_finite() && flip <= exact_min {
                // Entering variable runs to its opposite bound.
                let t = flip;
                self.x[q] += dir * t;
                for p in 0..m {
                    self.x[self.head[p]] -= dir * alpha[p] * t;
                }
                self.status[q] = if dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                pivots += 1;
                degenerate = 0;
                bland = false;
                continue;
            }

            let chosen = if bland {
                ratios
                    .iter()
                    .filter(|r| r.1 <= exact_min + 1e-12)
                    .min_by_key(|r| self.head[r.0])
                    .copied()
            } else {
                ratios
                    .iter()
                    .filter(|r| r.1 <= relaxed_min)
                    .max_by(|a, b| alpha[a.0].abs().total_cmp(&alpha[b.0].abs()))
                    .copied()
            };
            let Some((p, t, at_upper)) = chosen else {
                if phase_one {
                    return Err(MilpError::Numerical("phase one found no blocking variable"));
                }
                return Ok(self.outcome(LpStatus::Unbounded, pivots));
            };

            self.x[q] += dir * t;
            for k in 0..m {
                self.x[self.head[k]] -= dir * alpha[k] * t;
            }
            let leaving = self.head[p];
            self.x[leaving] = if at_upper {
                self.upper[leaving]
            } else {
                self.lower[leaving]
            };
            self.status[leaving] = if at_upper {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            };
            self.status[q] = VarStatus::Basic;
            self.head[p] = q;

            // Pivot the inverse on alpha[p].
            let piv = alpha[p];
            {
                let (before, rest) = self.binv.split_at_mut(p * m);
                let (prow, after) = rest.split_at_mut(m);
                for v in prow.iter_mut() {
                    *v /= piv;
                }
                for (r, chunk) in before.chunks_mut(m).enumerate() {
                    let f = alpha[r];
                    if f != 0.0 {
                        for (c, pv) in chunk.iter_mut().zip(prow.iter()) {
                            *c -= f * pv;
                        }
                    }
                }
                for (r, chunk) in after.chunks_mut(m).enumerate() {
                    let f = alpha[p + 1 + r];
                    if f != 0.0 {
                        for (c, pv) in chunk.iter_mut().zip(prow.iter()) {
                            *c -= f * pv;
                        }
                    }
                }
            }
            pivots += 1;
            self.since_refactor += 1;
            if t <= 1e-12 {
                degenerate += 1;
                if degenerate >= BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                self.compute_basics();
            }
        }
    }

    fn has_improving_column(&self) -> bool {
        let (n, m) = (self.n, self.m);
        let cb: Vec<f64> = self
            .head
            .iter()
            .map(|&v| if v < n { self.cost[v] } else { 0.0 })
            .collect();
        let mut y = vec![0.0; m];
        for p in 0..m {
            if cb[p] != 0.0 {
                for k in 0..m {
                    y[k] += cb[p] * self.binv[p * m + k];
                }
            }
        }
        (0..n + m).any(|j| {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                return false;
            }
            let mut d = if j < n { self.cost[j] } else { 0.0 };
            self.for_column(j, |i, a| d -= y[i] * a);
            (matches!(st, VarStatus::AtLower | VarStatus::Zero) && d < -DUAL_TOL)
                || (matches!(st, VarStatus::AtUpper | VarStatus::Zero) && d > DUAL_TOL)
        })
    }

    fn outcome(&self, status: LpStatus, pivots: usize) -> LpOutcome {
        let x = self.x[..self.n].to_vec();
        let objective =
            self.sign * self.cost.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
        LpOutcome {
            status,
            x,
            objective,
            basis: Basis {
                ncols: self.n,
                status: self.status.clone(),
            },
            pivots,
        }
    }
}
