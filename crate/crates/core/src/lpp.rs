//! Lifted polyhedral relaxation of the diversity cone.
//!
//! `(√(2θ)N, Uy) ∈ K^m` is split into a binary tower of three-variable cells
//! `‖(v1, v2)‖ ≤ v0`, and each cell is replaced by a rotation-recursion
//! polyhedron whose depth follows from the accuracy `ε`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Duration;

use thiserror::Error;

use crate::Instant;
use crate::instance::EdpInstance;
use crate::milp::{self, Column, MilpError, MilpModel, MilpStatus, ObjectiveSense, Row, RowSense};
use crate::oracle::COANCESTRY_SLACK;
use crate::report::{Method, SolveReport, SolveStatus};

/// Rows within this distance of their bound count as active.
pub const ACTIVE_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LppError {
    #[error("tower decomposition needs m ≥ 2, got {0}")]
    TooSmall(usize),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("relaxation for epsilon = {epsilon} ended with status {status:?}")]
    Unsolved { epsilon: f64, status: MilpStatus },
}

/// One cone cell `‖(v1, v2)‖ ≤ v0`, as indices into the lifted variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub layer: usize,
    pub v0: usize,
    pub v1: usize,
    pub v2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerLayout {
    pub m: usize,
    /// Layer sizes `t_0 = m, …, t_J = 1`.
    pub sizes: Vec<usize>,
    pub cells: Vec<Cell>,
    /// `(δ^j_last, δ^{j+1}_last)` pairs tied by an equality on odd layers.
    pub passthroughs: Vec<(usize, usize)>,
    offsets: Vec<usize>,
}

impl TowerLayout {
    /// `J = ⌈log₂ m⌉`.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Total lifted variable count `T(m)`.
    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Flat index of `δ^layer_i` (zero-based `i`).
    pub fn var(&self, layer: usize, i: usize) -> usize {
        debug_assert!(i < self.sizes[layer]);
        self.offsets[layer] + i
    }

    /// Flat index of the tower root, which carries the cone radius.
    pub fn root(&self) -> usize {
        self.total() - 1
    }

    pub fn cells_in_layer(&self, layer: usize) -> usize {
        self.sizes[layer] / 2
    }
}

pub fn tower_layout(m: usize) -> Result<TowerLayout, LppError> {
    if m < 2 {
        return Err(LppError::TooSmall(m));
    }
    let mut sizes = vec![m];
    while *sizes.last().unwrap() > 1 {
        let t = *sizes.last().unwrap();
        sizes.push(t.div_ceil(2));
    }
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for &t in &sizes {
        offsets.push(acc);
        acc += t;
    }
    let mut layout = TowerLayout {
        m,
        sizes,
        cells: Vec::new(),
        passthroughs: Vec::new(),
        offsets,
    };
    for j in 0..layout.depth() {
        let t = layout.sizes[j];
        for i in 0..t / 2 {
            layout.cells.push(Cell {
                layer: j,
                v0: layout.var(j + 1, i),
                v1: layout.var(j, 2 * i),
                v2: layout.var(j, 2 * i + 1),
            });
        }
        if t % 2 == 1 {
            layout
                .passthroughs
                .push((layout.var(j, t - 1), layout.var(j + 1, layout.sizes[j + 1] - 1)));
        }
    }
    Ok(layout)
}

/// Logarithm used inside the depth formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

/// `s_j(ε) = ⌈(j+1)/2⌉ − ⌈log₄((16/9)π⁻² log(1+ε))⌉`, clamped to at least 1.
pub fn approximation_depth(j: usize, epsilon: f64) -> Result<usize, LppError> {
    approximation_depth_with(j, epsilon, LogBase::Natural)
}

pub fn approximation_depth_with(j: usize, epsilon: f64, base: LogBase) -> Result<usize, LppError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(LppError::Epsilon(epsilon));
    }
    let log = match base {
        LogBase::Natural => epsilon.ln_1p(),
        LogBase::Ten => epsilon.ln_1p() / std::f64::consts::LN_10,
    };
    let inner = 16.0 / 9.0 / (PI * PI) * log;
    let s = (j as i64 + 2) / 2 - (inner.ln() / 4f64.ln()).ceil() as i64;
    Ok(s.max(1) as usize)
}

/// Which rotation angles the block recursion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleSchedule {
    /// Start with a rotation by `π` (`α₁ = −v₁`, `β₁ ≥ |v₂|`), then
    /// `π/2^i` for `i = 1..s−1`.
    #[default]
    Reflected,
    /// `α₁ ≥ |v₁|`, `β₁ ≥ |v₂|`, then `π/2^{i+1}` for `i = 1..s−1`.
    Folded,
}

/// Sine and cosine with the roundoff at multiples of `π/2` removed.
fn cos_sin(angle: f64) -> (f64, f64) {
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    (snap(angle.cos()), snap(angle.sin()))
}

impl AngleSchedule {
    /// Rotation applied between `(α_i, β_i)` and `(α_{i+1}, β_{i+1})`.
    pub fn step_angle(self, i: usize) -> f64 {
        match self {
            AngleSchedule::Reflected => PI / 2f64.powi(i as i32),
            AngleSchedule::Folded => PI / 2f64.powi(i as i32 + 1),
        }
    }

    /// Angle of the direction `v0` is read off along.
    pub fn terminal_angle(self, s: usize) -> f64 {
        PI / 2f64.powi(s as i32)
    }
}

/// Role of a row inside a block; stable across depths, used for naming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockRowKind {
    Terminal,
    Apex,
    AlphaInit,
    AlphaInitPos,
    AlphaInitNeg,
    BetaInitPos,
    BetaInitNeg,
    /// Equality that replaces the `β₁` pair in the active-set variant.
    BetaInitEq,
    Alpha(usize),
    BetaPos(usize),
    BetaNeg(usize),
}

impl BlockRowKind {
    fn tag(self) -> String {
        match self {
            BlockRowKind::Terminal => "term".into(),
            BlockRowKind::Apex => "apex".into(),
            BlockRowKind::AlphaInit => "a1".into(),
            BlockRowKind::AlphaInitPos => "a1p".into(),
            BlockRowKind::AlphaInitNeg => "a1n".into(),
            BlockRowKind::BetaInitPos => "b1p".into(),
            BlockRowKind::BetaInitNeg => "b1n".into(),
            BlockRowKind::BetaInitEq => "b1e".into(),
            BlockRowKind::Alpha(i) => format!("a{}", i + 1),
            BlockRowKind::BetaPos(i) => format!("b{}p", i + 1),
            BlockRowKind::BetaNeg(i) => format!("b{}n", i + 1),
        }
    }
}

/// Column indices a block's rows are written over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockVars {
    pub v0: usize,
    pub v1: usize,
    pub v2: usize,
    /// `α_1..α_s`.
    pub alpha: Vec<usize>,
    /// `β_1..β_s`.
    pub beta: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WBlockSpec {
    pub depth: usize,
    pub rows: Vec<(BlockRowKind, Row)>,
}

impl WBlockSpec {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Rows of one block. The plain variant has `5 + 3(s − 1)` rows; the
/// active-set variant folds the `β₁` pair into one equality.
pub fn build_w_block(
    s: usize,
    vars: &BlockVars,
    schedule: AngleSchedule,
    acsm: bool,
    prefix: &str,
) -> WBlockSpec {
    assert!(s >= 1, "block depth must be positive");
    assert_eq!(vars.alpha.len(), s);
    assert_eq!(vars.beta.len(), s);
    let (a, b) = (&vars.alpha, &vars.beta);
    let mut rows: Vec<(BlockRowKind, Row)> = Vec::with_capacity(5 + 3 * (s - 1));
    let mut push = |kind: BlockRowKind, coeffs: Vec<(usize, f64)>, sense: RowSense| {
        // Rotations by π/2 produce zero coefficients; keep rows sparse.
        let coeffs = coeffs.into_iter().filter(|&(_, v)| v != 0.0).collect();
        rows.push((kind, Row::new(format!("{prefix}_{}", kind.tag()), coeffs, sense, 0.0)));
    };

    let (ct, st) = cos_sin(schedule.terminal_angle(s));
    push(
        BlockRowKind::Terminal,
        vec![(vars.v0, 1.0), (a[s - 1], -ct), (b[s - 1], -st)],
        RowSense::Eq,
    );

    match schedule {
        AngleSchedule::Reflected => {
            let (c, sn) = cos_sin(PI);
            // α₁ = v₁ cos π + v₂ sin π
            push(
                BlockRowKind::AlphaInit,
                vec![(a[0], 1.0), (vars.v1, -c), (vars.v2, -sn)],
                RowSense::Eq,
            );
            // β₁ ≥ |v₂ cos π − v₁ sin π|
            if acsm {
                push(
                    BlockRowKind::BetaInitEq,
                    vec![(b[0], 1.0), (vars.v2, c), (vars.v1, -sn)],
                    RowSense::Eq,
                );
            } else {
                push(
                    BlockRowKind::BetaInitPos,
                    vec![(vars.v2, c), (vars.v1, -sn), (b[0], -1.0)],
                    RowSense::Le,
                );
                push(
                    BlockRowKind::BetaInitNeg,
                    vec![(vars.v2, -c), (vars.v1, sn), (b[0], -1.0)],
                    RowSense::Le,
                );
            }
            push(BlockRowKind::Apex, vec![(vars.v0, 1.0)], RowSense::Ge);
        }
        AngleSchedule::Folded => {
            push(BlockRowKind::AlphaInitPos, vec![(vars.v1, 1.0), (a[0], -1.0)], RowSense::Le);
            push(BlockRowKind::AlphaInitNeg, vec![(vars.v1, -1.0), (a[0], -1.0)], RowSense::Le);
            if acsm {
                push(BlockRowKind::BetaInitEq, vec![(b[0], 1.0), (vars.v2, -1.0)], RowSense::Eq);
            } else {
                push(BlockRowKind::BetaInitPos, vec![(vars.v2, 1.0), (b[0], -1.0)], RowSense::Le);
                push(BlockRowKind::BetaInitNeg, vec![(vars.v2, -1.0), (b[0], -1.0)], RowSense::Le);
            }
        }
    }

    for i in 1..s {
        let (c, sn) = cos_sin(schedule.step_angle(i));
        let (ai, bi, an, bn) = (a[i - 1], b[i - 1], a[i], b[i]);
        push(
            BlockRowKind::Alpha(i),
            vec![(an, 1.0), (ai, -c), (bi, -sn)],
            RowSense::Eq,
        );
        push(
            BlockRowKind::BetaPos(i),
            vec![(bi, c), (ai, -sn), (bn, -1.0)],
            RowSense::Le,
        );
        push(
            BlockRowKind::BetaNeg(i),
            vec![(bi, -c), (ai, sn), (bn, -1.0)],
            RowSense::Le,
        );
    }
    WBlockSpec { depth: s, rows }
}

/// Plain block row count `5 + 3(s − 1)`.
pub fn block_row_count(s: usize) -> usize {
    5 + 3 * (s - 1)
}

/// Runs the rotation recursion forward from a cone point `‖(v1, v2)‖ ≤ v0`
/// and returns `(α, β)` satisfying every row of the plain block.
pub fn forward_witness(s: usize, schedule: AngleSchedule, v: [f64; 3]) -> (Vec<f64>, Vec<f64>) {
    let [v0, v1, v2] = v;
    let (mut a, mut b) = match schedule {
        AngleSchedule::Reflected => {
            let (c, sn) = cos_sin(PI);
            (v1 * c + v2 * sn, (v2 * c - v1 * sn).abs())
        }
        AngleSchedule::Folded => (v1.abs(), v2.abs()),
    };
    let mut alpha = vec![a];
    let mut beta = vec![b];
    for i in 1..s {
        let (c, sn) = cos_sin(schedule.step_angle(i));
        let (na, nb) = (a * c + b * sn, (b * c - a * sn).abs());
        a = na;
        b = nb;
        alpha.push(a);
        beta.push(b);
    }
    // ‖(α_s, β_s)‖ = ‖(v1, v2)‖ ≤ v0, so the terminal equality is met by
    // raising β_s, which only loosens its own lower bound.
    let (ct, st) = cos_sin(schedule.terminal_angle(s));
    let deficit = v0 - (ct * a + st * b);
    if deficit > 0.0 && st > 0.0 {
        beta[s - 1] += deficit / st;
    }
    (alpha, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LppVariant {
    #[default]
    Plain,
    /// Active-constraint variant: the `β₁` inequality pair of each cell
    /// becomes an equality.
    Acsm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LppConfig {
    pub schedule: AngleSchedule,
    pub log_base: LogBase,
}

/// Relaxation model together with the bookkeeping needed to read it.
#[derive(Debug, Clone)]
pub struct LppModel {
    pub model: MilpModel,
    pub layout: TowerLayout,
    /// Block depth of each cell, in `layout.cells` order.
    pub depths: Vec<usize>,
    /// Number of W-block rows in `model`.
    pub block_rows: usize,
}

pub fn build_lpp_model(
    inst: &EdpInstance,
    epsilon: f64,
    variant: LppVariant,
) -> Result<LppModel, LppError> {
    build_lpp_model_with(inst, epsilon, variant, LppConfig::default())
}

pub fn build_lpp_model_with(
    inst: &EdpInstance,
    epsilon: f64,
    variant: LppVariant,
    config: LppConfig,
) -> Result<LppModel, LppError> {
    let m = inst.m();
    let layout = tower_layout(m)?;
    let depth_of_layer: Vec<usize> = (0..layout.depth())
        .map(|j| approximation_depth_with(j, epsilon, config.log_base))
        .collect::<Result<_, _>>()?;

    let mut model = MilpModel::new(format!("lpp_m{m}_n{}", inst.n()), ObjectiveSense::Maximize);
    let n = inst.n() as f64;
    for (i, &gi) in inst.ebv().iter().enumerate() {
        model.add_column(Column::binary(format!("y{}", i + 1), gi / n));
    }
    // Lifted variables: layer 0 is z = Uy (free), higher layers are ≥ 0.
    let delta0 = model.num_columns();
    for j in 0..=layout.depth() {
        for i in 0..layout.sizes[j] {
            let col = if j == 0 {
                Column::free(format!("z{}", i + 1))
            } else {
                Column::continuous(format!("d{j}_{}", i + 1), 0.0, f64::INFINITY, 0.0)
            };
            model.add_column(col);
        }
    }

    model.push_row(Row::new("card", (0..m).map(|i| (i, 1.0)).collect(), RowSense::Eq, n))?;
    let u = inst.u();
    for i in 0..m {
        let mut coeffs = vec![(delta0 + i, 1.0)];
        for (k, &uik) in u.row_tail(i).iter().enumerate() {
            if uik != 0.0 {
                coeffs.push((i + k, -uik));
            }
        }
        model.push_row(Row::new(format!("zdef{}", i + 1), coeffs, RowSense::Eq, 0.0))?;
    }
    model.push_row(Row::new(
        "radius",
        vec![(delta0 + layout.root(), 1.0)],
        RowSense::Eq,
        inst.cone_radius(),
    ))?;
    for (k, &(lo, hi)) in layout.passthroughs.iter().enumerate() {
        model.push_row(Row::new(
            format!("pass{}", k + 1),
            vec![(delta0 + lo, 1.0), (delta0 + hi, -1.0)],
            RowSense::Eq,
            0.0,
        ))?;
    }

    let mut depths = Vec::with_capacity(layout.cells.len());
    let mut block_rows = 0;
    for (c, cell) in layout.cells.iter().enumerate() {
        let s = depth_of_layer[cell.layer];
        depths.push(s);
        let alpha = (0..s)
            .map(|i| model.add_column(Column::free(format!("al{}_{}", c + 1, i + 1))))
            .collect();
        let beta = (0..s)
            .map(|i| model.add_column(Column::free(format!("be{}_{}", c + 1, i + 1))))
            .collect();
        let vars = BlockVars {
            v0: delta0 + cell.v0,
            v1: delta0 + cell.v1,
            v2: delta0 + cell.v2,
            alpha,
            beta,
        };
        let block = build_w_block(
            s,
            &vars,
            config.schedule,
            variant == LppVariant::Acsm,
            &format!("w{}", c + 1),
        );
        block_rows += block.num_rows();
        model.extend_rows(block.rows.into_iter().map(|(_, r)| r))?;
    }
    Ok(LppModel {
        model,
        layout,
        depths,
        block_rows,
    })
}

#[derive(Debug, Clone)]
pub struct LppParams {
    pub epsilon: f64,
    pub variant: LppVariant,
    pub config: LppConfig,
    pub gap: f64,
    pub time_limit: Duration,
}

impl Default for LppParams {
    fn default() -> Self {
        Self {
            epsilon: 0.005,
            variant: LppVariant::Plain,
            config: LppConfig::default(),
            gap: 0.01,
            time_limit: Duration::from_secs(3 * 3600),
        }
    }
}

/// Selected candidates read off the binary columns of a solution.
fn selection(values: &[f64], m: usize) -> Vec<usize> {
    (0..m).filter(|&i| values[i] > 0.5).collect()
}

/// Solves the relaxation and reports the selection it picks. The cap is
/// re-checked exactly; a selection over it is reported as
/// [`SolveStatus::RelaxationViolated`].
pub fn solve_edp_lpp(inst: &EdpInstance, params: &LppParams) -> Result<SolveReport, LppError> {
    let start = Instant::now();
    let built = build_lpp_model_with(inst, params.epsilon, params.variant, params.config)?;
    let sol = milp::solve(&built.model, params.gap, params.time_limit)?;
    let mut report = SolveReport::new(match params.variant {
        LppVariant::Plain => Method::Lpp,
        LppVariant::Acsm => Method::LppAcsm,
    });
    report.iterations = 1;
    report.gap_requested = params.gap;
    report.constraints_first = built.model.num_rows();
    report.constraints_last = built.model.num_rows();
    report.bound_final = sol.best_bound;
    if sol.has_incumbent() {
        report.selected = selection(&sol.values, inst.m());
        report.objective = inst.objective(&report.selected);
        report.coancestry = inst.coancestry(&report.selected);
        report.master_objectives.push(sol.objective);
        report.status = match sol.status {
            MilpStatus::TimeLimit => SolveStatus::TimeLimit,
            _ if report.coancestry <= inst.two_theta() + COANCESTRY_SLACK => SolveStatus::Optimal,
            _ => SolveStatus::RelaxationViolated,
        };
    } else {
        report.status = match sol.status {
            MilpStatus::TimeLimit => SolveStatus::TimeLimit,
            _ => SolveStatus::Infeasible,
        };
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Names of the rows that are active at the relaxation optimum for every
/// `ε` in `epsilons`. Row names are stable across depths, so a row missing
/// from a shallower block simply drops out of the intersection.
pub fn active_constraint_scan(
    inst: &EdpInstance,
    epsilons: &[f64],
    config: LppConfig,
    gap: f64,
    time_limit: Duration,
) -> Result<BTreeSet<String>, LppError> {
    let mut active: Option<BTreeSet<String>> = None;
    for &epsilon in epsilons {
        let built = build_lpp_model_with(inst, epsilon, LppVariant::Plain, config)?;
        let sol = milp::solve(&built.model, gap, time_limit)?;
        if sol.status != MilpStatus::OptimalWithinGap {
            return Err(LppError::Unsolved {
                epsilon,
                status: sol.status,
            });
        }
        let here: BTreeSet<String> = built
            .model
            .rows()
            .iter()
            .filter(|r| (r.activity(&sol.values) - r.rhs).abs() <= ACTIVE_TOL)
            .map(|r| r.name.clone())
            .collect();
        active = Some(match active {
            None => here,
            Some(prev) => prev.intersection(&here).cloned().collect(),
        });
    }
    Ok(active.unwrap_or_default())
}
