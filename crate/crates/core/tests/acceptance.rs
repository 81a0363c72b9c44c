//! Acceptance suite: one pass/fail line per criterion, written straight to
//! stderr so it shows up without `--nocapture`.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ocs::cdm::{run_cdm, CdmParams, CdmRun};
use ocs::lpp::{
    approximation_depth, block_row_count, build_lpp_model, build_lpp_model_with, build_w_block, forward_witness,
    AngleSchedule, BlockVars, LppConfig, LppVariant,
};
use ocs::milp::{self, Column, MilpModel, MilpStatus, ObjectiveSense};
use ocs::oracle::{enumerate_optimum, Combinations};
use ocs::projection::{project, projection_oracle, ConePoint};
use ocs::{EdpInstance, SolveReport, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: Option<bool>,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self {
            pass: Some(pass),
            detail,
        }
    }
    fn skipped(detail: String) -> Self {
        Self { pass: None, detail }
    }
}

fn line(id: usize, title: &str, o: &Outcome) {
    let tag = match o.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "SKIP",
    };
    let _ = writeln!(std::io::stderr(), "[acceptance] {id} {tag} {title}: {}", o.detail);
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for c0 in [0.1, 1.0, 37.4] {
        for _ in 0..10_000 {
            let p = ConePoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), c0);
            let (a, b) = (project(p), projection_oracle(p));
            worst = worst.max((a.z - b.z).abs()).max((a.w - b.w).abs());
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        worst <= 1e-9 && secs < 2.0,
        format!("{count} points, max component error {worst:.3e}, {secs:.3} s"),
    )
}

struct DeskRun {
    inst: EdpInstance,
    oracle: SolveReport,
    cdm: CdmRun,
    elapsed: Duration,
}

fn desk_runs() -> Vec<DeskRun> {
    common::desk_instances()
        .into_iter()
        .map(|inst| {
            let oracle = enumerate_optimum(&inst).expect("desk instances are under the guard");
            let start = Instant::now();
            let cdm = run_cdm(
                &inst,
                &CdmParams {
                    gap: 0.0,
                    ..Default::default()
                },
            )
            .expect("cdm run");
            DeskRun {
                inst,
                oracle,
                cdm,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn criterion_2(runs: &[DeskRun]) -> Outcome {
    let mut bad = Vec::new();
    let mut slowest: f64 = 0.0;
    let mut binding = 0;
    for (k, r) in runs.iter().enumerate() {
        let rep = &r.cdm.report;
        slowest = slowest.max(r.elapsed.as_secs_f64());
        let mut order: Vec<usize> = (0..r.inst.m()).collect();
        order.sort_by(|&a, &b| r.inst.ebv()[b].total_cmp(&r.inst.ebv()[a]));
        binding += (r.inst.coancestry(&order[..r.inst.n()]) > r.inst.two_theta()) as usize;
        let ok = r.oracle.status == SolveStatus::Optimal
            && rep.objective == r.oracle.objective
            && rep.coancestry <= r.inst.two_theta() + 1e-8
            && r.elapsed < Duration::from_secs(5);
        if !ok {
            bad.push(format!(
                "#{k} (cdm {} / {:?} vs oracle {})",
                rep.objective, rep.status, r.oracle.objective
            ));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "{}/{} instances match ({binding} where the top-N pick breaks the cap), slowest {slowest:.3} s{}",
            runs.len() - bad.len(),
            runs.len(),
            if bad.is_empty() { String::new() } else { format!("; mismatches {}", bad.join(", ")) }
        ),
    )
}

fn criterion_3(runs: &[DeskRun]) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut checks = 0usize;
    for r in runs {
        let inst = &r.inst;
        let c0 = inst.cone_radius();
        let u = inst.u();
        for sel in Combinations::new(inst.m(), inst.n()) {
            if inst.coancestry(&sel) > inst.two_theta() {
                continue;
            }
            let mut y = vec![0.0; inst.m()];
            for &i in &sel {
                y[i] = 1.0;
            }
            let z = ocs::linalg::apply_upper(u, &y).unwrap();
            for c in &r.cdm.cuts {
                let zi = z[c.index];
                let slack = -c.cut.violation(zi, zi * zi / c0);
                worst = worst.min(slack);
                checks += 1;
            }
        }
    }
    let total_cuts: usize = runs.iter().map(|r| r.cdm.cuts.len()).sum();
    Outcome::check(
        worst >= -1e-9,
        format!("{total_cuts} cuts, {checks} cut/selection checks, min slack {worst:.3e}"),
    )
}

fn criterion_4(runs: &[DeskRun]) -> Outcome {
    let mut bad = Vec::new();
    let mut max_iter = 0;
    for (k, r) in runs.iter().enumerate() {
        let rep = &r.cdm.report;
        max_iter = max_iter.max(rep.iterations);
        let monotone = rep
            .master_objectives
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        if !monotone || rep.status != SolveStatus::Optimal || rep.iterations > 500 {
            bad.push(format!("#{k} ({:?}, monotone {monotone})", rep.status));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "{} runs exit on no violation, max {max_iter} master solves{}",
            runs.len() - bad.len(),
            if bad.is_empty() { String::new() } else { format!("; failures {}", bad.join(", ")) }
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut infeasible = 0;
    for k in 0..20 {
        let (binaries, continuous) = (rng.gen_range(4..=12), rng.gen_range(0..=6));
        let model = common::random_model(&mut rng, binaries, continuous);
        let engine = milp::solve(&model, 0.0, Duration::from_secs(60)).unwrap();
        let oracle = common::enumerate_milp(&model);
        infeasible += oracle.is_none() as usize;
        let ok = match oracle {
            None => engine.status == MilpStatus::Infeasible,
            Some(v) => {
                engine.status == MilpStatus::OptimalWithinGap && (engine.objective - v).abs() <= 1e-7 * v.abs().max(1.0)
            }
        };
        if !ok {
            bad.push(format!("#{k} engine {:?}/{} vs {oracle:?}", engine.status, engine.objective));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        bad.is_empty() && secs < 10.0,
        format!("{}/20 models match ({infeasible} infeasible), {secs:.3} s{}", 20 - bad.len(), if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }),
    )
}

/// Single block over columns `v0 v1 v2 α β` with `v0` fixed to 1.
fn block_model(s: usize, schedule: AngleSchedule, direction: f64) -> MilpModel {
    let mut m = MilpModel::new("block", ObjectiveSense::Maximize);
    m.add_column(Column::continuous("v0", 1.0, 1.0, 0.0));
    m.add_column(Column::continuous("v1", f64::NEG_INFINITY, f64::INFINITY, direction.cos()));
    m.add_column(Column::continuous("v2", f64::NEG_INFINITY, f64::INFINITY, direction.sin()));
    let alpha = (0..s).map(|i| m.add_column(Column::free(format!("a{i}")))).collect();
    let beta = (0..s).map(|i| m.add_column(Column::free(format!("b{i}")))).collect();
    let vars = BlockVars {
        v0: 0,
        v1: 1,
        v2: 2,
        alpha,
        beta,
    };
    let block = build_w_block(s, &vars, schedule, false, "w");
    m.extend_rows(block.rows.into_iter().map(|(_, r)| r)).unwrap();
    m
}

/// `(witnesses ok, worst radius)` for one schedule, depth and epsilon.
fn sandwich(schedule: AngleSchedule, s: usize, rng: &mut ChaCha8Rng) -> (bool, f64) {
    let vars = BlockVars {
        v0: 0,
        v1: 1,
        v2: 2,
        alpha: (3..3 + s).collect(),
        beta: (3 + s..3 + 2 * s).collect(),
    };
    let block = build_w_block(s, &vars, schedule, false, "w");
    let mut witnesses = true;
    for _ in 0..100 {
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let r: f64 = rng.gen_range(0.1..10.0);
        let v = [r, r * phi.cos(), r * phi.sin()];
        let (a, b) = forward_witness(s, schedule, v);
        let x: Vec<f64> = v.iter().chain(&a).chain(&b).copied().collect();
        witnesses &= block.rows.iter().all(|(_, row)| row.violation(&x) <= 1e-9 * r);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let model = block_model(s, schedule, rng.gen_range(0.0..2.0 * PI));
        let sol = milp::solve(&model, 0.0, Duration::from_secs(10)).unwrap();
        let radius = if sol.status == MilpStatus::OptimalWithinGap {
            sol.values[1].hypot(sol.values[2])
        } else {
            f64::INFINITY
        };
        worst = worst.max(radius);
    }
    (witnesses, worst)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut parts = Vec::new();
    let mut pass_by_schedule = Vec::new();
    for schedule in [AngleSchedule::Reflected, AngleSchedule::Folded] {
        let mut ok = true;
        for eps in [0.05, 0.01] {
            let mut depths: Vec<usize> = (0..4).map(|j| approximation_depth(j, eps).unwrap()).collect();
            depths.dedup();
            for s in depths {
                let (witnesses, worst) = sandwich(schedule, s, &mut rng);
                let tight = worst <= 1.0 + eps + 1e-6;
                ok &= witnesses && tight;
                parts.push(format!("{schedule:?} ε={eps} s={s}: witnesses {witnesses}, max radius {worst:.6}"));
            }
        }
        pass_by_schedule.push((schedule, ok));
    }
    let shipped = LppConfig::default().schedule;
    let shipped_ok = pass_by_schedule.iter().any(|&(s, ok)| s == shipped && ok);
    let reflected_ok = pass_by_schedule[0].1;
    // The reflected schedule ships when it passes; otherwise the folded one must.
    let consistent = if reflected_ok {
        shipped == AngleSchedule::Reflected
    } else {
        shipped == AngleSchedule::Folded
    };
    Outcome::check(
        shipped_ok && consistent,
        format!("shipped schedule {shipped:?}; {}", parts.join("; ")),
    )
}

fn criterion_7(runs: &[DeskRun]) -> Outcome {
    let epsilons = [0.05, 0.01, 0.005];
    let mut bad = Vec::new();
    let mut max_gap: f64 = 0.0;
    let start = Instant::now();
    for (k, r) in runs.iter().enumerate() {
        let mut gaps = Vec::new();
        for eps in epsilons {
            let built = build_lpp_model(&r.inst, eps, LppVariant::Plain).unwrap();
            let sol = milp::solve(&built.model, 0.0, Duration::from_secs(600)).unwrap();
            if sol.status != MilpStatus::OptimalWithinGap {
                bad.push(format!("#{k} ε={eps} status {:?}", sol.status));
                gaps.push(f64::NAN);
                continue;
            }
            gaps.push(sol.objective - r.oracle.objective);
        }
        max_gap = max_gap.max(gaps[0]);
        let above = gaps.iter().all(|&g| g >= -1e-9);
        let shrinking = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        if !above || !shrinking {
            bad.push(format!("#{k} gaps {gaps:?}"));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!(
            "{}/{} instances above oracle with nonincreasing gap, largest ε=0.05 gap {max_gap:.4}, {:.1} s{}",
            runs.len() - bad.len(),
            runs.len(),
            start.elapsed().as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut counts = Vec::new();
    for s in 1..=6 {
        let vars = BlockVars {
            v0: 0,
            v1: 1,
            v2: 2,
            alpha: (3..3 + s).collect(),
            beta: (3 + s..3 + 2 * s).collect(),
        };
        for schedule in [AngleSchedule::Reflected, AngleSchedule::Folded] {
            let rows = build_w_block(s, &vars, schedule, false, "w").num_rows();
            ok &= rows == 5 + 3 * (s - 1) && rows == block_row_count(s);
        }
        counts.push(format!("s={s}:{}", 5 + 3 * (s - 1)));
    }
    // Assembled models carry the same count per cell.
    let inst = &common::desk_instances()[0];
    for eps in [0.05, 0.01, 0.005] {
        let built = build_lpp_model_with(inst, eps, LppVariant::Plain, LppConfig::default()).unwrap();
        let expected: usize = built.depths.iter().map(|&s| block_row_count(s)).sum();
        ok &= built.block_rows == expected;
    }
    Outcome::check(ok, counts.join(" "))
}

fn dryad_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("OCS_DRYAD_DIR").map(PathBuf::from)?;
    dir.join("pedigree.csv").is_file().then_some(dir)
}

fn criterion_9() -> Outcome {
    let Some(dir) = dryad_dir() else {
        return Outcome::skipped(
            "dataset not available (set OCS_DRYAD_DIR to a directory holding pedigree.csv for the m=200 instance)"
                .into(),
        );
    };
    let source = ocs::instance::InstanceSource::Pedigree {
        path: dir.join("pedigree.csv"),
        ebv: None,
    };
    let inst = match ocs::instance::load_instance(&source, 50, 0.0334) {
        Ok(i) => i,
        Err(e) => return Outcome::check(false, format!("could not load dataset: {e}")),
    };
    let rep = run_cdm(
        &inst,
        &CdmParams {
            gap: 0.01,
            ..Default::default()
        },
    )
    .unwrap()
    .report;
    let ok = (25.15 * 0.99..=25.15 * 1.01).contains(&rep.objective) && rep.coancestry <= 0.0334;
    Outcome::check(
        ok,
        format!("objective {:.4}, coancestry {:.5}, status {}", rep.objective, rep.coancestry, rep.status),
    )
}

#[test]
fn acceptance_suite() {
    let _ = writeln!(std::io::stderr());
    let runs = desk_runs();
    let results = [
        (1, "projection matches bisection oracle", criterion_1()),
        (2, "cdm equals enumeration on desk instances", criterion_2(&runs)),
        (3, "generated cuts keep every feasible selection", criterion_3(&runs)),
        (4, "master objectives nonincreasing, exit on no violation", criterion_4(&runs)),
        (5, "milp engine equals binary enumeration plus LP", criterion_5()),
        (6, "polyhedral block sandwich", criterion_6()),
        (7, "lpp bounds the optimum and tightens with epsilon", criterion_7(&runs)),
        (8, "block row count 5 + 3(s - 1)", criterion_8()),
        (9, "m=200 reference instance (optional)", criterion_9()),
    ];
    for (id, title, outcome) in &results {
        line(*id, title, outcome);
    }
    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, _, o)| o.pass == Some(false))
        .map(|(id, _, _)| *id)
        .collect();
    assert!(failed.is_empty(), "acceptance criteria failed: {failed:?}");
}
