mod common;

use std::collections::HashMap;
use std::time::Duration;

use ocs::cdm::{build_master, run_cdm, CdmParams};
use ocs::instance::{parse_pedigree, relationship_matrix};
use ocs::lpp::{build_lpp_model, LppVariant};
use ocs::milp::{self, export_mps, Column, MilpModel, MilpStatus, ObjectiveSense, Row, RowSense, SolveOptions, VarKind};
use ocs::EdpInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIMIT: Duration = Duration::from_secs(60);

#[test]
fn tableau_oracle_textbook() {
    // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36.
    let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
    assert_eq!(common::tableau_max(&[3.0, 5.0], &a, &[4.0, 12.0, 18.0]), Some(36.0));
    // x ≥ 2 and x ≤ 1.
    let a = vec![vec![-1.0], vec![1.0]];
    assert_eq!(common::tableau_max(&[1.0], &a, &[-2.0, 1.0]), None);
}

#[test]
fn random_models_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (b, c) = (rng.gen_range(1..=12), rng.gen_range(0..=6));
        let model = common::random_model(&mut rng, b, c);
        let sol = milp::solve(&model, 0.0, LIMIT).unwrap();
        match common::enumerate_milp(&model) {
            None => assert_eq!(sol.status, MilpStatus::Infeasible),
            Some(v) => {
                assert_eq!(sol.status, MilpStatus::OptimalWithinGap);
                assert!((sol.objective - v).abs() <= 1e-7 * v.abs().max(1.0), "{} vs {v}", sol.objective);
                for (col, x) in model.columns().iter().zip(&sol.values) {
                    if col.kind == VarKind::Binary {
                        assert!((x - x.round()).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn determinism_and_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let model = common::random_model(&mut rng, 10, 3);
        let opts = SolveOptions {
            trace_bounds: true,
            ..Default::default()
        };
        let a = milp::solve_with(&model, &opts).unwrap();
        let b = milp::solve_with(&model, &opts).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.nodes, b.nodes);
        if a.status != MilpStatus::OptimalWithinGap {
            continue;
        }
        let orient = if model.sense == ObjectiveSense::Maximize { 1.0 } else { -1.0 };
        for w in a.bound_trace.windows(2) {
            assert!(orient * w[1] <= orient * w[0] + 1e-9, "{:?}", a.bound_trace);
        }
        assert!(orient * (a.bound_trace[0] - a.objective) >= -1e-9);
    }
}

#[test]
fn gap_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let model = common::random_model(&mut rng, 12, 2);
        let sol = milp::solve(&model, 0.05, LIMIT).unwrap();
        if sol.status == MilpStatus::OptimalWithinGap {
            assert!(sol.gap <= 0.05 + 1e-12);
            let exact = common::enumerate_milp(&model).unwrap();
            let orient = if model.sense == ObjectiveSense::Maximize { 1.0 } else { -1.0 };
            assert!(orient * (exact - sol.objective) <= 0.05 * sol.objective.abs().max(1.0) + 1e-9);
        }
    }
}

#[test]
fn cut_removes_previous_optimum() {
    let mut model = MilpModel::new("c", ObjectiveSense::Maximize);
    for (i, g) in [4.0, 3.0, 2.0, 1.0].into_iter().enumerate() {
        model.add_column(Column::binary(format!("y{i}"), g));
    }
    model
        .push_row(Row::new("card", (0..4).map(|j| (j, 1.0)).collect(), RowSense::Eq, 2.0))
        .unwrap();
    let first = milp::solve(&model, 0.0, LIMIT).unwrap();
    assert_eq!(first.values, vec![1.0, 1.0, 0.0, 0.0]);
    let cut = Row::new("cut", vec![(0, 1.0), (1, 1.0)], RowSense::Le, 1.0);
    assert!(cut.violation(&first.values) > 0.0);
    let next = model.add_rows([cut]).unwrap();
    let warm = first.root_basis.map(|b| b.with_added_rows(1));
    let second = milp::solve_with(
        &next,
        &SolveOptions {
            warm_start: warm,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(next.max_violation(&first.values) > 0.0);
    assert_eq!(second.objective, 6.0);
    assert_eq!(second.values, vec![1.0, 0.0, 1.0, 0.0]);
}

/// Minimal reader for the subset of MPS the exporter writes.
fn read_mps(text: &str) -> MilpModel {
    let mut sense = ObjectiveSense::Minimize;
    let mut section = "";
    let mut rows: Vec<(String, RowSense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<Column> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut coeffs: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut integer = false;
    let mut name = String::new();
    for raw in text.lines() {
        if !raw.starts_with(' ') {
            let mut parts = raw.split_whitespace();
            section = match parts.next() {
                Some("NAME") => {
                    name = parts.next().unwrap_or("").to_string();
                    "NAME"
                }
                Some(s) => match s {
                    "OBJSENSE" => "OBJSENSE",
                    "ROWS" => "ROWS",
                    "COLUMNS" => "COLUMNS",
                    "RHS" => "RHS",
                    "BOUNDS" => "BOUNDS",
                    "ENDATA" => "ENDATA",
                    other => panic!("unknown section {other}"),
                },
                None => section,
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            "OBJSENSE" => {
                if f[0] == "MAX" {
                    sense = ObjectiveSense::Maximize;
                }
            }
            "ROWS" => {
                if f[0] == "N" {
                    continue;
                }
                let s = match f[0] {
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    _ => RowSense::Eq,
                };
                row_index.insert(f[1].to_string(), rows.len());
                rows.push((f[1].to_string(), s));
                coeffs.push(Vec::new());
                rhs.push(0.0);
            }
            "COLUMNS" => {
                if f.get(1) == Some(&"'MARKER'") {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                let j = *col_index.entry(f[0].to_string()).or_insert_with(|| {
                    cols.push(if integer {
                        Column::binary(f[0], 0.0)
                    } else {
                        Column::continuous(f[0], 0.0, f64::INFINITY, 0.0)
                    });
                    cols.len() - 1
                });
                for pair in f[1..].chunks(2) {
                    let v: f64 = pair[1].parse().unwrap();
                    if pair[0] == "OBJ" {
                        cols[j].objective = v;
                    } else {
                        coeffs[row_index[pair[0]]].push((j, v));
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    rhs[row_index[pair[0]]] = pair[1].parse().unwrap();
                }
            }
            "BOUNDS" => {
                let j = col_index[f[2]];
                let v = || f[3].parse::<f64>().unwrap();
                let c = &mut cols[j];
                match f[0] {
                    "UP" if c.kind == VarKind::Binary => {}
                    "UP" => c.upper = v(),
                    "LO" => c.lower = v(),
                    "FX" => {
                        c.lower = v();
                        c.upper = v();
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    other => panic!("bound {other}"),
                }
            }
            _ => {}
        }
    }
    let mut model = MilpModel::new(name, sense);
    for c in cols {
        model.add_column(c);
    }
    for (i, (n, s)) in rows.into_iter().enumerate() {
        model.push_row(Row::new(n, std::mem::take(&mut coeffs[i]), s, rhs[i])).unwrap();
    }
    model
}

fn toy() -> EdpInstance {
    let ped = parse_pedigree("id,sire,dam,ebv\n1,0,0,1.0\n2,0,0,2.0\n3,1,2,3.0\n4,1,2,2.5\n5,3,0,3.5\n").unwrap();
    EdpInstance::new(relationship_matrix(&ped), ped.ebvs(), 2, 0.6).unwrap()
}

#[test]
fn mps_round_trip() {
    let inst = toy();
    let run = run_cdm(&inst, &CdmParams { gap: 0.0, ..Default::default() }).unwrap();
    let models = [
        build_master(&inst),
        run.final_master.clone(),
        build_lpp_model(&inst, 0.05, LppVariant::Plain).unwrap().model,
    ];
    for model in models {
        let text = export_mps(&model);
        let back = read_mps(&text);
        assert_eq!(back.num_columns(), model.num_columns());
        assert_eq!(back.num_rows(), model.num_rows());
        assert_eq!(back.sense, model.sense);
        let a = milp::solve(&model, 0.0, LIMIT).unwrap();
        let b = milp::solve(&back, 0.0, LIMIT).unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-9, "{} vs {}", a.objective, b.objective);
        // 12 significant digits survive the trip.
        for (x, y) in model.rows().iter().zip(back.rows()) {
            let (mut cx, mut cy) = (x.coeffs.clone(), y.coeffs.clone());
            cx.retain(|&(_, v)| v != 0.0);
            cx.sort_by_key(|&(j, _)| j);
            cy.sort_by_key(|&(j, _)| j);
            assert_eq!(cx.len(), cy.len());
            for (&(j1, v1), &(j2, v2)) in cx.iter().zip(&cy) {
                assert_eq!(j1, j2);
                assert!((v1 - v2).abs() <= 1e-11 * v1.abs().max(1.0));
            }
        }
    }
}
