#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use ocs::cdm::{run_cdm, CdmParams};
use ocs::instance::{load_instance, InstanceSource};
use ocs::lpp::{build_lpp_model_with, solve_edp_lpp, AngleSchedule, LppConfig, LppParams, LppVariant};
use ocs::milp::export_mps;
use ocs::oracle::enumerate_optimum;
use ocs::report::{report_to_string, write_report};
use ocs::{SolveReport, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cdm,
    Lpp,
    LppAcsm,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Reflected,
    Folded,
}

/// Equal-deployment optimal contribution selection.
#[derive(Debug, Parser)]
#[command(name = "ocs", version)]
struct Cli {
    /// Pedigree CSV with header `id,sire,dam,ebv`.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pedigree: Option<PathBuf>,
    /// Dense relationship matrix file (first line m, then m rows).
    #[arg(long, requires = "ebv")]
    matrix: Option<PathBuf>,
    /// EBV file, one value per line. Overrides the pedigree's EBV column.
    #[arg(long)]
    ebv: Option<PathBuf>,
    /// Number of candidates to select.
    #[arg(long = "N", value_name = "N")]
    n: usize,
    /// Diversity cap 2θ on xᵀAx.
    #[arg(long)]
    two_theta: f64,
    #[arg(long, value_enum, default_value = "cdm")]
    method: MethodArg,
    /// Relative MILP gap for every solve.
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    /// Stall threshold for the cutting-plane loop.
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
    /// Relaxation accuracy; required for lpp and lpp-acsm (0.005 is a good start).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Angle schedule of the polyhedral blocks.
    #[arg(long, value_enum, default_value = "reflected")]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 10800.0)]
    time_limit: f64,
    /// Write the final model (cdm master or lpp relaxation) as MPS.
    #[arg(long)]
    export_mps: Option<PathBuf>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ocs: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    run(cli)
}

fn run(cli: Cli) -> ExitCode {
    let lpp_variant = match cli.method {
        MethodArg::Lpp => Some(LppVariant::Plain),
        MethodArg::LppAcsm => Some(LppVariant::Acsm),
        _ => None,
    };
    if lpp_variant.is_some() && cli.epsilon.is_none() {
        return fail("--epsilon is required with --method lpp and lpp-acsm");
    }
    if lpp_variant.is_none() && cli.epsilon.is_some() {
        return fail("--epsilon only applies to --method lpp and lpp-acsm");
    }
    if cli.method == MethodArg::Oracle && cli.export_mps.is_some() {
        return fail("--export-mps needs a model; the oracle builds none");
    }
    if !(cli.gap >= 0.0) {
        return fail("--gap must be nonnegative");
    }
    if !(cli.time_limit > 0.0) || !cli.time_limit.is_finite() {
        return fail("--time-limit must be a positive number of seconds");
    }
    let time_limit = Duration::from_secs_f64(cli.time_limit);

    let source = match (&cli.pedigree, &cli.matrix, &cli.ebv) {
        (Some(path), None, ebv) => InstanceSource::Pedigree {
            path: path.clone(),
            ebv: ebv.clone(),
        },
        (None, Some(matrix), Some(ebv)) => InstanceSource::Matrix {
            matrix: matrix.clone(),
            ebv: ebv.clone(),
        },
        _ => return fail("give either --pedigree, or --matrix with --ebv"),
    };
    let inst = match load_instance(&source, cli.n, cli.two_theta) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    for w in inst.warnings() {
        eprintln!("ocs: warning: {w}");
    }

    let config = LppConfig {
        schedule: match cli.schedule {
            ScheduleArg::Reflected => AngleSchedule::Reflected,
            ScheduleArg::Folded => AngleSchedule::Folded,
        },
        ..Default::default()
    };
    let (report, model) = match (cli.method, lpp_variant) {
        (MethodArg::Oracle, _) => match enumerate_optimum(&inst) {
            Ok(r) => (r, None),
            Err(e) => return fail(e),
        },
        (_, Some(variant)) => {
            let epsilon = cli.epsilon.expect("checked above");
            let params = LppParams {
                epsilon,
                variant,
                config,
                gap: cli.gap,
                time_limit,
            };
            let report = match solve_edp_lpp(&inst, &params) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let model = cli
                .export_mps
                .is_some()
                .then(|| build_lpp_model_with(&inst, epsilon, variant, config).map(|b| b.model));
            match model.transpose() {
                Ok(m) => (report, m),
                Err(e) => return fail(e),
            }
        }
        _ => {
            let params = CdmParams {
                delta: cli.delta,
                gap: cli.gap,
                max_iterations: cli.max_iterations,
                time_limit,
                ..Default::default()
            };
            match run_cdm(&inst, &params) {
                Ok(run) => (run.report, Some(run.final_master)),
                Err(e) => return fail(e),
            }
        }
    };

    if let (Some(path), Some(model)) = (&cli.export_mps, &model) {
        if let Err(e) = std::fs::write(path, export_mps(model)) {
            return fail(format!("cannot write {}: {e}", path.display()));
        }
    }
    if report.status.is_success() && report.selected.len() != inst.n() {
        return fail(format!(
            "internal error: {} candidates selected, expected {}",
            report.selected.len(),
            inst.n()
        ));
    }
    if report.status == SolveStatus::RelaxationViolated {
        eprintln!(
            "ocs: warning: selection has coancestry {} above the cap {}",
            report.coancestry,
            inst.two_theta()
        );
    }
    match &cli.output {
        Some(path) => {
            if let Err(e) = write_report(&report, path) {
                return fail(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => println!("{}", report_to_string(&report)),
    }
    exit_code(&report)
}

fn exit_code(report: &SolveReport) -> ExitCode {
    match report.status {
        SolveStatus::Optimal | SolveStatus::RelaxationViolated => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        SolveStatus::TimeLimit | SolveStatus::Stalled | SolveStatus::IterationLimit => ExitCode::from(EXIT_LIMIT),
    }
}
