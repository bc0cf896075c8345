//! The `pucs` command-line driver.
//!
//! Exit codes: `solve` returns 0 when at least one orbit converged, 2 when
//! none did, and 1 on input errors. `verify` returns 0 whenever the checks
//! ran, whatever they found, and 1 on input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{
    parse_problem, solve_report_json, verify_report_json, write_trace, CombosSection, ProblemFile,
    VerifyReport,
};
use crate::solver::{solve, OrbitStatus, SolverConfig};
use crate::verifier::{audit_pruning, check_condition, enumerate_feasible_combos, OracleConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pucs",
    version,
    about = "Feasibility seeking for unions of convex sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pruned cyclic projection solver.
    Solve(SolveArgs),
    /// Run the brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long = "feas-tol", default_value_t = 1e-6)]
    feas_tol: f64,
    #[arg(long = "max-sweeps", default_value_t = 10_000)]
    max_sweeps: usize,
    #[arg(long = "tie-tol", default_value_t = 1e-9)]
    tie_tol: f64,
    #[arg(long = "stall-window", default_value_t = 50)]
    stall_window: usize,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accepted for symmetry with `verify`; the solver itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    problem: PathBuf,
    /// Enumerate piece combinations.
    #[arg(long)]
    combos: bool,
    /// Sample the nearest-piece uniqueness condition.
    #[arg(long)]
    condition: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long = "margin-tol", default_value_t = 1e-6)]
    margin_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn read_problem(path: &Path) -> Result<ProblemFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_problem(&text)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn fmt_point(p: &[f64]) -> String {
    let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
    format!("({})", coords.join(", "))
}

fn fmt_indices(indices: &[usize]) -> String {
    let items: Vec<String> = indices.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn run_solve(args: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let file = read_problem(&args.problem)?;
    for w in &file.warnings {
        writeln!(out, "warning: {w}").ok();
    }
    let config = SolverConfig {
        eps_residual: args.eps,
        max_sweeps: args.max_sweeps,
        tie_tol: args.tie_tol,
        stall_window: args.stall_window,
        feasibility_tol: args.feas_tol,
        record_trajectory: args.trace.is_some(),
        ..SolverConfig::default()
    };
    let problem = &file.problem;
    let report = solve(problem, &config, &file.initial_points)?;

    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        write_trace(problem, &report, &mut buf)?;
        write_file(path, &buf)?;
    }
    if let Some(path) = &args.report {
        write_file(path, solve_report_json(&report).as_bytes())?;
    }

    writeln!(
        out,
        "{} sets in dimension {}, {} orbits",
        problem.set_count(),
        problem.dimension(),
        report.orbits.len()
    )
    .ok();
    writeln!(
        out,
        "pruned {}  retained {}",
        fmt_indices(&report.pruned),
        fmt_indices(&report.retained)
    )
    .ok();
    for orbit in &report.orbits {
        if orbit.status == OrbitStatus::Pruned {
            continue;
        }
        writeln!(
            out,
            "orbit {}: {} after {} sweeps, residual {:e}, point {}",
            orbit.r,
            orbit.status.as_str(),
            orbit.sweeps,
            orbit.last_sweep_residual,
            fmt_point(&orbit.current)
        )
        .ok();
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}").ok();
    }
    Ok(if report.any_converged() {
        EXIT_OK
    } else {
        EXIT_NO_SOLUTION
    })
}

fn run_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let file = read_problem(&args.problem)?;
    for w in &file.warnings {
        writeln!(out, "warning: {w}").ok();
    }
    let problem = &file.problem;
    let (do_combos, do_condition) = if args.combos || args.condition {
        (args.combos, args.condition)
    } else {
        (true, true)
    };

    let mut report = VerifyReport {
        combos: None,
        condition: None,
        pruning: None,
    };
    if do_combos {
        let config = OracleConfig::default();
        let combos = enumerate_feasible_combos(problem, &config)?;
        let section = CombosSection::new(config, combos);
        writeln!(
            out,
            "combinations: {} total, {} feasible (numerical)",
            section.total, section.feasible
        )
        .ok();
        for c in section.combos.iter().filter(|c| c.feasible) {
            writeln!(
                out,
                "  feasible {:?} witness {}",
                c.combo,
                c.witness.as_deref().map_or_else(String::new, fmt_point)
            )
            .ok();
        }
        let solved = solve(problem, &SolverConfig::default(), &file.initial_points)?;
        report.pruning = Some(audit_pruning(&solved, &section.combos));
        report.combos = Some(section);
    }
    if do_condition {
        let cond = check_condition(problem, args.samples, args.margin_tol, args.seed)?;
        writeln!(
            out,
            "condition: {} (min margin {:e}, {} samples per piece, seed {}; sampling evidence only)",
            if cond.holds { "holds" } else { "fails" },
            cond.min_margin,
            cond.samples_per_piece,
            cond.seed
        )
        .ok();
        for e in &cond.entries {
            let theta = e
                .theta
                .map_or_else(|| "non-constant".to_string(), |t| t.to_string());
            writeln!(out, "  theta({},{}) = {}", e.set, e.piece, theta).ok();
        }
        report.condition = Some(cond);
    }
    if let Some(path) = &args.report {
        write_file(path, verify_report_json(&report).as_bytes())?;
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable output to `out` and errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT_ERROR
            } else {
                EXIT_OK
            };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            write!(target, "{}", e.render()).ok();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => run_solve(args, out),
        Command::Verify(args) => run_verify(args, out),
    };
    result.unwrap_or_else(|e| {
        writeln!(err, "error: {e}").ok();
        EXIT_INPUT_ERROR
    })
}
