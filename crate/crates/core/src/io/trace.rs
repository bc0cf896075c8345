use std::io::Write;

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::solver::{Problem, SolveReport};

/// Column names: `orbit,sweep,k,i,tau,x1..xn,step,dist_C1..dist_Cm`.
pub fn trace_header(dimension: usize, set_count: usize) -> Vec<String> {
    let mut header: Vec<String> = ["orbit", "sweep", "k", "i", "tau"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=dimension).map(|j| format!("x{j}")));
    header.push("step".into());
    header.extend((1..=set_count).map(|i| format!("dist_C{i}")));
    header
}

/// Writes one CSV row per projection step of every orbit, ordered by orbit
/// then iterate index. The report must come from a run with trajectory
/// recording enabled.
pub fn write_trace<W: Write>(problem: &Problem, report: &SolveReport, out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::Validation(format!("writing trace: {e}"));
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(trace_header(problem.dimension(), problem.set_count()))
        .map_err(to_err)?;
    for orbit in &report.orbits {
        for step in &orbit.trajectory {
            let mut row = vec![
                orbit.r.to_string(),
                step.sweep.to_string(),
                step.k.to_string(),
                step.set_index.to_string(),
                step.tau.to_string(),
            ];
            row.extend(step.point.iter().map(|c| format_float(*c)));
            row.push(format_float(step.length));
            row.extend(
                problem
                    .set_distances(&step.point)?
                    .into_iter()
                    .map(format_float),
            );
            writer.write_record(&row).map_err(to_err)?;
        }
    }
    writer
        .flush()
        .map_err(|e| Error::Validation(format!("writing trace: {e}")))?;
    Ok(())
}
