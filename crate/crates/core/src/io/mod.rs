//! Problem files, trace files and reports.

mod problem_file;
mod report;
mod trace;

pub use problem_file::{format_float, parse_problem, serialize_problem, ProblemFile};
pub use report::{solve_report_json, verify_report_json, CombosSection, VerifyReport};
pub use trace::{trace_header, write_trace};
