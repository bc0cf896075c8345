use serde::Serialize;

use crate::solver::SolveReport;
use crate::verifier::{ComboReport, ConditionReport, OracleConfig, PruneAudit};

/// Combination search results, labelled as a numerical heuristic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombosSection {
    pub method: &'static str,
    pub config: OracleConfig,
    pub total: usize,
    pub feasible: usize,
    pub combos: Vec<ComboReport>,
}

impl CombosSection {
    pub fn new(config: OracleConfig, combos: Vec<ComboReport>) -> Self {
        CombosSection {
            method: "cyclic projections per combination (numerical heuristic, not a certificate)",
            total: combos.len(),
            feasible: combos.iter().filter(|c| c.feasible).count(),
            config,
            combos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combos: Option<CombosSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruning: Option<Vec<PruneAudit>>,
}

/// Pretty JSON with keys in declaration order. Non-finite floats become `null`.
pub fn solve_report_json(report: &SolveReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn verify_report_json(report: &VerifyReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}
