//! Report shapes for sweeps and perturbation experiments. Field order and
//! sorted-map contexts make serialization deterministic for a fixed
//! configuration.

use gbmul::perturbation::ConvergenceReport;
use gbmul::ToleranceConfig;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl DrawStatus {
    pub fn label(&self) -> &'static str {
        match self {
            DrawStatus::Pass => "pass",
            DrawStatus::Fail => "fail",
            DrawStatus::NotApplicable => "not_applicable",
        }
    }
}

/// One sweep draw: sizes, outcome, and the tightest margin seen. `detail`
/// carries full certificates on failures and replays.
#[derive(Clone, Debug, Serialize)]
pub struct DrawRow {
    pub draw: u64,
    pub dim: usize,
    pub count: usize,
    pub status: DrawStatus,
    pub worst_claim: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: u64,
    pub fail: u64,
    pub not_applicable: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_draw: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub draws: u64,
    pub dims: String,
    pub counts: String,
    pub tolerances: ToleranceConfig,
    pub summary: Summary,
    pub rows: Vec<DrawRow>,
}

impl SuiteReport {
    pub fn from_rows(
        suite: &str,
        seed: u64,
        draws: u64,
        dims: String,
        counts: String,
        tolerances: ToleranceConfig,
        rows: Vec<DrawRow>,
    ) -> SuiteReport {
        let mut summary = Summary {
            pass: 0,
            fail: 0,
            not_applicable: 0,
            worst_margin: None,
            worst_draw: None,
        };
        for row in &rows {
            match row.status {
                DrawStatus::Pass => summary.pass += 1,
                DrawStatus::Fail => summary.fail += 1,
                DrawStatus::NotApplicable => summary.not_applicable += 1,
            }
            if let Some(margin) = row.worst_margin {
                if summary.worst_margin.is_none_or(|w| margin < w) {
                    summary.worst_margin = Some(margin);
                    summary.worst_draw = Some(row.draw);
                }
            }
        }
        SuiteReport { suite: suite.into(), seed, draws, dims, counts, tolerances, summary, rows }
    }

    pub fn any_failure(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    /// Plot-ready rows; claims are identifiers, so no quoting is needed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("draw,dim,count,status,worst_claim,worst_margin\n");
        for row in &self.rows {
            let margin = row.worst_margin.map(|m| m.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.draw,
                row.dim,
                row.count,
                row.status.label(),
                row.worst_claim,
                margin
            ));
        }
        out
    }
}

pub fn convergence_to_json(report: &ConvergenceReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

pub fn convergence_to_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("l,norm,param_distance,multiplier_distance,envelope,satisfied\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.l,
            row.norm,
            row.param_distance,
            row.multiplier_distance,
            row.envelope,
            row.satisfied
        ));
    }
    out
}
