//! CSV rendering of the function table.

use amenlab_core::folner::{Estimate, HarnessReport, InequalityOutcome};

use crate::JobError;

/// Marker for a cell whose value lies beyond the caps.
pub const OPEN_CELL: &str = "\u{2014}";

fn cell(estimate: &Estimate) -> (String, String) {
    match &estimate.upper {
        Some(u) if *u == estimate.lower => (u.to_string(), "exact".into()),
        _ => (OPEN_CELL.to_string(), estimate.to_string()),
    }
}

/// Columns `quantity,m,k,value,verdict`; inequality checks follow the values
/// with the check in the `value` column.
pub fn render_csv(report: &HarnessReport) -> Result<String, JobError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| JobError::Input(format!("csv: {e}"));
    writer.write_record(["quantity", "m", "k", "value", "verdict"]).map_err(io)?;
    for (index, estimate) in report.folner.iter().enumerate() {
        let (value, status) = cell(estimate);
        let k = (index + 1).to_string();
        writer.write_record(["Fol", "", &k, &value, &status]).map_err(io)?;
    }
    for (name, cells) in [("F", &report.weighted), ("R", &report.ramsey)] {
        for c in cells {
            let (value, status) = cell(&c.value);
            writer
                .write_record([name, &c.m.to_string(), &c.k.to_string(), &value, &status])
                .map_err(io)?;
        }
    }
    for check in &report.checks {
        let status = match &check.outcome {
            InequalityOutcome::Holds => "holds",
            InequalityOutcome::Violated => "violated",
            InequalityOutcome::Untested { .. } => "untested",
        };
        writer.write_record(["check", "", "", &check.name, status]).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| JobError::Input(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| JobError::Input(format!("csv: {e}")))
}

/// Whether any cell or check was left open by the caps.
pub fn has_open_cells(report: &HarnessReport) -> bool {
    let open = |e: &Estimate| e.upper.as_ref() != Some(&e.lower);
    report.folner.iter().any(open)
        || report.weighted.iter().chain(&report.ramsey).any(|c| open(&c.value))
        || report
            .checks
            .iter()
            .any(|c| matches!(c.outcome, InequalityOutcome::Untested { .. }))
}
