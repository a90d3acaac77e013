//! Table rendering from summary.csv and analysis.csv.
//!
//! APs are shown ×100 with two decimals, optimal receptive fields in
//! parentheses, and `inf` for unbounded history.

use std::fmt::Write;
use std::path::Path;

use serde::Serialize;

use super::records::{read_table, AnalysisRow, SummaryRow, ANALYSIS_HEADER, SUMMARY_HEADER};
use crate::error::Result;
use crate::models::Arch;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorCell {
    pub dataset: String,
    pub arch: Arch,
    pub ap_inf: f64,
    pub ap_1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumCell {
    pub dataset: String,
    pub arch: Arch,
    pub ap: f64,
    pub tau: String,
    pub ties: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchLine {
    pub arch: Arch,
    pub datasets: usize,
    pub avg_gain: f64,
    pub correlation: Option<f64>,
    pub note: String,
}

/// Machine-readable form of the report, AP×100 throughout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDoc {
    pub archs: Vec<Arch>,
    pub datasets: Vec<String>,
    pub anchors: Vec<AnchorCell>,
    pub optima: Vec<OptimumCell>,
    pub per_arch: Vec<ArchLine>,
    pub notes: Vec<String>,
}

pub fn build_report(summary: &[SummaryRow], analysis: &[AnalysisRow]) -> ReportDoc {
    let archs: Vec<Arch> = Arch::ALL
        .into_iter()
        .filter(|a| summary.iter().any(|s| s.arch == *a) || analysis.iter().any(|r| r.arch == *a))
        .collect();
    let mut datasets: Vec<String> = Vec::new();
    for s in summary {
        if !datasets.contains(&s.dataset) {
            datasets.push(s.dataset.clone());
        }
    }
    let mut notes: Vec<String> = Vec::new();
    for s in summary {
        if !s.note.is_empty() && !notes.contains(&s.note) {
            notes.push(s.note.clone());
        }
    }
    ReportDoc {
        anchors: summary
            .iter()
            .map(|s| AnchorCell {
                dataset: s.dataset.clone(),
                arch: s.arch,
                ap_inf: 100.0 * s.ap_inf,
                ap_1: 100.0 * s.ap_1,
            })
            .collect(),
        optima: summary
            .iter()
            .map(|s| OptimumCell {
                dataset: s.dataset.clone(),
                arch: s.arch,
                ap: 100.0 * s.ap_tau_star,
                tau: s.tau_star.to_string(),
                ties: s.argmax_ties.clone(),
            })
            .collect(),
        per_arch: archs
            .iter()
            .filter_map(|a| analysis.iter().find(|r| r.arch == *a))
            .map(|r| ArchLine {
                arch: r.arch,
                datasets: r.datasets,
                avg_gain: r.avg_gain,
                correlation: r.correlation,
                note: r.note.clone(),
            })
            .collect(),
        archs,
        datasets,
        notes,
    }
}

const MIN_NAME_W: usize = 16;
const CELL_W: usize = 12;

pub fn render_text(doc: &ReportDoc) -> String {
    let name_w = doc
        .datasets
        .iter()
        .map(|d| d.len() + 2)
        .fold(MIN_NAME_W, usize::max);
    let mut s = String::new();
    let header = |s: &mut String, first: &str, second: Option<&str>| {
        let _ = write!(s, "{first:<name_w$}");
        if let Some(sec) = second {
            let _ = write!(s, "{sec:<5}");
        }
        for a in &doc.archs {
            let _ = write!(s, "{:>CELL_W$}", a.label());
        }
        s.push('\n');
    };

    s.push_str("AP x100 with all history (inf) and with the last snapshot only (1)\n");
    header(&mut s, "Dataset", Some("tau"));
    for d in &doc.datasets {
        for (k, label) in [(0, "inf"), (1, "1")] {
            let _ = write!(
                s,
                "{:<name_w$}{label:<5}",
                if k == 0 { d.as_str() } else { "" }
            );
            for a in &doc.archs {
                let cell = doc
                    .anchors
                    .iter()
                    .find(|c| &c.dataset == d && c.arch == *a)
                    .map_or("-".to_string(), |c| {
                        format!("{:.2}", if k == 0 { c.ap_inf } else { c.ap_1 })
                    });
                let _ = write!(s, "{cell:>CELL_W$}");
            }
            s.push('\n');
        }
    }

    s.push_str("\nAP x100 at the optimal receptive field (tau*)\n");
    header(&mut s, "Dataset", None);
    for d in &doc.datasets {
        let _ = write!(s, "{d:<name_w$}");
        for a in &doc.archs {
            let cell = doc
                .optima
                .iter()
                .find(|c| &c.dataset == d && c.arch == *a)
                .map_or("-".to_string(), |c| format!("{:.2} ({})", c.ap, c.tau));
            let _ = write!(s, "{cell:>CELL_W$}");
        }
        s.push('\n');
    }
    let _ = write!(s, "{:<name_w$}", "Avg gain");
    for a in &doc.archs {
        let cell = doc
            .per_arch
            .iter()
            .find(|r| r.arch == *a)
            .map_or("-".to_string(), |r| format!("{:+.2}", r.avg_gain));
        let _ = write!(s, "{cell:>CELL_W$}");
    }
    s.push('\n');

    let tied: Vec<&OptimumCell> = doc.optima.iter().filter(|c| c.ties.contains(';')).collect();
    if !tied.is_empty() {
        s.push_str("\nTied maxima (tau* is the smallest)\n");
        for c in tied {
            let _ = writeln!(
                s,
                "  {} {}: {}",
                c.dataset,
                c.arch.label(),
                c.ties.replace(';', ", ")
            );
        }
    }

    s.push_str("\nCorrelation of snapshot count with AP(inf) - AP(1)\n");
    for r in &doc.per_arch {
        let value = r
            .correlation
            .map_or("N/A".to_string(), |c| format!("{c:+.2}"));
        let _ = write!(s, "{:<name_w$}{value:>CELL_W$}", r.arch.label());
        if !r.note.is_empty() {
            let _ = write!(s, "  ({})", r.note);
        }
        s.push('\n');
    }

    if !doc.notes.is_empty() {
        s.push_str("\nNotes\n");
        for n in &doc.notes {
            let _ = writeln!(s, "  {n}");
        }
    }
    s
}

pub fn render_json(doc: &ReportDoc) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)? + "\n")
}

/// Reads summary.csv and analysis.csv from `dir`.
pub fn load_report(dir: &Path) -> Result<ReportDoc> {
    let summary: Vec<SummaryRow> = read_table(&dir.join("summary.csv"), SUMMARY_HEADER)?;
    let analysis: Vec<AnalysisRow> = read_table(&dir.join("analysis.csv"), ANALYSIS_HEADER)?;
    Ok(build_report(&summary, &analysis))
}
