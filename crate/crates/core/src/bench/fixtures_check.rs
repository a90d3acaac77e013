//! Arithmetic regressions over the published result cells.

use std::fmt;

use crate::ingest::lookup;
use crate::sweep::fixture::{ARCHS, PUBLISHED, PUBLISHED_AVG_GAIN, PUBLISHED_CORRELATION};
use crate::sweep::{
    avg_gain, published_snapshot_count, published_sweeps, snapshot_correlation, SweepResult,
};

/// Allowed absolute difference for correlations and gains.
pub const TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<40} expected {:>8.2} computed {:>8.2}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.computed
        )
    }
}

fn check(name: String, expected: f64, computed: f64, tol: f64) -> Check {
    Check {
        pass: (expected - computed).abs() <= tol,
        name,
        expected,
        computed,
    }
}

/// Snapshot counts against the dataset registry, the five snapshot-count
/// correlations, and the five average gains.
pub fn run_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for row in &PUBLISHED {
        let registered = lookup(row.dataset)
            .and_then(|s| s.expected_snapshots)
            .map_or(f64::NAN, |s| s as f64);
        out.push(check(
            format!("snapshots {}", row.dataset),
            row.snapshots as f64,
            registered,
            0.0,
        ));
    }
    let sweeps = published_sweeps();
    let group = |k: usize| -> Vec<SweepResult> {
        sweeps
            .iter()
            .filter(|s| s.arch == ARCHS[k])
            .cloned()
            .collect()
    };
    for (k, arch) in ARCHS.iter().enumerate() {
        let r = snapshot_correlation(&group(k), published_snapshot_count).unwrap_or(f64::NAN);
        out.push(check(
            format!("correlation {}", arch.label()),
            PUBLISHED_CORRELATION[k],
            r,
            TOLERANCE,
        ));
    }
    for (k, arch) in ARCHS.iter().enumerate() {
        let g = avg_gain(&group(k)).unwrap_or(f64::NAN);
        out.push(check(
            format!("avg gain {}", arch.label()),
            PUBLISHED_AVG_GAIN[k],
            g,
            TOLERANCE,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_and_correlations_pass() {
        let checks = run_checks();
        assert_eq!(checks.len(), 20);
        for c in checks.iter().filter(|c| !c.name.starts_with("avg gain")) {
            assert!(c.pass, "{c}");
        }
        let failing: Vec<&str> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(failing, vec!["avg gain EGCN", "avg gain EdgeBank"]);
    }
}
