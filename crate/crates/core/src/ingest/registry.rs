use std::fmt;

use serde::Serialize;

use super::Discretization;
use crate::dtdg::Dtdg;

/// Published statistics for a benchmark dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSpec {
    pub name: &'static str,
    pub domain: &'static str,
    pub expected_nodes: Option<usize>,
    pub expected_links: Option<usize>,
    pub expected_snapshots: Option<usize>,
    pub duration: &'static str,
    pub rule: Discretization,
    /// False for entries that appear in no result table.
    pub has_published_results: bool,
    /// Snapshot boundaries are reconstructed, not published.
    pub approximate_boundaries: bool,
}

const fn spec(
    name: &'static str,
    domain: &'static str,
    nodes: usize,
    links: usize,
    snapshots: usize,
    duration: &'static str,
) -> DatasetSpec {
    DatasetSpec {
        name,
        domain,
        expected_nodes: Some(nodes),
        expected_links: Some(links),
        expected_snapshots: Some(snapshots),
        duration,
        rule: Discretization::FixedCount(snapshots),
        has_published_results: true,
        approximate_boundaries: false,
    }
}

static REGISTRY: [DatasetSpec; 11] = [
    spec("CanParl", "Politics", 734, 74_478, 14, "14 years"),
    spec("USLegis", "Politics", 225, 60_396, 12, "12 congresses"),
    spec("Trade", "Economics", 255, 507_497, 32, "32 years"),
    spec("UNVote", "Politics", 201, 1_035_742, 72, "72 years"),
    DatasetSpec {
        approximate_boundaries: true,
        ..spec("UCI-Message", "Social", 1_899, 59_835, 88, "196 days")
    },
    spec("AS733", "Router", 6_628, 13_512, 30, "86 days"),
    spec("Enron", "Mail", 184, 790, 11, "3 years"),
    spec("Colab", "Citations", 315, 943, 10, "9 years"),
    spec(
        "Bitcoin-OTC",
        "Trust Networks",
        5_881,
        35_592,
        136,
        "5 years",
    ),
    spec(
        "Bitcoin-Alpha",
        "Trust Networks",
        3_783,
        24_186,
        136,
        "5 years",
    ),
    DatasetSpec {
        name: "Contact",
        domain: "Proximity",
        expected_nodes: None,
        expected_links: None,
        expected_snapshots: None,
        duration: "1 month",
        rule: Discretization::GivenIndex,
        has_published_results: false,
        approximate_boundaries: true,
    },
];

pub fn registry() -> &'static [DatasetSpec] {
    &REGISTRY
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Case- and punctuation-insensitive lookup (`"uci_message"` finds `UCI-Message`).
pub fn lookup(name: &str) -> Option<&'static DatasetSpec> {
    let key = normalize(name);
    REGISTRY.iter().find(|s| normalize(s.name) == key)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationEntry {
    pub field: &'static str,
    pub expected: Option<usize>,
    pub actual: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dataset: String,
    pub entries: Vec<ValidationEntry>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation for {}:", self.dataset)?;
        for e in &self.entries {
            let expected = e.expected.map_or("n/a".to_string(), |x| x.to_string());
            let verdict = if e.pass { "ok" } else { "FAIL" };
            writeln!(
                f,
                "  {:<10} expected {:>10} actual {:>10}  {verdict}",
                e.field, expected, e.actual
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Compares node, link and snapshot counts against the published table.
/// Links are counted as the sum of per-snapshot distinct edges.
pub fn validate_against_registry(d: &Dtdg, spec: &DatasetSpec) -> ValidationReport {
    let check = |field, expected: Option<usize>, actual| ValidationEntry {
        field,
        expected,
        actual,
        pass: expected.is_none_or(|x| x == actual),
    };
    let entries = vec![
        check("nodes", spec.expected_nodes, d.num_nodes()),
        check("links", spec.expected_links, d.total_links()),
        check("snapshots", spec.expected_snapshots, d.len()),
    ];
    let mut notes = Vec::new();
    if spec.approximate_boundaries {
        notes.push(format!(
            "{} snapshot boundaries are not published; equal-width binning is an approximation",
            spec.name
        ));
    }
    if !spec.has_published_results {
        notes.push(format!("{} has no published results", spec.name));
    }
    ValidationReport {
        dataset: spec.name.to_string(),
        entries,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtdg::Snapshot;

    fn synthetic(n: usize, links_per_snapshot: &[usize]) -> Dtdg {
        let snaps = links_per_snapshot
            .iter()
            .enumerate()
            .map(|(t, &m)| {
                let mut edges = Vec::new();
                'outer: for u in 0..n {
                    for v in u + 1..n {
                        if edges.len() == m {
                            break 'outer;
                        }
                        edges.push((u, v));
                    }
                }
                Snapshot::from_edges(t, &edges, n).unwrap()
            })
            .collect();
        Dtdg::new("s", n, snaps).unwrap()
    }

    #[test]
    fn table_values() {
        let enron = lookup("enron").unwrap();
        assert_eq!(
            (
                enron.expected_nodes,
                enron.expected_links,
                enron.expected_snapshots
            ),
            (Some(184), Some(790), Some(11))
        );
        let uci = lookup("UCI_Message").unwrap();
        assert_eq!(uci.rule, Discretization::FixedCount(88));
        assert!(uci.approximate_boundaries);
        assert_eq!(
            registry()
                .iter()
                .filter(|s| s.has_published_results)
                .count(),
            10
        );
    }

    #[test]
    fn uslegis_shaped_graph_passes() {
        // 60,396 links over 12 snapshots: 5,033 per snapshot fits in C(225, 2).
        let d = synthetic(225, &[5_033; 12]);
        let report = validate_against_registry(&d, lookup("USLegis").unwrap());
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn node_count_mismatch_is_reported() {
        let d = synthetic(226, &[5_033; 12]);
        let report = validate_against_registry(&d, lookup("USLegis").unwrap());
        let failed: Vec<_> = report.failures().map(|e| e.field).collect();
        assert_eq!(failed, vec!["nodes"]);
    }

    #[test]
    fn colab_shaped_graph_passes() {
        let mut per = vec![94; 10];
        per[0] = 97;
        let d = synthetic(315, &per);
        assert!(validate_against_registry(&d, lookup("Colab").unwrap()).passed());
    }

    #[test]
    fn unpublished_entry_always_passes_with_note() {
        let d = synthetic(5, &[1, 2]);
        let report = validate_against_registry(&d, lookup("contact").unwrap());
        assert!(report.passed());
        assert!(!report.notes.is_empty());
    }
}
