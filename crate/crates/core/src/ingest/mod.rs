//! Raw temporal edge lists to snapshot sequences.
//!
//! Input files are line oriented: one event per line, columns separated by
//! whitespace or commas, `#` and `%` lines are comments. The column order is
//! described by a layout string such as `"src dst [weight] time"`, where a
//! bracketed column may be absent on any given line.
//!
//! Raw node ids are arbitrary tokens; [`discretize`] remaps them densely to
//! `0..N` in order of first appearance.

mod cache;
mod registry;

use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dtdg::{Dtdg, Snapshot};
use crate::error::{Error, Result};

pub use cache::{read_cache, read_cache_str, write_cache, write_cache_string, CACHE_FORMAT};
pub use registry::{
    lookup, registry, validate_against_registry, DatasetSpec, ValidationEntry, ValidationReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEvent {
    pub src: String,
    pub dst: String,
    pub weight: Option<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Src,
    Dst,
    Weight,
    Time,
    Skip,
}

/// Column order of an edge-list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    columns: Vec<(Column, bool)>,
}

impl Layout {
    fn required(&self) -> usize {
        self.columns.iter().filter(|(_, opt)| !opt).count()
    }
}

impl Default for Layout {
    fn default() -> Self {
        "src dst [weight] time"
            .parse()
            .expect("valid default layout")
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for tok in s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let (name, optional) = match tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                Some(inner) => (inner, true),
                None => (tok, false),
            };
            let col = match name {
                "src" | "source" | "u" => Column::Src,
                "dst" | "target" | "v" => Column::Dst,
                "weight" | "w" => Column::Weight,
                "time" | "t" | "ts" => Column::Time,
                "_" | "skip" => Column::Skip,
                other => return Err(Error::config(format!("unknown layout column {other:?}"))),
            };
            columns.push((col, optional));
        }
        for needed in [Column::Src, Column::Dst, Column::Time] {
            match columns
                .iter()
                .filter(|(c, _)| *c == needed)
                .collect::<Vec<_>>()[..]
            {
                [(_, false)] => {}
                _ => {
                    return Err(Error::config(format!(
                        "layout {s:?} needs exactly one required {needed:?} column"
                    )))
                }
            }
        }
        if columns.iter().filter(|(_, opt)| *opt).count() > 1 {
            return Err(Error::config("at most one optional column is supported"));
        }
        Ok(Self { columns })
    }
}

pub fn parse_edge_list<R: BufRead>(reader: R, layout: &Layout) -> Result<Vec<EdgeEvent>> {
    let mut events = Vec::new();
    let required = layout.required();
    let all = layout.columns.len();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let with_optional = if fields.len() == all {
            true
        } else if fields.len() == required {
            false
        } else {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {required} or {all} columns, found {}",
                    fields.len()
                ),
            });
        };
        let mut cols = layout
            .columns
            .iter()
            .filter(|(_, opt)| with_optional || !opt)
            .map(|(c, _)| *c);
        let (mut src, mut dst, mut weight, mut time) = (None, None, None, None);
        for field in &fields {
            let number = |what: &str| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("{what} {field:?} is not a number"),
                    })
            };
            match cols.next().expect("column count checked") {
                Column::Src => src = Some(field.to_string()),
                Column::Dst => dst = Some(field.to_string()),
                Column::Weight => weight = Some(number("weight")?),
                Column::Time => time = Some(number("time")?),
                Column::Skip => {}
            }
        }
        events.push(EdgeEvent {
            src: src.expect("layout has src"),
            dst: dst.expect("layout has dst"),
            weight,
            time: time.expect("layout has time"),
        });
    }
    if events.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no edge events in input".into(),
        });
    }
    Ok(events)
}

/// How event timestamps map to snapshot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// The time column already holds a non-negative integer snapshot index.
    GivenIndex,
    /// `K` equal-width bins over `[t_min, t_max]`, the last bin closed.
    FixedCount(usize),
}

impl FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "given" || s == "given-index" {
            return Ok(Discretization::GivenIndex);
        }
        let k = s
            .strip_prefix("fixed:")
            .or_else(|| s.strip_prefix("count:"))
            .unwrap_or(s);
        k.parse()
            .map(Discretization::FixedCount)
            .map_err(|_| Error::config(format!("unknown discretization rule {s:?}")))
    }
}

/// A discretized graph plus the bookkeeping needed to audit it.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub dtdg: Dtdg,
    /// `node_ids[dense] = raw`.
    pub node_ids: Vec<String>,
    /// Events that became an edge occurrence (before within-snapshot merging).
    pub edge_occurrences: usize,
    pub self_loops_dropped: usize,
    pub zero_weight_dropped: usize,
}

impl Discretized {
    pub fn dense_id(&self, raw: &str) -> Option<usize> {
        self.node_ids.iter().position(|id| id == raw)
    }
}

pub fn discretize(name: &str, events: &[EdgeEvent], rule: Discretization) -> Result<Discretized> {
    if events.is_empty() {
        return Err(Error::config("cannot discretize an empty event list"));
    }
    let bins: Vec<usize> = match rule {
        Discretization::FixedCount(k) => {
            if k < 2 {
                return Err(Error::config(format!(
                    "fixed-count rule needs K >= 2, got {k}"
                )));
            }
            let (lo, hi) = events
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                    (lo.min(e.time), hi.max(e.time))
                });
            let width = (hi - lo) / k as f64;
            events
                .iter()
                .map(|e| {
                    if width == 0.0 {
                        0
                    } else {
                        (((e.time - lo) / width).floor() as usize).min(k - 1)
                    }
                })
                .collect()
        }
        Discretization::GivenIndex => events
            .iter()
            .map(|e| {
                if e.time < 0.0 || e.time.fract() != 0.0 {
                    Err(Error::config(format!(
                        "given-index rule needs non-negative integer times, got {}",
                        e.time
                    )))
                } else {
                    Ok(e.time as usize)
                }
            })
            .collect::<Result<_>>()?,
    };
    let num_snapshots = match rule {
        Discretization::FixedCount(k) => k,
        Discretization::GivenIndex => bins.iter().max().map_or(0, |m| m + 1),
    };

    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut node_ids: Vec<String> = Vec::new();
    let mut dense = Vec::with_capacity(events.len());
    for e in events {
        let mut pair = [0usize; 2];
        for (slot, raw) in pair.iter_mut().zip([e.src.as_str(), e.dst.as_str()]) {
            *slot = *ids.entry(raw).or_insert_with(|| {
                node_ids.push(raw.to_string());
                node_ids.len() - 1
            });
        }
        dense.push((pair[0], pair[1]));
    }
    let n = node_ids.len();

    let mut per_bin: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); num_snapshots];
    let mut weighted = vec![false; num_snapshots];
    let (mut occurrences, mut self_loops, mut zero_weight) = (0, 0, 0);
    for ((e, &(u, v)), &bin) in events.iter().zip(&dense).zip(&bins) {
        if u == v {
            self_loops += 1;
            continue;
        }
        if e.weight == Some(0.0) {
            zero_weight += 1;
            continue;
        }
        occurrences += 1;
        weighted[bin] |= e.weight.is_some();
        per_bin[bin].push((u, v, e.weight.unwrap_or(1.0)));
    }
    let snapshots = per_bin
        .iter()
        .enumerate()
        .map(|(t, raw)| {
            if weighted[t] {
                Snapshot::from_weighted_edges(t, raw, n)
            } else {
                let pairs: Vec<_> = raw.iter().map(|&(u, v, _)| (u, v)).collect();
                Snapshot::from_edges(t, &pairs, n)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Discretized {
        dtdg: Dtdg::new(name, n, snapshots)?,
        node_ids,
        edge_occurrences: occurrences,
        self_loops_dropped: self_loops,
        zero_weight_dropped: zero_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn ev(src: &str, dst: &str, time: f64) -> EdgeEvent {
        EdgeEvent {
            src: src.into(),
            dst: dst.into(),
            weight: None,
            time,
        }
    }

    #[test]
    fn parses_weighted_layout() {
        let layout: Layout = "src dst weight time".parse().unwrap();
        let events = parse_edge_list("0 1 5 10\n2 3 -2 11".as_bytes(), &layout).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].weight, Some(5.0));
        assert_eq!(events[1].weight, Some(-2.0));
        assert_eq!(events[1].time, 11.0);
    }

    #[test]
    fn skips_comments() {
        let layout: Layout = "src dst time".parse().unwrap();
        let events = parse_edge_list("# header\n4 7 3".as_bytes(), &layout).unwrap();
        assert_eq!(events, vec![ev("4", "7", 3.0)]);
    }

    #[test]
    fn optional_weight_column() {
        let events =
            parse_edge_list("1 2 9\n% note\n1 3 0.5 10".as_bytes(), &Layout::default()).unwrap();
        assert_eq!(events[0].weight, None);
        assert_eq!(events[1].weight, Some(0.5));
    }

    #[test]
    fn comma_separated() {
        let layout: Layout = "src,dst,time".parse().unwrap();
        let events = parse_edge_list("a,b,1\nb,c,2\n".as_bytes(), &layout).unwrap();
        assert_eq!(events[1], ev("b", "c", 2.0));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let layout: Layout = "src dst time".parse().unwrap();
        match parse_edge_list("a b c".as_bytes(), &layout) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("1 2 3\n1 2".as_bytes(), &layout) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_edge_list("# only\n\n".as_bytes(), &Layout::default()).is_err());
    }

    #[test]
    fn bad_layouts() {
        assert!("src dst".parse::<Layout>().is_err());
        assert!("src dst time time".parse::<Layout>().is_err());
        assert!("src dst bogus time".parse::<Layout>().is_err());
    }

    #[test]
    fn equal_width_binning() {
        let events = vec![ev("a", "b", 0.0), ev("b", "c", 0.0), ev("a", "c", 9.0)];
        let d = discretize("x", &events, Discretization::FixedCount(2)).unwrap();
        assert_eq!(d.dtdg.len(), 2);
        assert_eq!(d.dtdg.snapshots()[0].num_edges(), 2);
        assert_eq!(d.dtdg.snapshots()[1].num_edges(), 1);
        assert_eq!(d.node_ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn given_index_keeps_gaps() {
        let events = vec![
            ev("a", "b", 0.0),
            ev("a", "c", 1.0),
            ev("b", "c", 1.0),
            ev("c", "d", 3.0),
        ];
        let d = discretize("x", &events, Discretization::GivenIndex).unwrap();
        assert_eq!(d.dtdg.len(), 4);
        assert_eq!(d.dtdg.snapshots()[2].num_edges(), 0);
    }

    #[test]
    fn discretize_errors() {
        let events = vec![ev("a", "b", 0.5)];
        assert!(matches!(
            discretize("x", &events, Discretization::FixedCount(1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            discretize("x", &events, Discretization::GivenIndex),
            Err(Error::Config(_))
        ));
        assert!(discretize("x", &[], Discretization::FixedCount(2)).is_err());
    }

    #[test]
    fn negative_weights_are_edges_zero_weights_are_not() {
        let mut events = vec![ev("a", "b", 0.0), ev("b", "c", 1.0), ev("c", "d", 1.0)];
        events[0].weight = Some(-3.0);
        events[1].weight = Some(0.0);
        let d = discretize("x", &events, Discretization::GivenIndex).unwrap();
        assert_eq!(d.dtdg.snapshots()[0].num_edges(), 1);
        assert_eq!(d.dtdg.snapshots()[1].num_edges(), 1);
        assert_eq!(d.zero_weight_dropped, 1);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(
            "given".parse::<Discretization>().unwrap(),
            Discretization::GivenIndex
        );
        assert_eq!(
            "fixed:11".parse::<Discretization>().unwrap(),
            Discretization::FixedCount(11)
        );
        assert_eq!(
            "88".parse::<Discretization>().unwrap(),
            Discretization::FixedCount(88)
        );
    }

    fn arb_events() -> impl Strategy<Value = Vec<EdgeEvent>> {
        prop::collection::vec((0u8..12, 0u8..12, 0u32..50), 1..80).prop_map(|raw| {
            raw.into_iter()
                .map(|(a, b, t)| ev(&format!("n{a}"), &format!("n{b}"), t as f64))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn occurrences_account_for_every_event(events in arb_events(), k in 2usize..8) {
            let d = discretize("p", &events, Discretization::FixedCount(k)).unwrap();
            prop_assert_eq!(d.edge_occurrences + d.self_loops_dropped + d.zero_weight_dropped, events.len());
            // Merged edge multiplicities sum back to the occurrence count.
            let mut mult: BTreeMap<(usize, (usize, usize)), usize> = BTreeMap::new();
            let (lo, hi) = events.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), e| (l.min(e.time), h.max(e.time)));
            for e in &events {
                let (u, v) = (d.dense_id(&e.src).unwrap(), d.dense_id(&e.dst).unwrap());
                if u == v { continue; }
                let bin = if hi == lo { 0 } else { (((e.time - lo) / ((hi - lo) / k as f64)).floor() as usize).min(k - 1) };
                prop_assert!(d.dtdg.snapshots()[bin].has_edge(u, v));
                *mult.entry((bin, crate::dtdg::canonical(u, v))).or_default() += 1;
            }
            prop_assert_eq!(mult.values().sum::<usize>(), d.edge_occurrences);
            prop_assert_eq!(mult.len(), d.dtdg.total_links());
        }

        #[test]
        fn id_mapping_is_a_bijection(events in arb_events()) {
            let d = discretize("p", &events, Discretization::FixedCount(3)).unwrap();
            for (dense, raw) in d.node_ids.iter().enumerate() {
                prop_assert_eq!(d.dense_id(raw), Some(dense));
            }
            let mut sorted = d.node_ids.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), d.node_ids.len());
            prop_assert_eq!(d.dtdg.num_nodes(), d.node_ids.len());
        }

        #[test]
        fn ingestion_is_deterministic(events in arb_events()) {
            let a = discretize("p", &events, Discretization::FixedCount(4)).unwrap();
            let b = discretize("p", &events, Discretization::FixedCount(4)).unwrap();
            prop_assert_eq!(write_cache_string(&a.dtdg, Some(&a.node_ids)).unwrap(),
                            write_cache_string(&b.dtdg, Some(&b.node_ids)).unwrap());
        }
    }
}
