//! Discrete-time dynamic graphs: snapshots over a fixed node universe,
//! temporal windows and chronological splits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub type Edge = (usize, usize);

/// Orders a pair so that `u < v`.
pub fn canonical(u: usize, v: usize) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// One static graph `G^t` over the global node universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    t: usize,
    edges: BTreeSet<Edge>,
    weights: Option<BTreeMap<Edge, f64>>,
    active_nodes: BTreeSet<usize>,
}

impl Snapshot {
    /// Canonicalizes `(u, v)` pairs to `u < v`, drops self-loops and merges duplicates.
    pub fn from_edges(t: usize, raw_edges: &[Edge], n: usize) -> Result<Self> {
        Self::build(t, raw_edges.iter().map(|&(u, v)| (u, v, None)), n)
    }

    /// Like [`Snapshot::from_edges`], summing the weights of merged duplicates.
    pub fn from_weighted_edges(
        t: usize,
        raw_edges: &[(usize, usize, f64)],
        n: usize,
    ) -> Result<Self> {
        Self::build(t, raw_edges.iter().map(|&(u, v, w)| (u, v, Some(w))), n)
    }

    fn build(
        t: usize,
        raw: impl Iterator<Item = (usize, usize, Option<f64>)>,
        n: usize,
    ) -> Result<Self> {
        let mut edges = BTreeSet::new();
        let mut weights: Option<BTreeMap<Edge, f64>> = None;
        for (u, v, w) in raw {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, num_nodes: n });
                }
            }
            if u == v {
                continue;
            }
            let e = canonical(u, v);
            edges.insert(e);
            if let Some(w) = w {
                *weights
                    .get_or_insert_with(BTreeMap::new)
                    .entry(e)
                    .or_insert(0.0) += w;
            }
        }
        let active_nodes = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        Ok(Self {
            t,
            edges,
            weights,
            active_nodes,
        })
    }

    pub fn empty(t: usize) -> Self {
        Self {
            t,
            edges: BTreeSet::new(),
            weights: None,
            active_nodes: BTreeSet::new(),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn weights(&self) -> Option<&BTreeMap<Edge, f64>> {
        self.weights.as_ref()
    }

    pub fn active_nodes(&self) -> &BTreeSet<usize> {
        &self.active_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&canonical(u, v))
    }

    pub(crate) fn with_index(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    /// `D^{-1/2} (A + I) D^{-1/2}` as a dense `n×n` matrix, `D` the degree of `A + I`.
    pub fn normalized_adjacency(&self, n: usize) -> Tensor {
        let mut deg = vec![1.0f64; n];
        for &(u, v) in &self.edges {
            deg[u] += 1.0;
            deg[v] += 1.0;
        }
        let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut a = Tensor::zeros(n, n);
        for (i, &d) in inv_sqrt.iter().enumerate() {
            a.set(i, i, d * d);
        }
        for &(u, v) in &self.edges {
            let w = inv_sqrt[u] * inv_sqrt[v];
            a.set(u, v, w);
            a.set(v, u, w);
        }
        a
    }
}

/// A named sequence of snapshots over `num_nodes` global node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtdg {
    name: String,
    num_nodes: usize,
    snapshots: Vec<Snapshot>,
}

impl Dtdg {
    /// Re-indexes the snapshots to `0..T` in the given order.
    pub fn new(
        name: impl Into<String>,
        num_nodes: usize,
        snapshots: Vec<Snapshot>,
    ) -> Result<Self> {
        let snapshots: Vec<Snapshot> = snapshots
            .into_iter()
            .enumerate()
            .map(|(t, s)| s.with_index(t))
            .collect();
        for s in &snapshots {
            if let Some(&max) = s.active_nodes.iter().next_back() {
                if max >= num_nodes {
                    return Err(Error::NodeOutOfRange { id: max, num_nodes });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            num_nodes,
            snapshots,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> Result<&Snapshot> {
        self.snapshots.get(t).ok_or(Error::IndexOutOfRange {
            t,
            len: self.snapshots.len(),
        })
    }

    /// Sum of per-snapshot edge counts.
    pub fn total_links(&self) -> usize {
        self.snapshots.iter().map(Snapshot::num_edges).sum()
    }

    /// Snapshots `max(0, t - tau + 1) ..= t`.
    pub fn window(&self, t: usize, tau: Tau) -> Result<TemporalWindow<'_>> {
        if t >= self.snapshots.len() {
            return Err(Error::IndexOutOfRange {
                t,
                len: self.snapshots.len(),
            });
        }
        let start = match tau {
            Tau::Inf => 0,
            Tau::Finite(k) => (t + 1).saturating_sub(k),
        };
        Ok(TemporalWindow {
            end: t,
            tau,
            snapshots: &self.snapshots[start..=t],
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Length of a temporal receptive field; `Inf` means all history.
///
/// Ordered with every finite value before `Inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tau {
    Finite(usize),
    Inf,
}

impl Tau {
    pub fn finite(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("tau must be at least 1"));
        }
        Ok(Tau::Finite(k))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Tau::Inf)
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Finite(k) => write!(f, "{k}"),
            Tau::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "INF" | "Inf" | "∞" => Ok(Tau::Inf),
            other => {
                let k: usize = other
                    .parse()
                    .map_err(|_| Error::config(format!("invalid tau {other:?}")))?;
                Tau::finite(k)
            }
        }
    }
}

impl Serialize for Tau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tau::Finite(k) => s.serialize_u64(*k as u64),
            Tau::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Tau;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive integer or \"inf\"")
            }

            fn visit_u64<E: serde::de::Error>(self, k: u64) -> std::result::Result<Tau, E> {
                Tau::finite(k as usize).map_err(E::custom)
            }

            fn visit_i64<E: serde::de::Error>(self, k: i64) -> std::result::Result<Tau, E> {
                u64::try_from(k)
                    .map_err(E::custom)
                    .and_then(|k| self.visit_u64(k))
            }

            fn visit_f64<E: serde::de::Error>(self, x: f64) -> std::result::Result<Tau, E> {
                if x == f64::INFINITY {
                    Ok(Tau::Inf)
                } else if x.fract() == 0.0 && x >= 0.0 && x <= u64::MAX as f64 {
                    self.visit_u64(x as u64)
                } else {
                    Err(E::custom(format!("invalid tau {x}")))
                }
            }

            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Tau, E> {
                s.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// The snapshots a model may look at when predicting `end + 1`.
#[derive(Debug, Clone, Copy)]
pub struct TemporalWindow<'a> {
    pub end: usize,
    pub tau: Tau,
    pub snapshots: &'a [Snapshot],
}

impl<'a> TemporalWindow<'a> {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> &'a Snapshot {
        self.snapshots.last().expect("window is never empty")
    }

    /// Index of the oldest snapshot in the window.
    pub fn start(&self) -> usize {
        self.end + 1 - self.snapshots.len()
    }
}

/// Training targets end at `train_end`; each test step `t` predicts `t + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_end: usize,
    pub test_start: usize,
    pub test_end: usize,
}

impl SplitSpec {
    pub fn test_steps(&self) -> std::ops::RangeInclusive<usize> {
        self.test_start..=self.test_end
    }

    /// Window end indices used for training (targets `2..=train_end`).
    pub fn train_steps(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.train_end - 1
    }
}

pub fn chronological_split(num_snapshots: usize, train_fraction: f64) -> Result<SplitSpec> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    if num_snapshots < 4 {
        return Err(Error::config(format!(
            "need at least 4 snapshots for a split, got {num_snapshots}"
        )));
    }
    let train_end = (train_fraction * (num_snapshots - 1) as f64 + 1e-9).floor() as usize;
    if train_end < 1 {
        return Err(Error::config("empty training range"));
    }
    let (test_start, test_end) = (train_end + 1, num_snapshots - 2);
    if test_start > test_end {
        return Err(Error::config(format!(
            "empty test range: train_end {train_end} leaves nothing before snapshot {}",
            num_snapshots - 1
        )));
    }
    Ok(SplitSpec {
        train_end,
        test_start,
        test_end,
    })
}
