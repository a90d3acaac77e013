use std::collections::HashSet;

use crate::dtdg::{canonical, Edge, TemporalWindow};

/// Union of the edges of every snapshot in the window.
pub(crate) struct Memory {
    edges: HashSet<Edge>,
}

impl Memory {
    pub(crate) fn from_window(window: &TemporalWindow<'_>) -> Self {
        let edges = window
            .snapshots
            .iter()
            .flat_map(|s| s.edges().iter().copied())
            .collect();
        Self { edges }
    }

    pub(crate) fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&canonical(u, v))
    }
}

/// 1 iff `(u, v)` appears in any snapshot of the window.
pub fn edgebank_score(window: &TemporalWindow<'_>, u: usize, v: usize) -> u8 {
    u8::from(window.snapshots.iter().any(|s| s.has_edge(u, v)))
}
