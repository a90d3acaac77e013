//! Generated graphs with known temporal structure.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dtdg::{Dtdg, Edge, Snapshot};
use crate::error::{Error, Result};

/// Name under which [`period_two`] graphs are addressed in run configs.
pub const PERIOD_TWO_NAME: &str = "synthetic-period2";

/// Parameters of the period-2 alternating graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodTwo {
    pub nodes: usize,
    pub snapshots: usize,
    pub edges_per_phase: usize,
    pub seed: u64,
}

impl Default for PeriodTwo {
    fn default() -> Self {
        Self {
            nodes: 20,
            snapshots: 40,
            edges_per_phase: 40,
            seed: 2,
        }
    }
}

/// Two disjoint edge sets `A` and `B` drawn from a seeded shuffle of all node
/// pairs; even snapshots are `A`, odd snapshots are `B`.
pub fn period_two(p: &PeriodTwo) -> Result<Dtdg> {
    let mut pairs: Vec<Edge> = (0..p.nodes)
        .flat_map(|u| (u + 1..p.nodes).map(move |v| (u, v)))
        .collect();
    if 2 * p.edges_per_phase > pairs.len() || p.edges_per_phase == 0 {
        return Err(Error::config(format!(
            "{} edges per phase do not fit twice into {} node pairs",
            p.edges_per_phase,
            pairs.len()
        )));
    }
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(p.seed));
    let (a, rest) = pairs.split_at(p.edges_per_phase);
    let b = &rest[..p.edges_per_phase];
    let snapshots = (0..p.snapshots)
        .map(|t| Snapshot::from_edges(t, if t % 2 == 0 { a } else { b }, p.nodes))
        .collect::<Result<_>>()?;
    Dtdg::new(PERIOD_TWO_NAME, p.nodes, snapshots)
}
