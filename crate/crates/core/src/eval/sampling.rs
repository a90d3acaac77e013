use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dtdg::{canonical, Edge, Snapshot};
use crate::error::{Error, Result};

/// Positives of `G^{t+1}` and an equal number of sampled non-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledEdgeSet {
    pub t: usize,
    pub positives: Vec<Edge>,
    pub negatives: Vec<Edge>,
}

impl LabeledEdgeSet {
    pub fn build<R: Rng + ?Sized>(
        t: usize,
        target: &Snapshot,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let positives: Vec<Edge> = target.edges().iter().copied().collect();
        let negatives = sample_negatives(target, positives.len(), n, rng)?;
        Ok(Self {
            t,
            positives,
            negatives,
        })
    }

    pub fn is_balanced(&self) -> bool {
        self.positives.len() == self.negatives.len()
    }

    /// Positives then negatives, with matching labels.
    pub fn pairs_and_labels(&self) -> (Vec<Edge>, Vec<bool>) {
        let pairs = self
            .positives
            .iter()
            .chain(&self.negatives)
            .copied()
            .collect();
        let labels = (0..self.positives.len())
            .map(|_| true)
            .chain((0..self.negatives.len()).map(|_| false))
            .collect();
        (pairs, labels)
    }
}

/// Uniform sample without replacement of unordered, non-self-loop pairs that
/// are not edges of `target`.
pub fn sample_negatives<R: Rng + ?Sized>(
    target: &Snapshot,
    count: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Edge>> {
    let total = n * n.saturating_sub(1) / 2;
    let available = total - target.num_edges().min(total);
    if count > available {
        return Err(Error::protocol(format!(
            "snapshot {} is too dense: {count} negatives requested but only {available} non-edges exist",
            target.t()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if 2 * available >= total && 4 * count <= available {
        // Sparse regime: rejection sampling over ordered pairs is uniform over
        // unordered ones and avoids enumerating the complement.
        let mut chosen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let e = canonical(u, v);
            if !target.edges().contains(&e) && chosen.insert(e) {
                out.push(e);
            }
        }
        return Ok(out);
    }
    let mut pool: Vec<Edge> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !target.edges().contains(e))
        .collect();
    let (picked, _) = pool.partial_shuffle(rng, count);
    Ok(picked.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forced_sample() {
        let target = Snapshot::from_edges(0, &[(0, 1)], 3).unwrap();
        let mut got = sample_negatives(&target, 2, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        got.sort();
        assert_eq!(got, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn zero_count_and_too_dense() {
        let target = Snapshot::from_edges(0, &[(0, 1)], 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_negatives(&target, 0, 3, &mut rng)
            .unwrap()
            .is_empty());
        assert!(matches!(
            sample_negatives(&target, 3, 3, &mut rng),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn inclusion_frequency_is_uniform() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let edges: Vec<Edge> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(0.2))
            .collect();
        let target = Snapshot::from_edges(0, &edges, n).unwrap();
        let available = n * (n - 1) / 2 - target.num_edges();
        let count = 40;
        let trials = 10_000;
        let mut hits = std::collections::HashMap::<Edge, usize>::new();
        for _ in 0..trials {
            for e in sample_negatives(&target, count, n, &mut rng).unwrap() {
                *hits.entry(e).or_default() += 1;
            }
        }
        // Each non-edge is included with probability count/available.
        let p = count as f64 / available as f64;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for u in 0..n {
            for v in u + 1..n {
                let h = hits.get(&(u, v)).copied().unwrap_or(0) as f64;
                if target.has_edge(u, v) {
                    assert_eq!(h, 0.0);
                } else {
                    // Bonferroni-style margin over ~350 pairs.
                    assert!((h - mean).abs() < 4.5 * sd, "({u},{v}) {h} vs {mean}±{sd}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn negatives_are_valid(seed in any::<u64>(), n in 2usize..15, density in 0.0f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<Edge> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(density))
                .collect();
            let target = Snapshot::from_edges(5, &edges, n).unwrap();
            let available = n * (n - 1) / 2 - edges.len();
            let count = rng.gen_range(0..=available);
            let a = sample_negatives(&target, count, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = sample_negatives(&target, count, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.len(), count);
            let set: HashSet<Edge> = a.iter().copied().collect();
            prop_assert_eq!(set.len(), count);
            for &(u, v) in &a {
                prop_assert!(u < v && v < n && !target.has_edge(u, v));
            }
            if count == edges.len() {
                let les = LabeledEdgeSet::build(5, &target, n, &mut rng).unwrap();
                prop_assert!(les.is_balanced());
            }
        }
    }
}
