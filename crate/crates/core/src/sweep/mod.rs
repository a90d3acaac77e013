//! Receptive-field sweeps and the analyses built on them.
//!
//! APs are fractions in `[0, 1]` everywhere except [`avg_gain`], which
//! reports AP×100 points like the published tables.

pub mod fixture;

use rayon::prelude::*;

use crate::dtdg::Tau;
use crate::error::{Error, Result};
use crate::models::Arch;

/// Seed-aggregated score of one `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: Tau,
    pub mean_ap: f64,
    /// Population standard deviation over seeds.
    pub std_ap: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub dataset: String,
    pub arch: Arch,
    /// Sorted by `tau`, with `INF` last.
    pub rows: Vec<SweepRow>,
    pub tau_star: (Tau, f64),
    /// Every `tau` whose AP equals the maximum.
    pub argmax_ties: Vec<Tau>,
    pub ap_inf: f64,
    pub ap_1: f64,
}

impl SweepResult {
    pub fn from_rows(
        dataset: impl Into<String>,
        arch: Arch,
        mut rows: Vec<SweepRow>,
    ) -> Result<Self> {
        rows.sort_by_key(|r| r.tau);
        if rows.windows(2).any(|w| w[0].tau == w[1].tau) {
            return Err(Error::config("sweep rows repeat a tau"));
        }
        let find = |tau: Tau| {
            rows.iter()
                .find(|r| r.tau == tau)
                .map(|r| r.mean_ap)
                .ok_or_else(|| {
                    Error::config(format!("sweep grid lacks the required tau = {tau} anchor"))
                })
        };
        let ap_1 = find(Tau::Finite(1))?;
        let ap_inf = find(Tau::Inf)?;
        let pairs: Vec<(Tau, f64)> = rows.iter().map(|r| (r.tau, r.mean_ap)).collect();
        Ok(Self {
            dataset: dataset.into(),
            arch,
            tau_star: select_tau_star(&pairs)?,
            argmax_ties: argmax_ties(&pairs),
            rows,
            ap_inf,
            ap_1,
        })
    }

    /// `ap(tau*) - ap(INF)` as a fraction.
    pub fn gain(&self) -> f64 {
        self.tau_star.1 - self.ap_inf
    }
}

/// Sorted, de-duplicated grid containing both anchors, with every finite
/// `tau` below the snapshot count.
pub fn validate_grid(grid: &[Tau], num_snapshots: usize) -> Result<Vec<Tau>> {
    let mut g = grid.to_vec();
    g.sort();
    g.dedup();
    if !g.contains(&Tau::Finite(1)) || !g.contains(&Tau::Inf) {
        return Err(Error::config("the tau grid must contain both 1 and inf"));
    }
    if let Some(Tau::Finite(k)) = g.iter().rev().find(|t| !t.is_inf()) {
        if *k >= num_snapshots {
            return Err(Error::config(format!(
                "tau = {k} is not below the snapshot count {num_snapshots}"
            )));
        }
    }
    Ok(g)
}

/// `1..=min(T-1, 12)` plus `INF`.
pub fn default_grid(num_snapshots: usize) -> Vec<Tau> {
    (1..=num_snapshots.saturating_sub(1).clamp(1, 12))
        .map(Tau::Finite)
        .chain([Tau::Inf])
        .collect()
}

/// Runs `runner(tau, seed_index)` for every unit of the grid, in parallel,
/// and aggregates seed means per `tau`.
pub fn sweep_tau<F>(
    dataset: &str,
    arch: Arch,
    grid: &[Tau],
    num_snapshots: usize,
    seeds: u64,
    runner: F,
) -> Result<SweepResult>
where
    F: Fn(Tau, u64) -> Result<f64> + Sync,
{
    let grid = validate_grid(grid, num_snapshots)?;
    if seeds == 0 {
        return Err(Error::config("at least one seed is required"));
    }
    let units: Vec<(Tau, u64)> = grid
        .iter()
        .flat_map(|&t| (0..seeds).map(move |s| (t, s)))
        .collect();
    let scores = units
        .par_iter()
        .map(|&(tau, s)| runner(tau, s))
        .collect::<Result<Vec<f64>>>()?;
    let rows = grid
        .iter()
        .zip(scores.chunks(seeds as usize))
        .map(|(&tau, aps)| aggregate(tau, aps))
        .collect();
    SweepResult::from_rows(dataset, arch, rows)
}

/// Mean and population standard deviation of per-seed APs.
pub fn aggregate(tau: Tau, aps: &[f64]) -> SweepRow {
    let n = aps.len() as f64;
    // Shifted by the first value so identical seeds aggregate exactly.
    let a0 = aps.first().copied().unwrap_or(f64::NAN);
    let mean = a0 + aps.iter().map(|a| a - a0).sum::<f64>() / n;
    let var = aps.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    SweepRow {
        tau,
        mean_ap: mean,
        std_ap: var.sqrt(),
        seeds: aps.len(),
    }
}

/// Highest AP; ties go to the smallest finite `tau`, `INF` last.
pub fn select_tau_star(rows: &[(Tau, f64)]) -> Result<(Tau, f64)> {
    let mut best: Option<(Tau, f64)> = None;
    for &(tau, ap) in rows {
        best = match best {
            Some((bt, bap)) if bap > ap || (bap == ap && bt <= tau) => Some((bt, bap)),
            _ => Some((tau, ap)),
        };
    }
    best.ok_or_else(|| Error::config("cannot select tau* from an empty sweep"))
}

/// All `tau` sharing the maximum AP, in grid order.
pub fn argmax_ties(rows: &[(Tau, f64)]) -> Vec<Tau> {
    let max = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let mut t: Vec<Tau> = rows.iter().filter(|r| r.1 == max).map(|r| r.0).collect();
    t.sort();
    t
}

/// Mean over sweeps of `ap(tau*) - ap(INF)`, in AP×100 points.
pub fn avg_gain(sweeps: &[SweepResult]) -> Result<f64> {
    if sweeps.is_empty() {
        return Err(Error::config("average gain needs at least one sweep"));
    }
    Ok(100.0 * sweeps.iter().map(SweepResult::gain).sum::<f64>() / sweeps.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Degenerate(format!(
            "correlation needs two equal-length series of at least 3 values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "constant series has no correlation".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between each dataset's snapshot count and `ap(INF) - ap(1)`
/// over the sweeps of one arch.
pub fn snapshot_correlation<F>(sweeps: &[SweepResult], snapshot_count: F) -> Result<f64>
where
    F: Fn(&str) -> Option<usize>,
{
    let mut x = Vec::with_capacity(sweeps.len());
    let mut y = Vec::with_capacity(sweeps.len());
    for s in sweeps {
        let count = snapshot_count(&s.dataset)
            .ok_or_else(|| Error::config(format!("no snapshot count known for {}", s.dataset)))?;
        x.push(count as f64);
        y.push(s.ap_inf - s.ap_1);
    }
    pearson_correlation(&x, &y)
}

/// Per-arch summary across datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchAnalysis {
    pub arch: Arch,
    pub datasets: usize,
    /// AP×100 points.
    pub avg_gain: f64,
    /// `None` when the correlation is undefined (fewer than three datasets
    /// or a constant series); `note` says why.
    pub correlation: Option<f64>,
    pub note: Option<String>,
}

/// Groups sweeps by arch (in [`Arch::ALL`] order) and summarizes each group.
pub fn analyze<F>(sweeps: &[SweepResult], snapshot_count: F) -> Result<Vec<ArchAnalysis>>
where
    F: Fn(&str) -> Option<usize>,
{
    let mut out = Vec::new();
    for arch in Arch::ALL {
        let group: Vec<SweepResult> = sweeps.iter().filter(|s| s.arch == arch).cloned().collect();
        if group.is_empty() {
            continue;
        }
        let (correlation, note) = match snapshot_correlation(&group, &snapshot_count) {
            Ok(r) => (Some(r), None),
            Err(Error::Degenerate(why)) => (None, Some(why)),
            Err(e) => return Err(e),
        };
        out.push(ArchAnalysis {
            arch,
            datasets: group.len(),
            avg_gain: avg_gain(&group)?,
            correlation,
            note,
        });
    }
    Ok(out)
}

/// The published cells as sweeps with `tau` in `{1, tau*, INF}`, in
/// fraction units.
pub fn published_sweeps() -> Vec<SweepResult> {
    let mut out = Vec::new();
    for row in &fixture::PUBLISHED {
        for (k, &arch) in fixture::ARCHS.iter().enumerate() {
            let mut cells = vec![(Tau::Finite(1), row.tau_1[k]), (Tau::Inf, row.tau_inf[k])];
            let (ap, tau) = row.tau_star[k];
            // A tau* of 1 or INF repeats an anchor cell with the same value.
            if !cells.iter().any(|c| c.0 == tau) {
                cells.push((tau, ap));
            }
            let rows = cells
                .into_iter()
                .map(|(tau, ap)| SweepRow {
                    tau,
                    mean_ap: ap / 100.0,
                    std_ap: 0.0,
                    seeds: 1,
                })
                .collect();
            out.push(
                SweepResult::from_rows(row.dataset, arch, rows)
                    .expect("fixture rows hold both anchors"),
            );
        }
    }
    out
}

/// Snapshot counts of the published datasets.
pub fn published_snapshot_count(dataset: &str) -> Option<usize> {
    fixture::PUBLISHED
        .iter()
        .find(|r| r.dataset == dataset)
        .map(|r| r.snapshots)
}

#[cfg(test)]
mod tests;
