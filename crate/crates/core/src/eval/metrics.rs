use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Average precision with deterministic tie handling.
///
/// Items are ranked by descending score. Inside a group of tied scores every
/// intra-group order is equally likely, and each group contributes its
/// expected sum of precision-at-positive. For a group of `k` items holding
/// `p` positives, preceded by `r` items holding `q` positives, slot `j`
/// (1-based) is positive with probability `p/k`, and given that, the
/// expected number of positives up to it is `q + 1 + (j-1)(p-1)/(k-1)`.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::protocol(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::protocol(format!("score {i} is NaN")));
    }
    let total_pos = labels.iter().filter(|&&l| l).count();
    if total_pos == 0 {
        return Err(Error::protocol(
            "average precision is undefined without positives",
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));

    let (mut seen, mut seen_pos) = (0usize, 0usize);
    let mut sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let mut j = i;
        while j < order.len() && scores[order[j]] == s {
            j += 1;
        }
        let k = j - i;
        let p = order[i..j].iter().filter(|&&x| labels[x]).count();
        if p > 0 {
            let frac = p as f64 / k as f64;
            let step = if k > 1 {
                (p - 1) as f64 / (k - 1) as f64
            } else {
                0.0
            };
            for slot in 1..=k {
                let expected_hits = (seen_pos + 1) as f64 + (slot - 1) as f64 * step;
                sum += frac * expected_hits / (seen + slot) as f64;
            }
        }
        seen += k;
        seen_pos += p;
        i = j;
    }
    Ok(sum / total_pos as f64)
}
