//! Agreement measures between estimates and ground truth.

use std::collections::HashMap;

use crate::csbm::{Graphs, ParentMatrix};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Normalized mutual information `2 I / (H₁ + H₂)`; 1 when both partitions
/// are trivial.
pub fn nmi(z1: &[usize], z2: &[usize]) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(Error::SizeMismatch { expected: z1.len(), found: z2.len() });
    }
    let n = z1.len() as f64;
    if z1.is_empty() {
        return Ok(1.0);
    }
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut a: HashMap<usize, f64> = HashMap::new();
    let mut b: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in z1.iter().zip(z2) {
        *joint.entry((x, y)).or_default() += 1.0;
        *a.entry(x).or_default() += 1.0;
        *b.entry(y).or_default() += 1.0;
    }
    let entropy = |m: &HashMap<usize, f64>| -> f64 { m.values().map(|&c| -(c / n) * (c / n).ln()).sum() };
    let (h1, h2) = (entropy(&a), entropy(&b));
    if h1 + h2 <= 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * (c * n / (a[&x] * b[&y])).ln())
        .sum();
    Ok((2.0 * mi / (h1 + h2)).clamp(0.0, 1.0))
}

/// `‖Y⁽¹⁾ − Y⁽²⁾_π‖_F` with `Y⁽²⁾_π[u][v] = Y⁽²⁾[π(u)][π(v)]`.
pub fn frobenius_discrepancy(graphs: &Graphs, pi: &Permutation) -> Result<f64> {
    let n = graphs.n();
    if pi.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: pi.n() });
    }
    let mut count = 0usize;
    for u in 0..n {
        for v in u + 1..n {
            if graphs.y1.get(u, v) != graphs.y2.get(pi.apply(u), pi.apply(v)) {
                count += 1;
            }
        }
    }
    Ok(((2 * count) as f64).sqrt())
}

/// Posterior edge-inclusion frequencies over pairs `u < v`, row-major.
pub fn edge_frequencies(parent_draws: &[ParentMatrix]) -> Result<Vec<f64>> {
    let n = match parent_draws.first() {
        Some(y) => y.n(),
        None => return Err(Error::InvalidInput("no parent draws supplied".into())),
    };
    let mut freq = vec![0.0; n * n.saturating_sub(1) / 2];
    for y in parent_draws {
        if y.n() != n {
            return Err(Error::SizeMismatch { expected: n, found: y.n() });
        }
        let mut idx = 0;
        for u in 0..n {
            for v in u + 1..n {
                if y.get(u, v) {
                    freq[idx] += 1.0;
                }
                idx += 1;
            }
        }
    }
    let s = parent_draws.len() as f64;
    freq.iter_mut().for_each(|f| *f /= s);
    Ok(freq)
}

/// Mann–Whitney AUC of `scores` against binary `labels`, ties counted as
/// one half. `None` when either class is empty.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // mid-ranks, 1-based
    let mut rank = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            rank[t] = mid;
        }
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return None;
    }
    let rank_sum: f64 = rank.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    Some((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// AUC of posterior edge frequencies for recovering `truth`; `Ok(None)` when
/// the truth has no edges or is complete.
pub fn auc_parent(parent_draws: &[ParentMatrix], truth: &ParentMatrix) -> Result<Option<f64>> {
    let freq = edge_frequencies(parent_draws)?;
    let n = truth.n();
    if parent_draws[0].n() != n {
        return Err(Error::SizeMismatch { expected: n, found: parent_draws[0].n() });
    }
    let labels: Vec<bool> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).map(|(u, v)| truth.get(u, v)).collect();
    Ok(auc(&freq, &labels))
}

/// Posterior mapping frequencies: entry `[u][w]` is the share of draws with
/// `π(u) = w`.
pub fn mapping_frequencies(draws: &[Permutation]) -> Result<Vec<Vec<f64>>> {
    let n = match draws.first() {
        Some(p) => p.n(),
        None => return Err(Error::InvalidInput("no draws supplied".into())),
    };
    let mut freq = vec![vec![0.0; n]; n];
    for p in draws {
        if p.n() != n {
            return Err(Error::SizeMismatch { expected: n, found: p.n() });
        }
        for (u, row) in freq.iter_mut().enumerate() {
            row[p.apply(u)] += 1.0;
        }
    }
    let s = draws.len() as f64;
    freq.iter_mut().flatten().for_each(|f| *f /= s);
    Ok(freq)
}
