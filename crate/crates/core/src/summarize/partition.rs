//! Partition point estimate under Binder loss.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::eperpf::canonicalize_allocation;
use crate::error::{Error, Result};

const RESTARTS: usize = 4;

/// Draw-averaged co-clustering matrix, row-major `n × n`.
pub fn coclustering(z_draws: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = match z_draws.first() {
        Some(z) => z.len(),
        None => return Err(Error::InvalidInput("no partitions supplied".into())),
    };
    let mut p = vec![0.0; n * n];
    for z in z_draws {
        if z.len() != n {
            return Err(Error::SizeMismatch { expected: n, found: z.len() });
        }
        for i in 0..n {
            for j in 0..n {
                if z[i] == z[j] {
                    p[i * n + j] += 1.0;
                }
            }
        }
    }
    let s = z_draws.len() as f64;
    p.iter_mut().for_each(|x| *x /= s);
    Ok(p)
}

/// Expected Binder loss (unit costs, pairs `i < j`) of `z` against the
/// co-clustering matrix `p`.
pub fn binder_loss(z: &[usize], p: &[f64]) -> f64 {
    let n = z.len();
    let mut loss = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let pij = p[i * n + j];
            loss += if z[i] == z[j] { 1.0 - pij } else { pij };
        }
    }
    loss
}

struct Greedy<'a> {
    n: usize,
    p: &'a [f64],
    z: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Greedy<'_> {
    /// Cost of joining each existing cluster (relative to opening a new one).
    fn best_cluster(&self, i: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (c, m) in self.members.iter().enumerate() {
            if m.is_empty() {
                continue;
            }
            let cost: f64 = m.iter().map(|&j| 1.0 - 2.0 * self.p[i * self.n + j]).sum();
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((c, cost));
            }
        }
        best.filter(|&(_, cost)| cost < 0.0).map(|(c, _)| c)
    }

    fn cost_of(&self, i: usize, c: usize) -> f64 {
        self.members[c].iter().filter(|&&j| j != i).map(|&j| 1.0 - 2.0 * self.p[i * self.n + j]).sum()
    }

    fn assign(&mut self, i: usize, c: Option<usize>) {
        let c = c.unwrap_or_else(|| match self.members.iter().position(Vec::is_empty) {
            Some(e) => e,
            None => {
                self.members.push(Vec::new());
                self.members.len() - 1
            }
        });
        self.z[i] = c;
        self.members[c].push(i);
    }

    fn unassign(&mut self, i: usize) -> usize {
        let c = self.z[i];
        self.members[c].retain(|&j| j != i);
        c
    }

    fn sweeten<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut order: Vec<usize> = (0..self.n).collect();
        loop {
            let mut moved = false;
            order.shuffle(rng);
            for &i in &order {
                let old = self.unassign(i);
                let stay = if self.members[old].is_empty() { 0.0 } else { self.cost_of(i, old) };
                let target = self.best_cluster(i);
                let cost = target.map_or(0.0, |c| self.cost_of(i, c));
                if cost < stay - 1e-12 {
                    self.assign(i, target);
                    moved = true;
                } else {
                    self.assign(i, Some(old));
                }
            }
            if !moved {
                break;
            }
        }
    }
}

/// Greedy Binder-loss partition estimate: sequential allocation in random
/// orders plus a start from the best draw, each followed by reallocation
/// passes. Labels are 0-based in order of appearance.
pub fn partition_point_estimate<R: Rng + ?Sized>(z_draws: &[Vec<usize>], rng: &mut R) -> Result<Vec<usize>> {
    let p = coclustering(z_draws)?;
    let n = z_draws[0].len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |z: Vec<usize>| {
        let z = canonicalize_allocation(&z);
        let loss = binder_loss(&z, &p);
        if best.as_ref().is_none_or(|(b, bz)| loss < *b - 1e-12 || (loss <= *b + 1e-12 && z < *bz)) {
            best = Some((loss, z));
        }
    };

    let best_draw = z_draws
        .iter()
        .map(|z| (binder_loss(z, &p), z))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, z)| z.clone())
        .expect("non-empty");
    let mut starts: Vec<Option<Vec<usize>>> = vec![Some(best_draw)];
    starts.extend((0..RESTARTS).map(|_| None));
    for start in starts {
        let mut g = Greedy { n, p: &p, z: vec![0; n], members: Vec::new() };
        match start {
            Some(z) => {
                let z = canonicalize_allocation(&z);
                let k = z.iter().max().map_or(0, |m| m + 1);
                g.members = vec![Vec::new(); k];
                for (i, &c) in z.iter().enumerate() {
                    g.assign(i, Some(c));
                }
            }
            None => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(rng);
                for &i in &order {
                    let c = g.best_cluster(i);
                    g.assign(i, c);
                }
            }
        }
        g.sweeten(rng);
        consider(g.z);
    }
    Ok(best.expect("at least one start").1)
}
