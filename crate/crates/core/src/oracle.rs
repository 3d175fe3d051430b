//! Brute-force reference computations for small sizes: enumeration of
//! permutations, exact prior and posterior tables, and BFS distances.
//!
//! Everything here is written from the definitions and deliberately avoids
//! the production formulas, so the two can be checked against each other.

use std::collections::{HashMap, VecDeque};

use crate::csbm::{AdjacencyMatrix, Graphs, Hyperparameters, NoiseRates, ParentMatrix};
use crate::eperpf::EperpfFamily;
use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const MAX_ENUMERATION: usize = 8;
pub const MAX_PRIOR_TABLE: usize = 7;
pub const MAX_POSTERIOR: usize = 4;
pub const MAX_BFS: usize = 6;

fn cap(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge { n, limit })
    } else {
        Ok(())
    }
}

/// All `n!` permutations in lexicographic one-line order.
pub fn enumerate_permutations(n: usize) -> Result<Vec<Permutation>> {
    cap(n, MAX_ENUMERATION)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation::from_vec(cur.clone())?);
        // next permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// Cycle lengths of a 0-based map, by direct traversal.
fn lengths_of(map: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; map.len()];
    let mut out = Vec::new();
    for s in 0..map.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = map[i];
            len += 1;
        }
        out.push(len);
    }
    out
}

/// Block label of every element: index of the cycle's least element among
/// cycle minima.
fn blocks_of(map: &[usize]) -> Vec<usize> {
    let n = map.len();
    let mut label = vec![usize::MAX; n];
    let mut k = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let mut i = s;
        while label[i] == usize::MAX {
            label[i] = k;
            i = map[i];
        }
        k += 1;
    }
    label
}

/// `x (x+1) ⋯ (x+m−1)`
fn rising(x: f64, m: usize) -> f64 {
    (0..m).map(|i| x + i as f64).product()
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Probability of a permutation with the given cycle lengths, from rising
/// factorials.
pub fn eperpf_probability(family: &EperpfFamily<f64>, lengths: &[usize]) -> f64 {
    let n: usize = lengths.iter().sum();
    let k = lengths.len();
    match *family {
        EperpfFamily::Dirichlet { theta } => theta.powi(k as i32) / rising(theta, n),
        EperpfFamily::NormalizedStable { discount: d } => {
            let blocks: f64 = lengths.iter().map(|&c| rising(1.0 - d, c - 1) / factorial(c - 1)).product();
            d.powi(k as i32 - 1) * factorial(k - 1) / factorial(n - 1) * blocks
        }
        EperpfFamily::PitmanYor { theta, discount: d } => {
            let head: f64 = (0..k).map(|i| theta + i as f64 * d).product();
            let blocks: f64 = lengths.iter().map(|&c| rising(1.0 - d, c - 1) / factorial(c - 1)).product();
            head / rising(theta, n) * blocks
        }
        EperpfFamily::Gnedin { gamma } => {
            let v = factorial(k - 1) * rising(1.0 - gamma, k - 1) * rising(gamma, n - k)
                / (factorial(n - 1) * rising(1.0 + gamma, n - 1));
            v * lengths.iter().map(|&c| c as f64).product::<f64>()
        }
    }
}

/// Log-probabilities over a list of permutations.
#[derive(Clone, Debug)]
pub struct ExactTable {
    pub n: usize,
    pub descriptor: String,
    pub entries: Vec<(Permutation, f64)>,
    index: HashMap<Vec<usize>, usize>,
}

impl ExactTable {
    fn new(n: usize, descriptor: String, entries: Vec<(Permutation, f64)>) -> Result<Self> {
        let total: f64 = entries.iter().map(|(_, l)| l.exp()).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("{descriptor}: table sums to {total}")));
        }
        let index = entries.iter().enumerate().map(|(i, (p, _))| (p.as_slice().to_vec(), i)).collect();
        Ok(Self { n, descriptor, entries, index })
    }

    pub fn log_prob(&self, pi: &Permutation) -> Option<f64> {
        self.index.get(pi.as_slice()).map(|&i| self.entries[i].1)
    }

    pub fn prob(&self, pi: &Permutation) -> f64 {
        self.log_prob(pi).map_or(0.0, f64::exp)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, l)| l.exp()).sum()
    }

    /// CSV rows `pi,log_prob,prob` with one-line permutations.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pi,log_prob,prob\n");
        for (p, l) in &self.entries {
            out.push_str(&format!("{},{},{}\n", p.to_one_line_string(), l, l.exp()));
        }
        out
    }
}

/// Prior pmf over all of `S_n`.
pub fn exact_prior_table(family: &EperpfFamily<f64>, n: usize) -> Result<ExactTable> {
    cap(n, MAX_PRIOR_TABLE)?;
    family.validate()?;
    let entries = enumerate_permutations(n)?
        .into_iter()
        .map(|p| {
            let l = eperpf_probability(family, &lengths_of(p.as_slice())).ln();
            (p, l)
        })
        .collect();
    ExactTable::new(n, format!("{family:?}, n = {n}"), entries)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let m = order;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫₀^{1/2} t^{a−1} (1−t)^{b−1} dt` by composite Gauss–Legendre quadrature
/// on a geometric grid (accurate for `a ≥ 1`).
pub fn truncated_beta_integral(a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(32);
    let f = |t: f64| ((a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln()).exp();
    let mut edges = vec![0.0];
    let mut x = 0.5 * 2f64.powi(-40);
    while x < 0.5 {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(0.5);
    let mut sum = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        sum += rule.iter().map(|&(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half;
    }
    sum
}

/// Pair tallies `[e₀, ē₀, ē₁, e₁]` of both layers, by direct loops.
fn tallies(pi: &Permutation, y: &ParentMatrix, graphs: &Graphs) -> [[u64; 4]; 2] {
    let n = y.n();
    let mut t = [[0u64; 4]; 2];
    for u in 0..n {
        for v in u + 1..n {
            let p = y.get(u, v);
            let o1 = graphs.y1.get(u, v);
            let o2 = graphs.y2.get(pi.apply(u), pi.apply(v));
            for (layer, o) in [(0, o1), (1, o2)] {
                let code = match (p, o) {
                    (false, false) => 0,
                    (false, true) => 1,
                    (true, false) => 2,
                    (true, true) => 3,
                };
                t[layer][code] += 1;
            }
        }
    }
    t
}

/// `p(Y | z)` from integer products.
fn sbm_probability(pi: &Permutation, y: &ParentMatrix, a: f64, b: f64) -> f64 {
    let z = blocks_of(pi.as_slice());
    let n = y.n();
    let mut counts: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for u in 0..n {
        for v in u + 1..n {
            let key = (z[u].min(z[v]), z[u].max(z[v]));
            let e = counts.entry(key).or_default();
            if y.get(u, v) {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    counts
        .values()
        .map(|&(m, mb)| rising(a, m) * rising(b, mb) / rising(a + b, m + mb))
        .product()
}

/// `p(Y⁽¹⁾, Y⁽²⁾, Y, π)` (noise integrated out) or
/// `p(Y⁽¹⁾, Y⁽²⁾, Y, π | α, β)` when `noise` is given.
pub fn joint_probability(
    pi: &Permutation,
    y: &ParentMatrix,
    graphs: &Graphs,
    family: &EperpfFamily<f64>,
    hyper: &Hyperparameters<f64>,
    noise: Option<&NoiseRates<f64>>,
) -> f64 {
    let t = tallies(pi, y, graphs);
    let c = |code: usize| t[0][code] + t[1][code];
    let (e0, eb0, eb1, e1) = (c(0) as f64, c(1) as f64, c(2) as f64, c(3) as f64);
    let noise_part = match noise {
        Some(r) => {
            r.alpha.powf(eb0) * (1.0 - r.alpha).powf(e0) * r.beta.powf(eb1) * (1.0 - r.beta).powf(e1)
        }
        None => {
            truncated_beta_integral(hyper.a0 + eb0, hyper.b0 + e0) / truncated_beta_integral(hyper.a0, hyper.b0)
                * truncated_beta_integral(hyper.a1 + eb1, hyper.b1 + e1)
                / truncated_beta_integral(hyper.a1, hyper.b1)
        }
    };
    eperpf_probability(family, &lengths_of(pi.as_slice()))
        * sbm_probability(pi, y, hyper.a_xi, hyper.b_xi)
        * noise_part
}

/// All symmetric zero-diagonal 0/1 matrices of size `n`.
pub fn enumerate_parents(n: usize) -> Result<Vec<ParentMatrix>> {
    cap(n, MAX_POSTERIOR)?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Ok((0..1u32 << pairs.len())
        .map(|mask| {
            let mut y = AdjacencyMatrix::zeros(n);
            for (b, &(u, v)) in pairs.iter().enumerate() {
                y.set(u, v, mask >> b & 1 == 1);
            }
            y
        })
        .collect())
}

/// Exact joint posterior over `(π, Y)` with noise rates integrated out.
pub fn exact_joint_posterior(
    graphs: &Graphs,
    family: &EperpfFamily<f64>,
    hyper: &Hyperparameters<f64>,
) -> Result<Vec<(Permutation, ParentMatrix, f64)>> {
    let n = graphs.n();
    cap(n, MAX_POSTERIOR)?;
    let parents = enumerate_parents(n)?;
    let mut out = Vec::new();
    for pi in enumerate_permutations(n)? {
        for y in &parents {
            let p = joint_probability(&pi, y, graphs, family, hyper, None);
            out.push((pi.clone(), y.clone(), p));
        }
    }
    let total: f64 = out.iter().map(|e| e.2).sum();
    out.iter_mut().for_each(|e| e.2 /= total);
    Ok(out)
}

/// Exact posterior of π with the parent and noise rates summed out.
pub fn exact_posterior_table(
    graphs: &Graphs,
    family: &EperpfFamily<f64>,
    hyper: &Hyperparameters<f64>,
) -> Result<ExactTable> {
    let joint = exact_joint_posterior(graphs, family, hyper)?;
    let mut mass: Vec<(Permutation, f64)> = Vec::new();
    for (pi, _, p) in joint {
        match mass.last_mut() {
            Some((q, m)) if *q == pi => *m += p,
            _ => mass.push((pi, p)),
        }
    }
    let entries = mass.into_iter().map(|(p, m)| (p, m.ln())).collect();
    ExactTable::new(graphs.n(), format!("posterior, {family:?}"), entries)
}

/// `π` with `v` spliced out of its cycle, `v` left as a fixed point.
fn splice_out(map: &[usize], v: usize) -> Vec<usize> {
    let mut m = map.to_vec();
    if let Some(pre) = m.iter().position(|&x| x == v) {
        m[pre] = map[v];
    }
    m[v] = v;
    m
}

/// Conditional law of π over the permutations that agree with `pi` once
/// `v` is deleted, everything else fixed.
#[allow(clippy::too_many_arguments)]
pub fn node_move_oracle(
    pi: &Permutation,
    v: usize,
    y: &ParentMatrix,
    graphs: &Graphs,
    family: &EperpfFamily<f64>,
    hyper: &Hyperparameters<f64>,
    noise: &NoiseRates<f64>,
) -> Result<Vec<(Permutation, f64)>> {
    let n = pi.n();
    cap(n, MAX_ENUMERATION)?;
    let base = splice_out(pi.as_slice(), v);
    let mut out: Vec<(Permutation, f64)> = enumerate_permutations(n)?
        .into_iter()
        .filter(|c| splice_out(c.as_slice(), v) == base)
        .map(|c| {
            let w = joint_probability(&c, y, graphs, family, hyper, Some(noise));
            (c, w)
        })
        .collect();
    let total: f64 = out.iter().map(|e| e.1).sum();
    out.iter_mut().for_each(|e| e.1 /= total);
    Ok(out)
}

/// Conditional law of row `v` of the parent over all `2^{n−1}` settings,
/// everything else fixed. Rows are returned as matrices.
pub fn parent_row_oracle(
    pi: &Permutation,
    v: usize,
    y: &ParentMatrix,
    graphs: &Graphs,
    family: &EperpfFamily<f64>,
    hyper: &Hyperparameters<f64>,
    noise: &NoiseRates<f64>,
) -> Result<Vec<(ParentMatrix, f64)>> {
    let n = y.n();
    cap(n, 12)?;
    let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
    let mut out = Vec::with_capacity(1 << others.len());
    for mask in 0..1u32 << others.len() {
        let mut row = y.clone();
        for (b, &u) in others.iter().enumerate() {
            row.set(v, u, mask >> b & 1 == 1);
        }
        let w = joint_probability(pi, &row, graphs, family, hyper, Some(noise));
        out.push((row, w));
    }
    let total: f64 = out.iter().map(|e| e.1).sum();
    out.iter_mut().for_each(|e| e.1 /= total);
    Ok(out)
}

/// Fewest transpositions turning `pi` into `sigma`, by breadth-first search.
pub fn cayley_bfs(pi: &Permutation, sigma: &Permutation) -> Result<usize> {
    let n = pi.n();
    cap(n, MAX_BFS)?;
    if sigma.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: sigma.n() });
    }
    let target = sigma.as_slice().to_vec();
    let mut dist: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(pi.as_slice().to_vec(), 0);
    queue.push_back(pi.as_slice().to_vec());
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        if cur == target {
            return Ok(d);
        }
        for i in 0..n {
            for j in i + 1..n {
                let mut next = cur.clone();
                next.swap(i, j);
                if !dist.contains_key(&next) {
                    dist.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    unreachable!("the transpositions generate the symmetric group")
}
