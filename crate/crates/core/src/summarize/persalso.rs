//! Greedy point estimation of a permutation under posterior expected Cayley
//! loss.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eperpf::check_allocation;
use crate::error::{Error, Result};
use crate::gibbs::chain_rng;
use crate::perm::{subset_cayley, NodeSubsetPermutation, Permutation, Removal};

/// Posterior sample of permutations, stored as distinct draws with
/// multiplicities.
#[derive(Clone, Debug)]
pub struct PosteriorPermSample {
    n: usize,
    draws: Vec<Permutation>,
    unique: Vec<NodeSubsetPermutation>,
    weights: Vec<u64>,
    total: u64,
}

impl PosteriorPermSample {
    pub fn new(draws: Vec<Permutation>) -> Result<Self> {
        let n = match draws.first() {
            Some(p) => p.n(),
            None => return Err(Error::InvalidInput("posterior sample is empty".into())),
        };
        let mut index: HashMap<&[usize], usize> = HashMap::new();
        let mut firsts = Vec::new();
        let mut weights: Vec<u64> = Vec::new();
        for (s, p) in draws.iter().enumerate() {
            if p.n() != n {
                return Err(Error::SizeMismatch { expected: n, found: p.n() });
            }
            match index.get(p.as_slice()) {
                Some(&u) => weights[u] += 1,
                None => {
                    index.insert(p.as_slice(), weights.len());
                    firsts.push(s);
                    weights.push(1);
                }
            }
        }
        let unique = firsts
            .iter()
            .map(|&s| NodeSubsetPermutation::from_permutation(&draws[s]))
            .collect();
        let total = draws.len() as u64;
        Ok(Self { n, draws, unique, weights, total })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of draws `S`, repeats included.
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[Permutation] {
        &self.draws
    }

    /// Number of distinct permutations.
    pub fn distinct(&self) -> usize {
        self.unique.len()
    }

    /// `S · f_C(σ)`, the summed Cayley distance to all draws.
    pub fn cayley_sum(&self, sigma: &Permutation) -> Result<u64> {
        if sigma.n() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, found: sigma.n() });
        }
        let sigma = NodeSubsetPermutation::from_permutation(sigma);
        let mut seen = Vec::new();
        Ok(self
            .unique
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * subset_cayley(p, &sigma, &mut seen) as u64)
            .sum())
    }
}

/// Posterior expected Cayley distance `f_C(σ)`. With a budget, returns
/// `None` as soon as the running sum exceeds `S · budget`.
pub fn expected_cayley(sample: &PosteriorPermSample, sigma: &Permutation, budget: Option<f64>) -> Result<Option<f64>> {
    if sigma.n() != sample.n {
        return Err(Error::SizeMismatch { expected: sample.n, found: sigma.n() });
    }
    let sigma = NodeSubsetPermutation::from_permutation(sigma);
    let limit = budget.map(|b| b * sample.total as f64);
    let mut seen = Vec::new();
    let mut sum = 0u64;
    for (p, &w) in sample.unique.iter().zip(&sample.weights) {
        sum += w * subset_cayley(p, &sigma, &mut seen) as u64;
        if limit.is_some_and(|l| sum as f64 > l) {
            return Ok(None);
        }
    }
    Ok(Some(sum as f64 / sample.total as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummaryConfig {
    /// Cycle-rebuild repetitions per restart.
    pub n_zeal: usize,
    /// Independent restarts.
    pub n_runs: usize,
    pub seed: u64,
    /// Restrict the search to one cycle structure (see [`fast_persalso`]).
    pub fast_mode: bool,
    pub early_stopping: bool,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self { n_zeal: 10, n_runs: 8, seed: 0, fast_mode: false, early_stopping: true }
    }
}

impl SummaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one restart.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub estimate: Permutation,
    /// `S · f_C` of the estimate.
    pub sum: u64,
    /// `S · f_C` after every accepted move on full permutations, in order.
    pub accepted: Vec<u64>,
    /// Whether the restart started from the best draw instead of phase 1.
    pub from_best_draw: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersalsoOutcome {
    pub estimate: Permutation,
    pub f_c: f64,
    pub runs: Vec<RunOutcome>,
}

struct Search<'a> {
    sample: &'a PosteriorPermSample,
    samples: Vec<NodeSubsetPermutation>,
    early: bool,
    /// Block labels when the cycle structure is fixed.
    blocks: Option<&'a [usize]>,
    seen: Vec<bool>,
    freq: Vec<u64>,
    accepted: Vec<u64>,
}

impl<'a> Search<'a> {
    fn new(sample: &'a PosteriorPermSample, early: bool, blocks: Option<&'a [usize]>) -> Self {
        Self {
            sample,
            samples: sample.unique.clone(),
            early,
            blocks,
            seen: Vec::new(),
            freq: vec![0; sample.n],
            accepted: Vec::new(),
        }
    }

    /// Summed distance from the (possibly pruned) samples to σ; `None` once
    /// the partial sum reaches `bound`.
    fn sum_to(&mut self, sigma: &NodeSubsetPermutation, bound: Option<u64>) -> Option<u64> {
        let mut sum = 0;
        for (p, &w) in self.samples.iter().zip(&self.sample.weights) {
            sum += w * subset_cayley(p, sigma, &mut self.seen) as u64;
            if self.early && bound.is_some_and(|b| sum >= b) {
                return None;
            }
        }
        Some(sum)
    }

    /// Admissible images for `v` given the current support, most frequent
    /// sample image first.
    fn candidates(&mut self, current: &NodeSubsetPermutation, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = match self.blocks {
            Some(z) => {
                let mates: Vec<usize> = current.support().filter(|&u| z[u] == z[v]).collect();
                if mates.is_empty() {
                    vec![v]
                } else {
                    mates
                }
            }
            None => current.support().chain(std::iter::once(v)).collect(),
        };
        for &t in &out {
            self.freq[t] = 0;
        }
        for (p, &w) in self.samples.iter().zip(&self.sample.weights) {
            self.freq[p.apply(v)] += w;
        }
        let freq = &self.freq;
        out.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
        out
    }

    /// Inserts `v` at the best admissible seat. `incumbent` is the seat it
    /// held and its score; a seat replaces it only if strictly better.
    fn place(&mut self, current: &mut NodeSubsetPermutation, v: usize, incumbent: Option<(usize, u64)>) -> u64 {
        let order = self.candidates(current, v);
        let mut best = incumbent;
        for t in order {
            if best.is_some_and(|(bt, _)| bt == t) {
                continue;
            }
            current.insert(v, t);
            let bound = best.map(|(_, s)| s);
            let score = self.sum_to(current, bound);
            current.remove(v);
            if let Some(s) = score {
                if best.is_none_or(|(_, bs)| s < bs) {
                    best = Some((t, s));
                }
            }
        }
        let (t, s) = best.expect("at least one admissible seat");
        current.insert(v, t);
        s
    }

    /// Removes `nodes` from every sample, returning the undo records.
    fn prune(&mut self, nodes: &[usize]) -> Vec<Vec<Removal>> {
        self.samples
            .iter_mut()
            .map(|p| nodes.iter().map(|&u| p.remove(u)).collect())
            .collect()
    }

    fn unprune_last(&mut self, undo: &mut [Vec<Removal>]) {
        for (p, stack) in self.samples.iter_mut().zip(undo.iter_mut()) {
            p.restore(stack.pop().expect("matching removal"));
        }
    }

    /// Sequential construction along `rho`, last node first.
    fn initialize(&mut self, rho: &[usize]) -> NodeSubsetPermutation {
        let n = rho.len();
        let mut current = NodeSubsetPermutation::empty(n);
        let mut undo = self.prune(&rho[..n - 1]);
        current.insert(rho[n - 1], rho[n - 1]);
        for &v in rho[..n - 1].iter().rev() {
            self.unprune_last(&mut undo);
            self.place(&mut current, v, None);
        }
        current
    }

    /// Node-wise remove/re-insert passes while a pass strictly improves.
    fn sweeten<R: Rng + ?Sized>(&mut self, current: &mut NodeSubsetPermutation, mut sum: u64, rng: &mut R) -> u64 {
        let mut rho: Vec<usize> = (0..current.n()).collect();
        loop {
            let start = sum;
            rho.shuffle(rng);
            for &v in &rho {
                let old = current.remove(v).image;
                let new = self.place(current, v, Some((old, sum)));
                if new < sum {
                    sum = new;
                    self.accepted.push(sum);
                }
            }
            if sum >= start {
                return sum;
            }
        }
    }

    /// Repeated cycle rebuilds, each kept only if strictly better.
    fn zeal<R: Rng + ?Sized>(
        &mut self,
        current: &mut NodeSubsetPermutation,
        mut sum: u64,
        repeats: usize,
        rng: &mut R,
    ) -> u64 {
        for _ in 0..repeats {
            let (label, k) = current.cycle_labels();
            let j = rng.random_range(0..k);
            let mut cycle: Vec<usize> = (0..current.n()).filter(|&u| label[u] == j).collect();
            if cycle.len() < 2 {
                continue;
            }
            cycle.shuffle(rng);
            let m = cycle.len();
            let mut proposal = current.clone();
            for &u in &cycle[..m - 1] {
                proposal.remove(u);
            }
            let mut undo = self.prune(&cycle[..m - 1]);
            for &v in cycle[..m - 1].iter().rev() {
                self.unprune_last(&mut undo);
                self.place(&mut proposal, v, None);
            }
            let new = self.sum_to(&proposal, None).expect("unbounded evaluation");
            if new < sum {
                *current = proposal;
                sum = new;
                self.accepted.push(sum);
            }
        }
        sum
    }

    fn run<R: Rng + ?Sized>(mut self, start: Option<&Permutation>, n_zeal: usize, rng: &mut R) -> RunOutcome {
        let mut current = match start {
            Some(p) => NodeSubsetPermutation::from_permutation(p),
            None => {
                let mut rho: Vec<usize> = (0..self.sample.n).collect();
                rho.shuffle(rng);
                self.initialize(&rho)
            }
        };
        let sum = self.sum_to(&current, None).expect("unbounded evaluation");
        self.accepted.push(sum);
        let sum = self.sweeten(&mut current, sum, rng);
        let sum = self.zeal(&mut current, sum, n_zeal, rng);
        RunOutcome {
            estimate: current.to_permutation().expect("full support"),
            sum,
            accepted: self.accepted,
            from_best_draw: start.is_some(),
        }
    }
}

fn best_draw(sample: &PosteriorPermSample, allowed: impl Fn(&Permutation) -> bool) -> Option<&Permutation> {
    sample
        .draws
        .iter()
        .filter(|p| allowed(p))
        .map(|p| (sample.cayley_sum(p).expect("matching size"), p))
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.as_slice().cmp(b.1.as_slice())))
        .map(|(_, p)| p)
}

fn search<R: Rng + ?Sized>(
    sample: &PosteriorPermSample,
    blocks: Option<&[usize]>,
    config: &SummaryConfig,
    rng: &mut R,
) -> Result<PersalsoOutcome> {
    config.validate()?;
    let base: u64 = rng.random();
    let seed_draw = match blocks {
        Some(z) => best_draw(sample, |p| p.allocation() == z),
        None => best_draw(sample, |_| true),
    };
    let starts: Vec<Option<&Permutation>> =
        (0..config.n_runs).map(|_| None).chain(seed_draw.map(Some)).collect();
    let runs: Vec<RunOutcome> = starts
        .par_iter()
        .enumerate()
        .map(|(r, start)| {
            let mut rng = chain_rng(base, r as u64);
            Search::new(sample, config.early_stopping, blocks).run(*start, config.n_zeal, &mut rng)
        })
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| a.sum.cmp(&b.sum).then_with(|| a.estimate.as_slice().cmp(b.estimate.as_slice())))
        .expect("at least one run");
    Ok(PersalsoOutcome {
        estimate: best.estimate.clone(),
        f_c: best.sum as f64 / sample.total as f64,
        runs,
    })
}

/// Full search with restarts; also returns the per-restart outcomes.
pub fn persalso_detailed<R: Rng + ?Sized>(
    sample: &PosteriorPermSample,
    config: &SummaryConfig,
    rng: &mut R,
) -> Result<PersalsoOutcome> {
    search(sample, None, config, rng)
}

/// Point estimate `π̂` minimizing posterior expected Cayley distance
/// greedily, with its `f_C`.
pub fn persalso<R: Rng + ?Sized>(sample: &PosteriorPermSample, config: &SummaryConfig, rng: &mut R) -> Result<(Permutation, f64)> {
    let out = persalso_detailed(sample, config, rng)?;
    Ok((out.estimate, out.f_c))
}

/// Like [`persalso_detailed`] with every insertion restricted to the block of
/// the node in `z_hat`; the estimate has cycle structure `z_hat`.
pub fn fast_persalso_detailed<R: Rng + ?Sized>(
    sample: &PosteriorPermSample,
    z_hat: &[usize],
    config: &SummaryConfig,
    rng: &mut R,
) -> Result<PersalsoOutcome> {
    if z_hat.len() != sample.n {
        return Err(Error::SizeMismatch { expected: sample.n, found: z_hat.len() });
    }
    check_allocation(z_hat)?;
    search(sample, Some(z_hat), config, rng)
}

pub fn fast_persalso<R: Rng + ?Sized>(
    sample: &PosteriorPermSample,
    z_hat: &[usize],
    config: &SummaryConfig,
    rng: &mut R,
) -> Result<(Permutation, f64)> {
    let out = fast_persalso_detailed(sample, z_hat, config, rng)?;
    Ok((out.estimate, out.f_c))
}
