//! Chain state and the individual Gibbs updates.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::csbm::{
    block_counts, edge_exponents, log_noise_marginal, tally_code, AdjacencyMatrix, ExponentTally, Graphs,
    Hyperparameters, NoiseRates, ParentMatrix,
};
use crate::eperpf::{log_eperpf_lengths, sample_pa_gcrp, uniform_given_partition, EperpfFamily};
use crate::error::{Error, Result};
use crate::perm::{NodeSubsetPermutation, Permutation};
use crate::special::{sample_log_categorical, sample_truncated_beta};

use super::blocks::{BetaTable, BlockState};
use super::config::{GammaPrior, InitMode, SamplerConfig};

/// Full state of one chain: π (with inverse), parent network, noise rates,
/// prior parameters and the cached sufficient statistics.
#[derive(Clone, Debug)]
pub struct ChainState {
    perm: NodeSubsetPermutation,
    parent: ParentMatrix,
    noise: NoiseRates<f64>,
    family: EperpfFamily<f64>,
    hyper: Hyperparameters<f64>,
    blocks: BlockState,
    tally: ExponentTally,
    table: BetaTable,
    profile: Vec<u64>,
}

/// The candidate set of one node move after `v` has been taken out.
struct MoveCandidates {
    old_target: usize,
    targets: Vec<usize>,
    log_weights: Vec<f64>,
}

impl ChainState {
    /// Assembles a state from its parts, computing all cached statistics.
    pub fn new(
        pi: &Permutation,
        parent: ParentMatrix,
        noise: NoiseRates<f64>,
        family: EperpfFamily<f64>,
        hyper: Hyperparameters<f64>,
        graphs: &Graphs,
    ) -> Result<Self> {
        let n = graphs.n();
        for found in [pi.n(), parent.n()] {
            if found != n {
                return Err(Error::SizeMismatch { expected: n, found });
            }
        }
        family.validate()?;
        hyper.validate()?;
        let blocks = BlockState::from_allocation(&parent, &pi.allocation());
        let tally = edge_exponents(&parent, graphs, pi)?;
        let max_pairs = n * n.saturating_sub(1) / 2;
        Ok(Self {
            perm: NodeSubsetPermutation::from_permutation(pi),
            parent,
            noise,
            family,
            hyper,
            blocks,
            tally,
            table: BetaTable::new(hyper.a_xi, hyper.b_xi, max_pairs),
            profile: vec![0; n],
        })
    }

    pub fn n(&self) -> usize {
        self.perm.n()
    }

    pub fn pi(&self) -> Permutation {
        self.perm.to_permutation().expect("chain permutation has full support")
    }

    pub fn parent(&self) -> &ParentMatrix {
        &self.parent
    }

    pub fn noise(&self) -> NoiseRates<f64> {
        self.noise
    }

    pub fn set_noise(&mut self, noise: NoiseRates<f64>) {
        self.noise = noise;
    }

    pub fn family(&self) -> &EperpfFamily<f64> {
        &self.family
    }

    pub fn tally(&self) -> &ExponentTally {
        &self.tally
    }

    /// Number of cycles of π.
    pub fn k(&self) -> usize {
        self.blocks.k()
    }

    /// Cycle structure of π, labels in order of appearance.
    pub fn allocation(&self) -> Vec<usize> {
        self.blocks.allocation()
    }

    /// `ln p(Y⁽¹⁾, Y⁽²⁾, Y, π)` with Ξ, α, β integrated out, from the cached
    /// statistics.
    pub fn log_joint(&self) -> Result<f64> {
        Ok(log_noise_marginal(&self.tally, &self.hyper)?
            + self.table.log_marginal(&self.blocks)
            + log_eperpf_lengths(&self.family, &self.blocks.lengths())?)
    }

    /// Compares the cached statistics with a from-scratch recomputation.
    pub fn check_consistency(&self, graphs: &Graphs) -> Result<()> {
        let pi = self.pi();
        let tally = edge_exponents(&self.parent, graphs, &pi)?;
        if tally != self.tally {
            return Err(Error::Inconsistent(format!(
                "exponent tallies drifted: cached {:?}, recomputed {:?}",
                self.tally, tally
            )));
        }
        let z = pi.allocation();
        if z != self.blocks.allocation() {
            return Err(Error::Inconsistent("block memberships drifted from the cycles of π".into()));
        }
        if block_counts(&self.parent, &z)? != self.blocks.to_block_counts() {
            return Err(Error::Inconsistent("block edge counts drifted".into()));
        }
        Ok(())
    }

    /// Change in the layer-2 tally when `v` (currently removed) is inserted
    /// with image `target`, relative to the tally of the current σ.
    fn layer2_delta(&self, v: usize, target: usize, graphs: &Graphs) -> [i64; 4] {
        let n = self.n();
        let y = &self.parent;
        let y2 = &graphs.y2;
        let sigma = &self.perm;
        let mut d = [0i64; 4];
        if target == v {
            let yv = y.row(v);
            let y2v = y2.row(v);
            for x in (0..n).filter(|&x| x != v) {
                d[tally_code(yv[x], y2v[sigma.apply(x)])] += 1;
            }
        } else {
            let w = sigma.apply_inverse(target);
            let yv = y.row(v);
            let yw = y.row(w);
            let y2t = y2.row(target);
            let y2v = y2.row(v);
            for x in (0..n).filter(|&x| x != v) {
                let image = if x == w { v } else { sigma.apply(x) };
                d[tally_code(yv[x], y2t[image])] += 1;
                if x != w {
                    let sx = sigma.apply(x);
                    d[tally_code(yw[x], y2v[sx])] += 1;
                    d[tally_code(yw[x], y2t[sx])] -= 1;
                }
            }
        }
        d
    }

    /// Removes `v` and scores every way of putting it back.
    fn prepare_move(&mut self, v: usize, graphs: &Graphs) -> MoveCandidates {
        let n = self.n();
        let old_target = self.perm.apply(v);
        self.blocks.detach(v, &self.parent);
        self.perm.remove(v);

        let lr = self.noise.log_rates();
        self.blocks.edge_profile(v, &self.parent, &mut self.profile);
        let n_rest = n - 1;
        let k = self.blocks.k();
        // per-slot SBM and prior scores
        let mut slot_score = vec![0.0; n];
        for &j in self.blocks.active() {
            slot_score[j] = self.table.join_delta(&self.blocks, &self.profile, Some(j))
                + self.family.log_seat(n_rest, k, self.blocks.size(j));
        }
        let new_score =
            self.table.join_delta(&self.blocks, &self.profile, None) + self.family.log_new_cycle(n_rest, k);

        let mut targets = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        for target in (0..n).filter(|&u| u != v).chain(std::iter::once(v)) {
            let d = self.layer2_delta(v, target, graphs);
            let ll: f64 = d.iter().zip(lr.iter()).map(|(&c, &r)| if c == 0 { 0.0 } else { c as f64 * r }).sum();
            let prior = if target == v { new_score } else { slot_score[self.blocks.slot_of(target)] };
            targets.push(target);
            log_weights.push(ll + prior);
        }
        MoveCandidates { old_target, targets, log_weights }
    }

    /// Inserts `v` with image `target` and updates the caches.
    fn finish_move(&mut self, v: usize, old_target: usize, target: usize, graphs: &Graphs) {
        if target != old_target {
            let d_old = self.layer2_delta(v, old_target, graphs);
            let d_new = self.layer2_delta(v, target, graphs);
            for c in 0..4 {
                let updated = self.tally.counts[1][c] as i64 - d_old[c] + d_new[c];
                debug_assert!(updated >= 0);
                self.tally.counts[1][c] = updated as u64;
            }
        }
        let slot = if target == v {
            self.blocks.open_slot()
        } else {
            self.blocks.slot_of(target)
        };
        self.perm.insert(v, target);
        self.blocks.attach(v, slot, &self.parent);
    }

    /// Exact Gibbs draw of π among the permutations that agree with the
    /// current one once `v` is deleted.
    pub fn node_move<R: Rng + ?Sized>(&mut self, v: usize, graphs: &Graphs, rng: &mut R) -> Result<()> {
        let cand = self.prepare_move(v, graphs);
        let idx = match sample_log_categorical(&cand.log_weights, rng) {
            Ok(i) => i,
            Err(e) => {
                self.finish_move(v, cand.old_target, cand.old_target, graphs);
                return Err(e);
            }
        };
        self.finish_move(v, cand.old_target, cand.targets[idx], graphs);
        Ok(())
    }

    /// The full conditional that [`node_move`](Self::node_move) samples from,
    /// as `(candidate, probability)` pairs. Leaves the state unchanged.
    pub fn node_move_distribution(&mut self, v: usize, graphs: &Graphs) -> Vec<(Permutation, f64)> {
        let cand = self.prepare_move(v, graphs);
        let max = cand.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = cand.log_weights.iter().map(|w| (w - max).exp()).sum();
        let out = cand
            .targets
            .iter()
            .zip(&cand.log_weights)
            .map(|(&t, &w)| {
                let mut p = self.perm.clone();
                p.insert(v, t);
                (p.to_permutation().expect("full support"), (w - max).exp() / total)
            })
            .collect();
        self.finish_move(v, cand.old_target, cand.old_target, graphs);
        out
    }

    /// `P(y_{vu} = 1 | all other parent entries, π, α, β, graphs)`.
    pub fn parent_edge_probability(&self, v: usize, u: usize, graphs: &Graphs) -> f64 {
        let (lp0, lp1) = self.parent_log_odds_terms(v, u, graphs);
        1.0 / (1.0 + (lp0 - lp1).exp())
    }

    fn parent_log_odds_terms(&self, v: usize, u: usize, graphs: &Graphs) -> (f64, f64) {
        let b = self.parent.bit(v, u) as u64;
        let (lv, lu) = (self.blocks.slot_of(v), self.blocks.slot_of(u));
        let m = self.blocks.edges(lv, lu) - b;
        let m_bar = self.blocks.pairs(lv, lu) - 1 - m;
        let s = (graphs.y1.bit(v, u) + graphs.y2.bit(self.perm.apply(v), self.perm.apply(u))) as f64;
        let NoiseRates { alpha, beta } = self.noise;
        let lp1 = s * (-beta).ln_1p() + (2.0 - s) * beta.ln() + (self.hyper.a_xi + m as f64).ln();
        let lp0 = s * alpha.ln() + (2.0 - s) * (-alpha).ln_1p() + (self.hyper.b_xi + m_bar as f64).ln();
        (lp0, lp1)
    }

    /// Sequentially resamples `y_{vu}` for every `u ≠ v` in ascending order,
    /// each from its exact full conditional.
    pub fn parent_row_update<R: Rng + ?Sized>(&mut self, v: usize, graphs: &Graphs, rng: &mut R) {
        let pv = self.perm.apply(v);
        for u in (0..self.n()).filter(|&u| u != v) {
            let (lp0, lp1) = self.parent_log_odds_terms(v, u, graphs);
            let p1 = 1.0 / (1.0 + (lp0 - lp1).exp());
            let new = rng.random::<f64>() < p1;
            let old = self.parent.get(v, u);
            if new != old {
                let o1 = graphs.y1.bit(v, u);
                let o2 = graphs.y2.bit(pv, self.perm.apply(u));
                let (ob, nb) = (old as u8, new as u8);
                self.tally.counts[0][tally_code(ob, o1)] -= 1;
                self.tally.counts[0][tally_code(nb, o1)] += 1;
                self.tally.counts[1][tally_code(ob, o2)] -= 1;
                self.tally.counts[1][tally_code(nb, o2)] += 1;
                self.parent.set(v, u, new);
                self.blocks.flip_edge(v, u, new);
            }
        }
    }

    /// Redraws α and β from their truncated-beta full conditionals.
    pub fn noise_update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let h = &self.hyper;
        let t = &self.tally;
        let alpha = sample_truncated_beta(0.5, h.a0 + t.e_bar_total(0) as f64, h.b0 + t.e_total(0) as f64, rng)?;
        let beta = sample_truncated_beta(0.5, h.a1 + t.e_bar_total(1) as f64, h.b1 + t.e_total(1) as f64, rng)?;
        self.noise = NoiseRates { alpha, beta };
        Ok(())
    }

    /// Escobar–West update of the Dirichlet concentration. Other families
    /// have no registered update; the call is a no-op and returns `false`.
    pub fn theta_update<R: Rng + ?Sized>(&mut self, prior: &GammaPrior, rng: &mut R) -> Result<bool> {
        match self.family {
            EperpfFamily::Dirichlet { theta } => {
                let theta = sample_theta_escobar_west(theta, self.k(), self.n(), prior, rng)?;
                self.family = EperpfFamily::Dirichlet { theta };
                Ok(true)
            }
            _ => {
                log::warn!("no concentration update for the {} family; skipped", self.family.name());
                Ok(false)
            }
        }
    }
}

/// One Escobar–West augmentation step for θ given `k` cycles over `n` nodes.
pub fn sample_theta_escobar_west<R: Rng + ?Sized>(
    theta: f64,
    k: usize,
    n: usize,
    prior: &GammaPrior,
    rng: &mut R,
) -> Result<f64> {
    let err = |e: &dyn std::fmt::Display| Error::Numerical(e.to_string());
    let eta = Beta::new(theta + 1.0, n as f64).map_err(|e| err(&e))?.sample(rng);
    let rate = prior.rate - eta.ln();
    let k = k as f64;
    let odds = (prior.shape + k - 1.0) / (n as f64 * rate);
    let shape = if rng.random::<f64>() < odds / (1.0 + odds) {
        prior.shape + k
    } else {
        prior.shape + k - 1.0
    };
    let theta = Gamma::new(shape, 1.0 / rate).map_err(|e| err(&e))?.sample(rng);
    Ok(theta.max(f64::MIN_POSITIVE))
}

/// Collapsed Gibbs sampler for an SBM partition of `y` under the prior
/// family's partition law; returns the final allocation.
pub fn sbm_partition<R: Rng + ?Sized>(
    y: &AdjacencyMatrix,
    family: &EperpfFamily<f64>,
    a_xi: f64,
    b_xi: f64,
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = y.n();
    let start = sample_pa_gcrp(family, n, rng)?.allocation();
    let mut blocks = BlockState::from_allocation(y, &start);
    let table = BetaTable::new(a_xi, b_xi, n * n.saturating_sub(1) / 2);
    let mut profile = vec![0u64; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut slots = Vec::with_capacity(n + 1);
    let mut logw = Vec::with_capacity(n + 1);
    for _ in 0..sweeps {
        order.shuffle(rng);
        for &v in &order {
            blocks.detach(v, y);
            blocks.edge_profile(v, y, &mut profile);
            let (rest, k) = (n - 1, blocks.k());
            slots.clear();
            logw.clear();
            for &j in blocks.active() {
                let size = blocks.size(j);
                slots.push(Some(j));
                logw.push(
                    (size as f64).ln() + family.log_seat(rest, k, size) + table.join_delta(&blocks, &profile, Some(j)),
                );
            }
            slots.push(None);
            logw.push(family.log_new_cycle(rest, k) + table.join_delta(&blocks, &profile, None));
            let pick = sample_log_categorical(&logw, rng)?;
            let slot = slots[pick].unwrap_or_else(|| blocks.open_slot());
            blocks.attach(v, slot, y);
        }
    }
    Ok(blocks.allocation())
}

/// Builds the starting state of a chain.
pub fn init_state<R: Rng + ?Sized>(graphs: &Graphs, config: &SamplerConfig, rng: &mut R) -> Result<ChainState> {
    config.validate()?;
    let n = graphs.n();
    if n == 0 {
        return Err(Error::InvalidInput("graphs have no nodes".into()));
    }
    let pi = match config.init {
        InitMode::Identity => Permutation::identity(n),
        InitMode::Random => sample_pa_gcrp(&config.prior, n, rng)?,
        InitMode::Sbm => {
            let z = sbm_partition(
                &graphs.y1,
                &config.prior,
                config.hyper.a_xi,
                config.hyper.b_xi,
                config.init_sweeps,
                rng,
            )?;
            uniform_given_partition(&z, rng)?
        }
    };
    let mut parent = AdjacencyMatrix::zeros(n);
    for u in 0..n {
        for v in u + 1..n {
            let agree = graphs.y1.bit(u, v) + graphs.y2.bit(pi.apply(u), pi.apply(v));
            let edge = match agree {
                0 => false,
                2 => true,
                _ => rng.random::<bool>(),
            };
            parent.set(u, v, edge);
        }
    }
    let h = &config.hyper;
    let noise = NoiseRates {
        alpha: sample_truncated_beta(0.5, h.a0, h.b0, rng)?,
        beta: sample_truncated_beta(0.5, h.a1, h.b1, rng)?,
    };
    ChainState::new(&pi, parent, noise, config.prior, config.hyper, graphs)
}
