//! Exchangeable partition / permutation probability functions for the four
//! supported prior families, their sequential predictive rules, and forward
//! samplers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{NodeSubsetPermutation, Permutation};
use crate::scalar::Real;
use crate::special::{ln_gamma, log_sum_exp, sample_log_categorical};

/// Prior family over random permutations.
///
/// Serialized with an internal `family` tag, e.g.
/// `{ family = "pitman_yor", theta = 1.0, discount = 0.3 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EperpfFamily<T> {
    Dirichlet { theta: T },
    NormalizedStable { discount: T },
    PitmanYor { theta: T, discount: T },
    Gnedin { gamma: T },
}

/// Log predictive weights given the current cycle lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictiveWeights<T> {
    /// Log-probability of each single seat of cycle `j`.
    pub per_cycle: Vec<T>,
    /// Log-probability of opening a new cycle.
    pub new_cycle: T,
}

impl<T: Real> PredictiveWeights<T> {
    /// Total probability mass, `Σ_j c_j e^{per_cycle[j]} + e^{new_cycle}`.
    pub fn total(&self, lengths: &[usize]) -> T {
        lengths
            .iter()
            .zip(&self.per_cycle)
            .fold(self.new_cycle.exp(), |acc, (&c, &w)| acc + T::from_count(c) * w.exp())
    }
}

fn in_unit<T: Real>(x: T) -> bool {
    x > T::zero() && x < T::one()
}

impl<T: Real> EperpfFamily<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EperpfFamily::Dirichlet { theta } => theta > T::zero() && theta.is_finite(),
            EperpfFamily::NormalizedStable { discount } => in_unit(discount),
            EperpfFamily::PitmanYor { theta, discount } => {
                theta > T::zero() && theta.is_finite() && in_unit(discount)
            }
            EperpfFamily::Gnedin { gamma } => in_unit(gamma),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid prior parameters {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EperpfFamily::Dirichlet { .. } => "dirichlet",
            EperpfFamily::NormalizedStable { .. } => "normalized_stable",
            EperpfFamily::PitmanYor { .. } => "pitman_yor",
            EperpfFamily::Gnedin { .. } => "gnedin",
        }
    }

    /// Concentration parameter, when the family has one.
    pub fn theta(&self) -> Option<T> {
        match *self {
            EperpfFamily::Dirichlet { theta } | EperpfFamily::PitmanYor { theta, .. } => Some(theta),
            _ => None,
        }
    }

    /// Log-probability of one specific seat in a cycle of length `n_j`, when
    /// `n` elements are seated in `k` cycles.
    #[inline]
    pub fn log_seat(&self, n: usize, k: usize, n_j: usize) -> T {
        let nf = T::from_count(n);
        let nj = T::from_count(n_j);
        match *self {
            EperpfFamily::Dirichlet { theta } => -(nf + theta).ln(),
            EperpfFamily::NormalizedStable { discount } => (T::one() - discount / nj).ln() - nf.ln(),
            EperpfFamily::PitmanYor { theta, discount } => {
                (T::one() - discount / nj).ln() - (nf + theta).ln()
            }
            EperpfFamily::Gnedin { gamma } => {
                let kf = T::from_count(k);
                ((nj + T::one()) / nj).ln() + (nf - kf + gamma).ln() - nf.ln() - (nf + gamma).ln()
            }
        }
    }

    /// Log-probability of opening a new cycle with `n` elements in `k` cycles.
    #[inline]
    pub fn log_new_cycle(&self, n: usize, k: usize) -> T {
        if n == 0 {
            return T::zero();
        }
        let nf = T::from_count(n);
        let kf = T::from_count(k);
        match *self {
            EperpfFamily::Dirichlet { theta } => theta.ln() - (nf + theta).ln(),
            EperpfFamily::NormalizedStable { discount } => (kf * discount).ln() - nf.ln(),
            EperpfFamily::PitmanYor { theta, discount } => {
                (theta + kf * discount).ln() - (nf + theta).ln()
            }
            EperpfFamily::Gnedin { gamma } => {
                (kf * (kf - gamma)).ln() - nf.ln() - (nf + gamma).ln()
            }
        }
    }
}

fn check_lengths(lengths: &[usize]) -> Result<()> {
    if lengths.is_empty() || lengths.contains(&0) {
        return Err(Error::InvalidInput(format!(
            "cycle lengths must be non-empty and positive, got {lengths:?}"
        )));
    }
    Ok(())
}

/// `Σ_j [lnΓ(n_j − d) − lnΓ(1 − d)]`
fn discounted_blocks<T: Real>(lengths: &[usize], d: T) -> T {
    let base = ln_gamma(T::one() - d);
    lengths
        .iter()
        .fold(T::zero(), |acc, &c| acc + ln_gamma(T::from_count(c) - d) - base)
}

/// Log EPPF `ln φ_k^{(n)}(n_1, …, n_k)`.
pub fn log_eppf<T: Real>(family: &EperpfFamily<T>, lengths: &[usize]) -> Result<T> {
    family.validate()?;
    check_lengths(lengths)?;
    Ok(log_eppf_unchecked(family, lengths))
}

pub(crate) fn log_eppf_unchecked<T: Real>(family: &EperpfFamily<T>, lengths: &[usize]) -> T {
    let n: usize = lengths.iter().sum();
    let k = lengths.len();
    let nf = T::from_count(n);
    let kf = T::from_count(k);
    match *family {
        EperpfFamily::Dirichlet { theta } => {
            let blocks = lengths
                .iter()
                .fold(T::zero(), |acc, &c| acc + ln_gamma(T::from_count(c)));
            kf * theta.ln() + ln_gamma(theta) - ln_gamma(theta + nf) + blocks
        }
        EperpfFamily::NormalizedStable { discount } => {
            (kf - T::one()) * discount.ln() + ln_gamma(kf) - ln_gamma(nf)
                + discounted_blocks(lengths, discount)
        }
        EperpfFamily::PitmanYor { theta, discount } => {
            let mut acc = ln_gamma(theta) - ln_gamma(theta + nf);
            for i in 0..k {
                acc = acc + (theta + T::from_count(i) * discount).ln();
            }
            acc + discounted_blocks(lengths, discount)
        }
        EperpfFamily::Gnedin { gamma } => {
            let one = T::one();
            let log_v = ln_gamma(kf) + ln_gamma(kf - gamma) - ln_gamma(one - gamma)
                + ln_gamma(nf - kf + gamma)
                - ln_gamma(gamma)
                - ln_gamma(nf)
                - ln_gamma(nf + gamma)
                + ln_gamma(one + gamma);
            let blocks = lengths
                .iter()
                .fold(T::zero(), |acc, &c| acc + ln_gamma(T::from_count(c + 1)));
            log_v + blocks
        }
    }
}

/// Log EPerPF for a vector of cycle lengths: `ln φ − Σ ln (n_j − 1)!`.
pub fn log_eperpf_lengths<T: Real>(family: &EperpfFamily<T>, lengths: &[usize]) -> Result<T> {
    let eppf = log_eppf(family, lengths)?;
    Ok(eppf - lengths
        .iter()
        .fold(T::zero(), |acc, &c| acc + ln_gamma(T::from_count(c))))
}

/// `ln p(π)`.
pub fn log_eperpf<T: Real>(family: &EperpfFamily<T>, pi: &Permutation) -> Result<T> {
    log_eperpf_lengths(family, &pi.cycles().c)
}

/// Closed-form predictive weights given current cycle lengths (possibly empty).
pub fn predictive_weights<T: Real>(
    family: &EperpfFamily<T>,
    lengths: &[usize],
) -> Result<PredictiveWeights<T>> {
    family.validate()?;
    if lengths.contains(&0) {
        return Err(Error::InvalidInput(format!("zero cycle length in {lengths:?}")));
    }
    let n: usize = lengths.iter().sum();
    let k = lengths.len();
    Ok(PredictiveWeights {
        per_cycle: lengths.iter().map(|&c| family.log_seat(n, k, c)).collect(),
        new_cycle: family.log_new_cycle(n, k),
    })
}

/// Predictive weights from EPPF ratios, `(1/n_j)·φ(…, n_j+1, …)/φ(…)`.
/// Slow; kept as a cross-check of [`predictive_weights`].
pub fn predictive_weights_from_eppf<T: Real>(
    family: &EperpfFamily<T>,
    lengths: &[usize],
) -> Result<PredictiveWeights<T>> {
    family.validate()?;
    if lengths.is_empty() {
        return Ok(PredictiveWeights {
            per_cycle: Vec::new(),
            new_cycle: T::zero(),
        });
    }
    let base = log_eppf(family, lengths)?;
    let mut grown = lengths.to_vec();
    let mut per_cycle = Vec::with_capacity(lengths.len());
    for j in 0..lengths.len() {
        grown[j] += 1;
        per_cycle.push(log_eppf(family, &grown)? - base - T::from_count(lengths[j]).ln());
        grown[j] -= 1;
    }
    grown.push(1);
    let new_cycle = log_eppf(family, &grown)? - base;
    Ok(PredictiveWeights { per_cycle, new_cycle })
}

/// Forward draw of a random permutation of size `n` by sequential seating.
pub fn sample_pa_gcrp<T: Real, R: Rng + ?Sized>(
    family: &EperpfFamily<T>,
    n: usize,
    rng: &mut R,
) -> Result<Permutation> {
    family.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("permutation size must be positive".into()));
    }
    let mut perm = NodeSubsetPermutation::empty(n);
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut logw: Vec<f64> = Vec::with_capacity(n + 1);
    for m in 0..n {
        let k = members.len();
        logw.clear();
        for cycle in &members {
            let c = cycle.len();
            logw.push((family.log_seat(m, k, c) + T::from_count(c).ln()).as_f64());
        }
        logw.push(family.log_new_cycle(m, k).as_f64());
        let j = sample_log_categorical(&logw, rng)?;
        if j == k {
            perm.insert(m, m);
            members.push(vec![m]);
        } else {
            let e = members[j][rng.random_range(0..members[j].len())];
            perm.insert(m, e);
            members[j].push(m);
        }
    }
    perm.to_permutation()
}

/// Checks that `z` uses 0-based labels in order of appearance; returns `k`.
pub fn check_allocation(z: &[usize]) -> Result<usize> {
    let mut k = 0;
    for &label in z {
        if label > k {
            return Err(Error::InvalidInput(format!(
                "allocation labels must appear in order, got {z:?}"
            )));
        }
        if label == k {
            k += 1;
        }
    }
    Ok(k)
}

/// Relabels an allocation vector to 0-based labels in order of appearance.
pub fn canonicalize_allocation(z: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    z.iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Uniform draw among permutations whose cycle structure is `z`.
pub fn uniform_given_partition<R: Rng + ?Sized>(z: &[usize], rng: &mut R) -> Result<Permutation> {
    let k = check_allocation(z)?;
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (u, &label) in z.iter().enumerate() {
        blocks[label].push(u);
    }
    let mut map = vec![0; z.len()];
    for block in &mut blocks {
        block.shuffle(rng);
        for (pos, &u) in block.iter().enumerate() {
            map[u] = block[(pos + 1) % block.len()];
        }
    }
    Permutation::from_vec(map)
}

/// Log-probability of each seat/new-cycle outcome normalised, for tests and
/// diagnostics: returns `ln Σ` of the predictive mass (should be 0).
pub fn log_predictive_total<T: Real>(weights: &PredictiveWeights<T>, lengths: &[usize]) -> T {
    let mut terms: Vec<T> = lengths
        .iter()
        .zip(&weights.per_cycle)
        .map(|(&c, &w)| w + T::from_count(c).ln())
        .collect();
    terms.push(weights.new_cycle);
    log_sum_exp(&terms)
}
