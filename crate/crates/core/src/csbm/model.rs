//! Likelihood factors and the marginal joint density of the correlated SBM.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::eperpf::{log_eperpf_lengths, EperpfFamily};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::Real;
use crate::special::{ln_beta, log_inc_beta};

use super::counts::{block_counts, edge_exponents, BlockCounts, ExponentTally};
use super::graph::{Graphs, ParentMatrix};

/// Beta hyperparameters of the noise rates (`a0, b0` for the spurious-edge
/// rate α, `a1, b1` for the missing-edge rate β) and of the block
/// probabilities (`a_xi, b_xi`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters<T> {
    pub a0: T,
    pub b0: T,
    pub a1: T,
    pub b1: T,
    pub a_xi: T,
    pub b_xi: T,
}

impl<T: Real> Default for Hyperparameters<T> {
    fn default() -> Self {
        let one = T::one();
        Self {
            a0: one,
            b0: one,
            a1: one,
            b1: one,
            a_xi: one,
            b_xi: one,
        }
    }
}

impl<T: Real> Hyperparameters<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a0, self.b0, self.a1, self.b1, self.a_xi, self.b_xi];
        if all.iter().all(|&x| x > T::zero() && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "hyperparameters must be positive and finite: {self:?}"
            )))
        }
    }
}

/// Noise rates: α = P(observed edge | parent non-edge), β = P(observed
/// non-edge | parent edge). Both live in `(0, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Num + PartialOrd + Copy + std::fmt::Debug> NoiseRates<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        let ok = |x: T| x > T::zero() && x + x < T::one();
        if ok(alpha) && ok(beta) {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidParameter(format!(
                "noise rates must lie in (0, 1/2): alpha={alpha:?}, beta={beta:?}"
            )))
        }
    }
}

impl<T: Real> NoiseRates<T> {
    /// Log-rates indexed by tally code `2·y + y_obs`.
    pub fn log_rates(&self) -> [T; 4] {
        let one = T::one();
        [
            (one - self.alpha).ln(),
            self.alpha.ln(),
            self.beta.ln(),
            (one - self.beta).ln(),
        ]
    }
}

/// `ln p(Y | z)`: beta-binomial marginal of the SBM over block pairs `j ≤ h`.
pub fn log_marginal_sbm<T: Real>(counts: &BlockCounts, a_xi: T, b_xi: T) -> T {
    let base = ln_beta(a_xi, b_xi);
    counts.iter().fold(T::zero(), |acc, (_, _, m, mb)| {
        acc + ln_beta(a_xi + T::lit(m as f64), b_xi + T::lit(mb as f64)) - base
    })
}

/// `ln p(Y⁽¹⁾, Y⁽²⁾ | Y, π)` with α, β integrated against their truncated
/// beta priors.
pub fn log_noise_marginal<T: Real>(tally: &ExponentTally, hyper: &Hyperparameters<T>) -> Result<T> {
    let half = T::lit(0.5);
    let c = |x: u64| T::lit(x as f64);
    let alpha = log_inc_beta(half, hyper.a0 + c(tally.e_bar_total(0)), hyper.b0 + c(tally.e_total(0)))?
        - log_inc_beta(half, hyper.a0, hyper.b0)?;
    let beta = log_inc_beta(half, hyper.a1 + c(tally.e_bar_total(1)), hyper.b1 + c(tally.e_total(1)))?
        - log_inc_beta(half, hyper.a1, hyper.b1)?;
    Ok(alpha + beta)
}

/// `ln p(Y⁽¹⁾, Y⁽²⁾ | Y, π, α, β)`.
pub fn log_noise_likelihood<T: Real>(tally: &ExponentTally, noise: &NoiseRates<T>) -> T {
    let lr = noise.log_rates();
    tally
        .counts
        .iter()
        .flat_map(|layer| layer.iter().zip(lr.iter()))
        .fold(T::zero(), |acc, (&c, &r)| if c == 0 { acc } else { acc + T::lit(c as f64) * r })
}

fn check_sizes(pi: &Permutation, y: &ParentMatrix, graphs: &Graphs) -> Result<()> {
    let n = graphs.n();
    for found in [pi.n(), y.n(), graphs.y2.n()] {
        if found != n {
            return Err(Error::SizeMismatch { expected: n, found });
        }
    }
    Ok(())
}

/// `ln p(Y⁽¹⁾, Y⁽²⁾, Y, π)` with Ξ, α and β integrated out.
pub fn log_joint<T: Real>(
    pi: &Permutation,
    y: &ParentMatrix,
    graphs: &Graphs,
    family: &EperpfFamily<T>,
    hyper: &Hyperparameters<T>,
) -> Result<T> {
    check_sizes(pi, y, graphs)?;
    hyper.validate()?;
    let cycles = pi.cycles();
    let tally = edge_exponents(y, graphs, pi)?;
    let counts = block_counts(y, &cycles.z)?;
    Ok(log_noise_marginal(&tally, hyper)?
        + log_marginal_sbm(&counts, hyper.a_xi, hyper.b_xi)
        + log_eperpf_lengths(family, &cycles.c)?)
}

/// `ln p(Y⁽¹⁾, Y⁽²⁾, Y, π | α, β)` with Ξ integrated out.
pub fn log_joint_given_noise<T: Real>(
    pi: &Permutation,
    y: &ParentMatrix,
    graphs: &Graphs,
    family: &EperpfFamily<T>,
    hyper: &Hyperparameters<T>,
    noise: &NoiseRates<T>,
) -> Result<T> {
    check_sizes(pi, y, graphs)?;
    let cycles = pi.cycles();
    let tally = edge_exponents(y, graphs, pi)?;
    let counts = block_counts(y, &cycles.z)?;
    Ok(log_noise_likelihood(&tally, noise)
        + log_marginal_sbm(&counts, hyper.a_xi, hyper.b_xi)
        + log_eperpf_lengths(family, &cycles.c)?)
}

fn pow<T: Num + Copy>(x: T, k: u8) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x)
}

/// Joint law of an aligned observed pair `(y, y')` with the parent bit
/// integrated out, for block probability `xi`:
/// `(1−β)^{y+y'} β^{2−y−y'} ξ + α^{y+y'} (1−α)^{2−y−y'} (1−ξ)`.
pub fn pair_marginal_prob<T: Num + Copy>(y: u8, y_prime: u8, xi: T, noise: &NoiseRates<T>) -> T {
    let s = y + y_prime;
    let one = T::one();
    pow(one - noise.beta, s) * pow(noise.beta, 2 - s) * xi
        + pow(noise.alpha, s) * pow(one - noise.alpha, 2 - s) * (one - xi)
}

/// Conditional law of one observed bit given the parent bit.
pub fn observation_prob<T: Num + Copy>(parent: u8, observed: u8, noise: &NoiseRates<T>) -> T {
    let one = T::one();
    match (parent, observed) {
        (1, 1) => one - noise.beta,
        (1, _) => noise.beta,
        (_, 1) => noise.alpha,
        _ => one - noise.alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csbm::graph::AdjacencyMatrix;

    #[test]
    fn sbm_marginal_trivial_cases() {
        // single pair in one block, uniform prior
        let mut y = AdjacencyMatrix::zeros(2);
        y.set(0, 1, true);
        let c = block_counts(&y, &[0, 0]).unwrap();
        assert!((log_marginal_sbm(&c, 1.0f64, 1.0).exp() - 0.5).abs() < 1e-14);
        // three singletons: three independent uniform pairs
        for mask in 0..8u8 {
            let mut y = AdjacencyMatrix::zeros(3);
            for (b, (u, v)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
                y.set(u, v, mask >> b & 1 == 1);
            }
            let c = block_counts(&y, &[0, 1, 2]).unwrap();
            assert!((log_marginal_sbm(&c, 1.0f64, 1.0).exp() - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_marginal_normalizes_and_limits() {
        let noise = NoiseRates::new(0.1f64, 0.2).unwrap();
        let total: f64 = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| pair_marginal_prob(a, b, 0.3, &noise))
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
        let exact = NoiseRates { alpha: 0.0f64, beta: 0.0 };
        assert_eq!(pair_marginal_prob(1, 1, 0.3, &exact), 0.3);
        assert_eq!(pair_marginal_prob(0, 0, 0.3, &exact), 0.7);
        assert_eq!(pair_marginal_prob(0, 1, 0.3, &exact), 0.0);
    }

    #[test]
    fn noise_rates_bounds() {
        assert!(NoiseRates::new(0.5f64, 0.1).is_err());
        assert!(NoiseRates::new(0.0f64, 0.1).is_err());
        assert!(NoiseRates::new(0.49f64, 0.01).is_ok());
    }

    #[test]
    fn joint_is_invariant_under_relabeling() {
        let y = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3), (1, 3)]).unwrap();
        let y1 = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let y2 = AdjacencyMatrix::from_edges(4, &[(0, 2), (1, 3), (0, 3)]).unwrap();
        let pi = Permutation::parse_cycles("(12)(34)", 4).unwrap();
        let fam = EperpfFamily::PitmanYor { theta: 1.0f64, discount: 0.3 };
        let h = Hyperparameters::default();
        let base = log_joint(&pi, &y, &Graphs::new(y1.clone(), y2.clone()).unwrap(), &fam, &h).unwrap();
        let rho = Permutation::parse_cycles("(1423)", 4).unwrap();
        // relabel node u as ρ(u) everywhere; π becomes ρ⁻¹·π·ρ
        let pi_r = crate::perm::conjugate(&pi, &rho).unwrap();
        let g = Graphs::new(y1.relabel(&rho).unwrap(), y2.relabel(&rho).unwrap()).unwrap();
        let moved = log_joint(&pi_r, &y.relabel(&rho).unwrap(), &g, &fam, &h).unwrap();
        assert!((base - moved).abs() < 1e-12);
    }
}
