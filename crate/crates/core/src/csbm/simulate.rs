//! Forward simulation of the correlated SBM and the benchmark scenarios.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::eperpf::{check_allocation, sample_pa_gcrp, uniform_given_partition, EperpfFamily};
use crate::error::{Error, Result};
use crate::perm::Permutation;

use super::graph::{AdjacencyMatrix, Graphs, ParentMatrix};

/// How the true permutation is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationSource {
    /// Forward draw from a prior family.
    Family(EperpfFamily<f64>),
    /// Uniform among permutations with the given 0-based cycle structure.
    Partition(Vec<usize>),
    Fixed(Permutation),
}

/// How the block connection probabilities Ξ are obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockProbabilities {
    /// Entrywise Beta(a, b) draws.
    Beta { a: f64, b: f64 },
    /// A fixed symmetric `k × k` matrix indexed by cycle ordinal.
    Fixed(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n: usize,
    pub permutation: PermutationSource,
    pub xi: BlockProbabilities,
    /// Spurious-edge rate; may be 0 for noiseless data.
    pub alpha: f64,
    /// Missing-edge rate; may be 0 for noiseless data.
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub pi: Permutation,
    pub xi: Vec<Vec<f64>>,
    pub parent: ParentMatrix,
    pub graphs: Graphs,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let unit = |x: f64| (0.0..1.0).contains(&x);
        if !(unit(self.alpha) && unit(self.beta) && self.alpha < 1.0 - self.beta) {
            return Err(Error::InvalidParameter(format!(
                "noise rates need 0 ≤ α, β < 1 and α < 1 − β, got α={}, β={}",
                self.alpha, self.beta
            )));
        }
        match &self.xi {
            BlockProbabilities::Beta { a, b } if !(*a > 0.0 && *b > 0.0) => {
                return Err(Error::InvalidParameter("Beta(a, b) needs a, b > 0".into()))
            }
            BlockProbabilities::Fixed(m) => {
                for (j, row) in m.iter().enumerate() {
                    if row.len() != m.len() {
                        return Err(Error::InvalidParameter("Ξ must be square".into()));
                    }
                    for (h, &p) in row.iter().enumerate() {
                        if !(0.0..=1.0).contains(&p) || p != m[h][j] {
                            return Err(Error::InvalidParameter(
                                "Ξ must be symmetric with entries in [0, 1]".into(),
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
        match &self.permutation {
            PermutationSource::Family(f) => f.validate(),
            PermutationSource::Partition(z) if z.len() != self.n => Err(Error::SizeMismatch {
                expected: self.n,
                found: z.len(),
            }),
            PermutationSource::Partition(z) => check_allocation(z).map(|_| ()),
            PermutationSource::Fixed(p) if p.n() != self.n => Err(Error::SizeMismatch {
                expected: self.n,
                found: p.n(),
            }),
            PermutationSource::Fixed(_) => Ok(()),
        }
    }
}

fn flip<R: Rng + ?Sized>(bit: bool, alpha: f64, beta: f64, rng: &mut R) -> bool {
    if bit {
        rng.random::<f64>() >= beta
    } else {
        rng.random::<f64>() < alpha
    }
}

/// Draws `(π, Ξ, Y, Y⁽¹⁾, Y⁽²⁾)`: Y from the SBM on `z(π)`, then
/// `y⁽¹⁾_{uv}` and `y⁽²⁾_{π(u)π(v)}` as independent noisy copies of `y_{uv}`.
pub fn simulate<R: Rng + ?Sized>(spec: &SimulationSpec, rng: &mut R) -> Result<Simulation> {
    spec.validate()?;
    let n = spec.n;
    let pi = match &spec.permutation {
        PermutationSource::Family(f) => sample_pa_gcrp(f, n, rng)?,
        PermutationSource::Partition(z) => uniform_given_partition(z, rng)?,
        PermutationSource::Fixed(p) => p.clone(),
    };
    let z = pi.allocation();
    let k = z.iter().max().map_or(0, |&m| m + 1);
    let xi = match &spec.xi {
        BlockProbabilities::Beta { a, b } => {
            let dist = Beta::new(*a, *b).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut m = vec![vec![0.0; k]; k];
            for (j, h) in (0..k).flat_map(|j| (j..k).map(move |h| (j, h))) {
                let x = dist.sample(rng);
                m[j][h] = x;
                m[h][j] = x;
            }
            m
        }
        BlockProbabilities::Fixed(m) => {
            if m.len() < k {
                return Err(Error::InvalidParameter(format!(
                    "Ξ is {}×{} but the permutation has {k} cycles",
                    m.len(),
                    m.len()
                )));
            }
            m.clone()
        }
    };
    let mut parent = AdjacencyMatrix::zeros(n);
    let mut y1 = AdjacencyMatrix::zeros(n);
    let mut y2 = AdjacencyMatrix::zeros(n);
    for u in 0..n {
        for v in u + 1..n {
            let edge = rng.random::<f64>() < xi[z[u]][z[v]];
            parent.set(u, v, edge);
            y1.set(u, v, flip(edge, spec.alpha, spec.beta, rng));
            y2.set(pi.apply(u), pi.apply(v), flip(edge, spec.alpha, spec.beta, rng));
        }
    }
    Ok(Simulation {
        pi,
        xi,
        parent,
        graphs: Graphs::new(y1, y2)?,
    })
}

/// Benchmark scenarios.
pub mod scenarios {
    use super::*;

    /// Two cycles of length `n/2`, `π(i) = i + 1` within each half
    /// (wrapping), within-block probability 0.6, between 0.1, α = β = 0.05.
    pub fn two_cycle(n: usize) -> Result<SimulationSpec> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("two-cycle scenario needs even n ≥ 2, got {n}")));
        }
        let h = n / 2;
        let map: Vec<usize> = (0..n)
            .map(|i| if i < h { (i + 1) % h } else { h + (i - h + 1) % h })
            .collect();
        Ok(SimulationSpec {
            n,
            permutation: PermutationSource::Fixed(Permutation::from_vec(map)?),
            xi: BlockProbabilities::Fixed(vec![vec![0.6, 0.1], vec![0.1, 0.6]]),
            alpha: 0.05,
            beta: 0.05,
        })
    }

    /// Block sizes of the seven-community scenario at `n = 40`.
    pub const SEVEN_BLOCK_SIZES: [usize; 7] = [8, 7, 6, 6, 5, 4, 4];

    /// Seven communities with core-periphery, assortative and disassortative
    /// blocks; α = β = 0.01; π uniform given the block partition.
    pub fn seven_block() -> SimulationSpec {
        let xi = vec![
            vec![0.90, 0.60, 0.50, 0.10, 0.10, 0.10, 0.10],
            vec![0.60, 0.30, 0.10, 0.10, 0.10, 0.10, 0.10],
            vec![0.50, 0.10, 0.20, 0.10, 0.10, 0.10, 0.10],
            vec![0.10, 0.10, 0.10, 0.80, 0.10, 0.10, 0.10],
            vec![0.10, 0.10, 0.10, 0.10, 0.70, 0.10, 0.10],
            vec![0.10, 0.10, 0.10, 0.10, 0.10, 0.10, 0.80],
            vec![0.10, 0.10, 0.10, 0.10, 0.10, 0.80, 0.10],
        ];
        let z: Vec<usize> = SEVEN_BLOCK_SIZES
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
            .collect();
        SimulationSpec {
            n: z.len(),
            permutation: PermutationSource::Partition(z),
            xi: BlockProbabilities::Fixed(xi),
            alpha: 0.01,
            beta: 0.01,
        }
    }

    /// `blocks` equal-sized communities (the last absorbs the remainder),
    /// with within/between probabilities `p_in`/`p_out`.
    pub fn planted_blocks(n: usize, blocks: usize, p_in: f64, p_out: f64, alpha: f64, beta: f64) -> Result<SimulationSpec> {
        if blocks == 0 || blocks > n {
            return Err(Error::InvalidParameter(format!("need 1 ≤ blocks ≤ n, got {blocks}")));
        }
        let size = n / blocks;
        let z: Vec<usize> = (0..n).map(|u| (u / size).min(blocks - 1)).collect();
        let xi = (0..blocks)
            .map(|j| (0..blocks).map(|h| if j == h { p_in } else { p_out }).collect())
            .collect();
        Ok(SimulationSpec {
            n,
            permutation: PermutationSource::Partition(z),
            xi: BlockProbabilities::Fixed(xi),
            alpha,
            beta,
        })
    }
}
