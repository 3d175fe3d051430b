//! Exchangeable random permutations, the correlated stochastic block model
//! for Bayesian graph matching, its Gibbs sampler and posterior summaries.

pub mod csbm;
pub mod eperpf;
pub mod error;
pub mod gibbs;
pub mod oracle;
pub mod perm;
pub mod scalar;
pub mod special;
pub mod summarize;

pub use error::{Error, Result};
pub use perm::{NodeSubsetPermutation, Permutation};
pub use scalar::Real;

/// Default scalar used by the samplers and the command-line tool.
pub type Scalar = f64;
pub type Family = eperpf::EperpfFamily<Scalar>;
pub type Hyperparameters = csbm::Hyperparameters<Scalar>;
pub type NoiseRates = csbm::NoiseRates<Scalar>;
