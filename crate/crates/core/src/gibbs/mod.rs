//! Node-wise blocked Gibbs sampler for the permutation, the parent network
//! and the noise rates.

pub mod archive;
pub mod blocks;
pub mod chain;
pub mod config;

pub use archive::{chain_rng, derive_seed, read_permutations, run, run_chains, run_seeded, write_permutations, Draw, DrawArchive, TraceRow};
pub use blocks::{BetaTable, BlockState};
pub use chain::{init_state, sample_theta_escobar_west, sbm_partition, ChainState};
pub use config::{GammaPrior, InitMode, SamplerConfig};
