//! The correlated stochastic block model: graphs, sufficient statistics,
//! likelihood factors and simulation.

pub mod counts;
pub mod graph;
pub mod model;
pub mod simulate;

pub use counts::{block_counts, edge_exponents, layer_exponents, tally_code, BlockCounts, ExponentTally};
pub use graph::{read_graph, write_graph, AdjacencyMatrix, GraphFormat, Graphs, ParentMatrix};
pub use model::{
    log_joint, log_joint_given_noise, log_marginal_sbm, log_noise_likelihood, log_noise_marginal,
    observation_prob, pair_marginal_prob, Hyperparameters, NoiseRates,
};
pub use simulate::{scenarios, simulate, BlockProbabilities, PermutationSource, Simulation, SimulationSpec};
