//! Posterior summaries: permutation and partition point estimates and
//! evaluation metrics.

pub mod metrics;
pub mod partition;
pub mod persalso;

pub use metrics::{auc, auc_parent, edge_frequencies, frobenius_discrepancy, mapping_frequencies, nmi};
pub use partition::{binder_loss, coclustering, partition_point_estimate};
pub use persalso::{
    expected_cayley, fast_persalso, fast_persalso_detailed, persalso, persalso_detailed, PersalsoOutcome,
    PosteriorPermSample, RunOutcome, SummaryConfig,
};
