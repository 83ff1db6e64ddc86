//! Convergence diagnostics and recovery metrics.

mod density;
mod diagnostics;
mod recovery;
mod summary;
mod trace;

pub use density::{density_d, density_from_counts};
pub use diagnostics::{autocorrelation, batch_means_variance, geweke_z, iat, psrf, GEWEKE_BATCHES};
pub use recovery::{
    align_communities, align_compat, assign, empirical_memberships, l2_compat, l2_membership, permute_columns,
    RecoveryAccumulator,
};
pub use summary::{loglik_summary, mode, summarize, Interval, Metric, Report, RetainPolicy};
pub use trace::{ChainTrace, Stat, TraceRow};
