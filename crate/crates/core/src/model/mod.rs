//! Data, latent state and collapsed probabilities of the model.

mod counts;
mod enumerate;
mod labels;
mod likelihood;
mod prior;
mod tensor;
mod transitions;
mod weights;

use serde::{Deserialize, Serialize};

pub use counts::{rebuild_counts, CountCache, LinkCounts};
pub use enumerate::{
    encode_labels, enumerate_exact, flatten_labels, labels_from_flat, log_joint, ExactPosterior, MAX_STATES,
};
pub use labels::LabelState;
pub use likelihood::{collapsed_loglik, edge_predictive, edge_predictive_counts, joint_loglik, posterior_mean_compat};
pub use prior::label_log_prior;
pub use tensor::RelationTensor;
pub use transitions::Transitions;
pub use weights::{CompatibilityMatrix, GlobalWeights, Hyperparameters};

/// How memberships evolve over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// Time-varying: each node's membership at `t` is a sticky DP centred on
    /// its usage at `t - 1`.
    Mtv,
    /// Time-invariant transitions: every label is drawn from a row indexed by
    /// the previous label on the same chain.
    Mti,
}

impl std::str::FromStr for Dynamics {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mtv" => Ok(Self::Mtv),
            "mti" => Ok(Self::Mti),
            other => Err(crate::Error::InvalidArgument(format!("unknown dynamics '{other}'"))),
        }
    }
}

impl std::fmt::Display for Dynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mtv => "mtv",
            Self::Mti => "mti",
        })
    }
}
