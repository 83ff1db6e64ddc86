use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CompatibilityMatrix;

/// Ground-truth mixed memberships and role compatibilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// One membership distribution per node (`n x K`).
    pub membership: Vec<Vec<f64>>,
    pub compat: CompatibilityMatrix,
    pub case_id: Option<u8>,
}

/// Membership rows of the four node groups in the synthetic benchmark.
pub const GROUP_MEMBERSHIP: [[f64; 3]; 4] = [[0.8, 0.2, 0.0], [0.0, 0.8, 0.2], [0.1, 0.05, 0.85], [0.4, 0.4, 0.2]];

impl GroundTruth {
    pub fn new(membership: Vec<Vec<f64>>, compat: CompatibilityMatrix, case_id: Option<u8>) -> Result<Self> {
        let out = Self {
            membership,
            compat,
            case_id,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn k(&self) -> usize {
        self.compat.k()
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.membership.iter().enumerate() {
            if row.len() != self.compat.k() {
                return Err(Error::Dimension(format!(
                    "membership row {i} has {} entries, compatibility matrix is {}x{}",
                    row.len(),
                    self.compat.k(),
                    self.compat.k()
                )));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (sum - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "membership row {i} is not a probability vector"
                )));
            }
        }
        Ok(())
    }
}

/// The four 3x3 compatibility matrices of the synthetic benchmark.
pub fn case_matrix(case_id: u8) -> Result<CompatibilityMatrix> {
    let rows: [[f64; 3]; 3] = match case_id {
        1 => [[0.95, 0.05, 0.0], [0.05, 0.95, 0.05], [0.05, 0.0, 0.95]],
        2 => [[0.95, 0.2, 0.0], [0.05, 0.95, 0.05], [0.2, 0.0, 0.95]],
        3 => [[0.05, 0.95, 0.0], [0.05, 0.05, 0.95], [0.95, 0.0, 0.05]],
        4 => [[0.05, 0.95, 0.0], [0.2, 0.05, 0.95], [0.95, 0.0, 0.2]],
        other => {
            return Err(Error::InvalidArgument(format!(
                "compatibility case {other} not in 1..=4"
            )));
        }
    };
    CompatibilityMatrix::from_rows(&rows.map(|r| r.to_vec()))
}

/// Group of node `i` when `n` nodes are split into four equal blocks.
pub fn node_group(i: usize, n: usize) -> usize {
    i * 4 / n
}

/// Synthetic-benchmark truth for `n` nodes: groups of nodes share a
/// membership row, compatibilities from [`case_matrix`].
pub fn synthetic_truth(case_id: u8, n: usize) -> Result<GroundTruth> {
    let compat = case_matrix(case_id)?;
    let membership = (0..n).map(|i| GROUP_MEMBERSHIP[node_group(i, n)].to_vec()).collect();
    GroundTruth::new(membership, compat, Some(case_id))
}
