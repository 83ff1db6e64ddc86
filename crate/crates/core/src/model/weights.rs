use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar hyperparameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// GEM concentration of the global community weights.
    pub gamma: f64,
    /// DP concentration of the per-node memberships.
    pub alpha: f64,
    /// Sticky mass.
    pub kappa: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            alpha: 1.0,
            kappa: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && self.alpha >= 0.0
            && self.kappa >= 0.0
            && self.lambda1 > 0.0
            && self.lambda2 > 0.0
            && [self.gamma, self.alpha, self.kappa, self.lambda1, self.lambda2]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid hyperparameters {self:?}")))
        }
    }
}

/// Global community weights `beta_1..beta_K` plus the unallocated remainder,
/// together with the hyperparameters.
///
/// In truncated (finite) mode the remainder is exactly zero and no new
/// community can be opened.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalWeights {
    pub beta: Vec<f64>,
    pub remainder: f64,
    pub hyper: Hyperparameters,
}

impl GlobalWeights {
    /// `k` equal weights sharing mass with the remainder, `1/(k+1)` each.
    pub fn uniform(k: usize, hyper: Hyperparameters) -> Self {
        let w = 1.0 / (k as f64 + 1.0);
        Self {
            beta: vec![w; k],
            remainder: w,
            hyper,
        }
    }

    /// Truncated weights over exactly `beta.len()` communities; normalized here.
    pub fn truncated(beta: Vec<f64>, hyper: Hyperparameters) -> Result<Self> {
        let total: f64 = beta.iter().sum();
        if beta.is_empty() || beta.iter().any(|&b| b <= 0.0 || !b.is_finite()) {
            return Err(Error::InvalidArgument("truncated weights must be positive".into()));
        }
        Ok(Self {
            beta: beta.iter().map(|b| b / total).collect(),
            remainder: 0.0,
            hyper,
        })
    }

    /// Symmetric finite weights `1/K` (the finite-K baselines).
    pub fn symmetric(k: usize, hyper: Hyperparameters) -> Self {
        Self {
            beta: vec![1.0 / k as f64; k],
            remainder: 0.0,
            hyper,
        }
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn gamma(&self) -> f64 {
        self.hyper.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.hyper.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.hyper.kappa
    }

    /// Total prior mass `alpha * (sum beta + remainder)`.
    pub fn alpha_mass(&self) -> f64 {
        self.hyper.alpha * (self.beta.iter().sum::<f64>() + self.remainder)
    }

    /// Sticky mass per previous-time label, `kappa / (2n)`.
    pub fn sticky_unit(&self, n: usize) -> f64 {
        self.hyper.kappa / (2.0 * n as f64)
    }

    /// Splits a fraction `frac` of the remainder into a new community and
    /// returns its index.
    pub fn open_community(&mut self, frac: f64) -> usize {
        let w = frac * self.remainder;
        self.remainder -= w;
        if self.remainder <= 0.0 {
            self.remainder = f64::MIN_POSITIVE;
        }
        self.beta.push(w.max(f64::MIN_POSITIVE));
        self.beta.len() - 1
    }

    /// Keeps the listed communities; the mass of dropped ones returns to the
    /// remainder.
    pub fn keep_communities(&mut self, kept: &[usize]) {
        let dropped: f64 = self
            .beta
            .iter()
            .enumerate()
            .filter(|(k, _)| !kept.contains(k))
            .map(|(_, b)| b)
            .sum();
        self.beta = kept.iter().map(|&k| self.beta[k]).collect();
        self.remainder += dropped;
    }

    pub fn check_invariants(&self) -> Result<()> {
        self.hyper.validate()?;
        let total: f64 = self.beta.iter().sum::<f64>() + self.remainder;
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Numeric(format!("weights sum to {total}")));
        }
        if self.beta.iter().any(|&b| !(b > 0.0)) || self.remainder < 0.0 {
            return Err(Error::Numeric("non-positive community weight".into()));
        }
        Ok(())
    }
}

/// Role-compatibility matrix, `W[k][l]` the probability that a sender acting
/// in `k` links to a receiver acting in `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl CompatibilityMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::Dimension("compatibility matrix must be square".into()));
            }
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!("compatibility entry {v} outside [0,1]")));
                }
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { k, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.entries[k * self.k + l]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.k.max(1))
            .map(<[f64]>::to_vec)
            .take(self.k)
            .collect()
    }
}
