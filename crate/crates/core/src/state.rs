//! Mutable sampler state shared by the Gibbs and slice samplers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::HyperPriors;
use crate::model::{rebuild_counts, CountCache, Dynamics, GlobalWeights, LabelState, RelationTensor, Transitions};

/// Labels plus every cache derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub labels: LabelState,
    pub counts: CountCache,
    pub weights: GlobalWeights,
    /// Per-node transition counts, kept only for [`Dynamics::Mti`].
    pub transitions: Option<Transitions>,
    pub dynamics: Dynamics,
    /// Fixed community set: `weights.beta` never changes, no new communities.
    pub truncated: bool,
}

impl ChainState {
    /// Nonparametric state; `weights` must carry one entry per label community.
    pub fn new(data: &RelationTensor, labels: LabelState, weights: GlobalWeights, dynamics: Dynamics) -> Result<Self> {
        Self::build(data, labels, weights, dynamics, false)
    }

    /// Finite state over exactly `weights.k()` communities (remainder must be 0).
    pub fn truncated(
        data: &RelationTensor,
        labels: LabelState,
        weights: GlobalWeights,
        dynamics: Dynamics,
    ) -> Result<Self> {
        if weights.remainder != 0.0 {
            return Err(Error::InvalidArgument(
                "truncated weights must have zero remainder".into(),
            ));
        }
        Self::build(data, labels, weights, dynamics, true)
    }

    /// Random start: labels uniform over `k_init` communities, equal weights.
    pub fn initial<R: Rng + ?Sized>(
        data: &RelationTensor,
        k_init: usize,
        hyper: crate::model::Hyperparameters,
        dynamics: Dynamics,
        rng: &mut R,
    ) -> Result<Self> {
        let k_init = k_init.max(1);
        let labels = LabelState::random(data.n(), data.times(), k_init, rng);
        let mut state = Self::new(data, labels, GlobalWeights::uniform(k_init, hyper), dynamics)?;
        state.compact();
        Ok(state)
    }

    /// Random start for a finite model with symmetric weights `1/k`.
    pub fn finite<R: Rng + ?Sized>(
        data: &RelationTensor,
        k: usize,
        hyper: crate::model::Hyperparameters,
        dynamics: Dynamics,
        rng: &mut R,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "finite models need at least one community".into(),
            ));
        }
        let labels = LabelState::random(data.n(), data.times(), k, rng);
        Self::truncated(data, labels, GlobalWeights::symmetric(k, hyper), dynamics)
    }

    fn build(
        data: &RelationTensor,
        labels: LabelState,
        weights: GlobalWeights,
        dynamics: Dynamics,
        truncated: bool,
    ) -> Result<Self> {
        if weights.k() != labels.k() {
            return Err(Error::Dimension(format!(
                "{} global weights for {} label communities",
                weights.k(),
                labels.k()
            )));
        }
        weights.check_invariants()?;
        let counts = rebuild_counts(&labels, data)?;
        let transitions = (dynamics == Dynamics::Mti).then(|| Transitions::from_labels(&labels));
        Ok(Self {
            labels,
            counts,
            weights,
            transitions,
            dynamics,
            truncated,
        })
    }

    pub fn k(&self) -> usize {
        self.labels.k()
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    pub fn times(&self) -> usize {
        self.labels.times()
    }

    /// Instantiates a community taking fraction `frac` of the remainder.
    pub fn push_community(&mut self, frac: f64) -> u32 {
        let idx = self.weights.open_community(frac);
        self.counts.push_community();
        if let Some(tr) = &mut self.transitions {
            tr.push_community();
        }
        self.labels.set_k(idx + 1);
        idx as u32
    }

    /// Removes communities without labels; their weight returns to the
    /// remainder. No-op for truncated states.
    pub fn compact(&mut self) {
        if self.truncated {
            return;
        }
        let k = self.k();
        let kept = self.labels.compact();
        if kept.len() == k {
            return;
        }
        self.counts.keep_communities(&kept);
        self.weights.keep_communities(&kept);
        if let Some(tr) = &mut self.transitions {
            tr.keep_communities(&kept);
        }
    }

    /// Verifies every cache against a from-scratch rebuild.
    pub fn check(&self, data: &RelationTensor) -> Result<()> {
        let fresh = rebuild_counts(&self.labels, data)?;
        if fresh != self.counts {
            return Err(Error::Numeric("incremental counts drifted from rebuild".into()));
        }
        self.counts.check_invariants()?;
        if let Some(tr) = &self.transitions {
            if *tr != Transitions::from_labels(&self.labels) {
                return Err(Error::Numeric("transition counts drifted from rebuild".into()));
            }
        }
        if self.weights.k() != self.k() {
            return Err(Error::Numeric("weights and labels disagree on K".into()));
        }
        self.weights.check_invariants()?;
        if !self.truncated && self.labels.usage().contains(&0) {
            return Err(Error::Numeric("empty community survived compaction".into()));
        }
        Ok(())
    }
}

/// Which hyperparameters stay fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Freeze {
    pub gamma: bool,
    /// `alpha + kappa`.
    pub concentration: bool,
    /// `kappa / (alpha + kappa)`.
    pub ratio: bool,
}

impl Freeze {
    pub const ALL: Self = Self {
        gamma: true,
        concentration: true,
        ratio: true,
    };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOrder {
    /// Pairs visited in `(t, i, j)` order.
    #[default]
    Lexicographic,
    /// A fresh random permutation of pairs every sweep.
    Random,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub priors: HyperPriors,
    pub freeze: Freeze,
    pub order: SweepOrder,
}

/// What a sweep did besides moving the labels.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    pub k: usize,
    pub tables: u64,
    pub unsticky_tables: u64,
    /// The gamma update fell back to the grid sampler.
    pub gamma_fallback: bool,
    pub ratio_accepted: bool,
}
