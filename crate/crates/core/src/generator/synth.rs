use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generator::GroundTruth;
use crate::math::{beta_variate, dirichlet_variate, sample_weights};
use crate::model::{CompatibilityMatrix, GlobalWeights, Hyperparameters, LabelState, RelationTensor};

/// Remaining stick mass at which prior simulation stops breaking.
pub const STICK_TOLERANCE: f64 = 1e-12;

const MAX_STICKS: usize = 1 << 16;

/// A dataset together with whatever is known about how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub data: RelationTensor,
    pub truth: Option<GroundTruth>,
    /// Node names, empty when the source has none.
    pub node_labels: Vec<String>,
    /// Time-step names, empty when the source has none.
    pub time_labels: Vec<String>,
    /// Realized latent variables of a simulated dataset; never persisted.
    pub latent: Option<LatentDraw>,
}

impl DatasetBundle {
    pub fn new(name: impl Into<String>, data: RelationTensor) -> Self {
        Self {
            name: name.into(),
            data,
            truth: None,
            node_labels: Vec::new(),
            time_labels: Vec::new(),
            latent: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.data.n();
        if let Some(truth) = &self.truth {
            truth.validate()?;
            if truth.n() != n {
                return Err(Error::Dimension(format!(
                    "truth covers {} nodes, data has {n}",
                    truth.n()
                )));
            }
        }
        if !self.node_labels.is_empty() && self.node_labels.len() != n {
            return Err(Error::Dimension(format!(
                "{} node labels for {n} nodes",
                self.node_labels.len()
            )));
        }
        if !self.time_labels.is_empty() && self.time_labels.len() != self.data.times() {
            return Err(Error::Dimension(format!(
                "{} time labels for {} time steps",
                self.time_labels.len(),
                self.data.times()
            )));
        }
        Ok(())
    }
}

/// Latent state behind a simulated dataset (communities compacted to those used).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDraw {
    pub labels: LabelState,
    pub compat: CompatibilityMatrix,
    /// Global weights of the used communities (prior draws only).
    pub weights: Option<GlobalWeights>,
}

/// Fixed-parameter simulation: for each ordered pair and time, the sender
/// label comes from the sender's membership row, the receiver label from the
/// receiver's row, and the edge is `Bernoulli(W[s][r])`.
pub fn generate_fixed(truth: &GroundTruth, n: usize, t: usize, seed: u64) -> Result<DatasetBundle> {
    truth.validate()?;
    if truth.n() != n {
        return Err(Error::Dimension(format!(
            "truth has {} membership rows, n = {n}",
            truth.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = LabelState::single(n, t);
    labels.set_k(truth.k());
    let mut data = RelationTensor::zeros(n, t);
    for (i, j, tt) in data.clone().pairs() {
        let s = sample_weights(&truth.membership[i], &mut rng);
        let r = sample_weights(&truth.membership[j], &mut rng);
        labels.set(i, j, tt, s as u32, r as u32);
        data.set(i, j, tt, rng.random_bool(truth.compat.get(s, r)));
    }
    let name = match truth.case_id {
        Some(c) => format!("synthetic-case{c}"),
        None => "synthetic".to_string(),
    };
    Ok(DatasetBundle {
        name,
        data,
        truth: Some(truth.clone()),
        node_labels: Vec::new(),
        time_labels: Vec::new(),
        latent: Some(LatentDraw {
            labels,
            compat: truth.compat.clone(),
            weights: None,
        }),
    })
}

/// `GEM(gamma)` sticks, broken until the remainder drops below
/// [`STICK_TOLERANCE`].
pub fn gem_sticks<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let mut sticks = Vec::new();
    let mut rest = 1.0;
    while rest >= STICK_TOLERANCE && sticks.len() < MAX_STICKS {
        let v = beta_variate(1.0, gamma, rng);
        sticks.push(rest * v);
        rest *= 1.0 - v;
    }
    (sticks, rest)
}

/// Prior draw from the time-varying model.
pub fn generate_mtv(n: usize, t: usize, hyper: &Hyperparameters, seed: u64) -> Result<DatasetBundle> {
    hyper.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (beta, rest) = gem_sticks(hyper.gamma, &mut rng);
    let atoms = beta.len();
    let unit = hyper.kappa / (2.0 * n as f64);
    let base: Vec<f64> = beta.iter().map(|b| hyper.alpha * b).collect();
    let mut labels = LabelState::single(n, t);
    labels.set_k(atoms);
    let mut prev = vec![vec![0u32; atoms]; n];
    let mut pi = Vec::new();
    let mut params = vec![0.0; atoms];
    for tt in 0..t {
        let mut rows = Vec::with_capacity(n);
        for prev_row in &prev {
            for k in 0..atoms {
                params[k] = base[k] + if tt > 0 { unit * prev_row[k] as f64 } else { 0.0 };
            }
            dirichlet_variate(&params, &mut rng, &mut pi);
            rows.push(pi.clone());
        }
        let mut now = vec![vec![0u32; atoms]; n];
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let s = sample_weights(&rows[i], &mut rng);
                let r = sample_weights(&rows[j], &mut rng);
                labels.set(i, j, tt, s as u32, r as u32);
                now[i][s] += 1;
                now[j][r] += 1;
            }
        }
        prev = now;
    }
    finish_prior_draw("mtv-prior", labels, beta, rest, hyper, &mut rng)
}

/// Prior draw from the time-invariant model: each node keeps an initial
/// distribution (no sticky mass) and one distribution per previous label
/// `c`, drawn from `Dir(alpha * beta + kappa * e_c)`.
pub fn generate_mti(n: usize, t: usize, hyper: &Hyperparameters, seed: u64) -> Result<DatasetBundle> {
    hyper.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (beta, rest) = gem_sticks(hyper.gamma, &mut rng);
    let atoms = beta.len();
    let base: Vec<f64> = beta.iter().map(|b| hyper.alpha * b).collect();
    let mut initial = Vec::with_capacity(n);
    let mut pi = Vec::new();
    for _ in 0..n {
        dirichlet_variate(&base, &mut rng, &mut pi);
        initial.push(pi.clone());
    }
    // per-node rows indexed by previous label, drawn on first use
    let mut rows: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; atoms]; n];
    let mut labels = LabelState::single(n, t);
    labels.set_k(atoms);
    let mut draw = |node: usize, prev: Option<u32>, rng: &mut ChaCha8Rng| -> u32 {
        let dist = match prev {
            None => &initial[node],
            Some(c) => {
                let c = c as usize;
                if rows[node][c].is_none() {
                    let mut params = base.clone();
                    params[c] += hyper.kappa;
                    let mut out = Vec::new();
                    dirichlet_variate(&params, rng, &mut out);
                    rows[node][c] = Some(out);
                }
                rows[node][c].as_ref().expect("row drawn above")
            }
        };
        sample_weights(dist, rng) as u32
    };
    for tt in 0..t {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let (ps, pr) = if tt == 0 {
                    (None, None)
                } else {
                    let (a, b) = labels.get(i, j, tt - 1);
                    (Some(a), Some(b))
                };
                let s = draw(i, ps, &mut rng);
                let r = draw(j, pr, &mut rng);
                labels.set(i, j, tt, s, r);
            }
        }
    }
    finish_prior_draw("mti-prior", labels, beta, rest, hyper, &mut rng)
}

fn finish_prior_draw(
    name: &str,
    mut labels: LabelState,
    beta: Vec<f64>,
    rest: f64,
    hyper: &Hyperparameters,
    rng: &mut ChaCha8Rng,
) -> Result<DatasetBundle> {
    let (n, t) = (labels.n(), labels.times());
    let kept = labels.compact();
    let used: Vec<f64> = kept.iter().map(|&k| beta[k]).collect();
    let remainder = (1.0 - used.iter().sum::<f64>()).max(rest).max(f64::MIN_POSITIVE);
    let k = kept.len();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            (0..k)
                .map(|_| beta_variate(hyper.lambda1, hyper.lambda2, rng))
                .collect()
        })
        .collect();
    let compat = CompatibilityMatrix::from_rows(&rows)?;
    let mut data = RelationTensor::zeros(n, t);
    for (i, j, tt) in labels.pairs().collect::<Vec<_>>() {
        let (s, r) = labels.get(i, j, tt);
        data.set(i, j, tt, rng.random_bool(compat.get(s as usize, r as usize)));
    }
    let total = used.iter().sum::<f64>() + remainder;
    let weights = GlobalWeights {
        beta: used.iter().map(|b| b / total).collect(),
        remainder: remainder / total,
        hyper: *hyper,
    };
    Ok(DatasetBundle {
        name: name.to_string(),
        data,
        truth: None,
        node_labels: Vec::new(),
        time_labels: Vec::new(),
        latent: Some(LatentDraw {
            labels,
            compat,
            weights: Some(weights),
        }),
    })
}
