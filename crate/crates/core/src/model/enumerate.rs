//! Brute-force posterior over every label configuration of a tiny instance.
//!
//! Used as the ground-truth oracle for the samplers: each configuration's
//! joint `P(Z) P(E | Z)` is evaluated with `W` and the membership
//! distributions integrated out, then normalized.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{ln_beta, ln_gamma, log_sum_exp};
use crate::model::{
    collapsed_loglik, label_log_prior, rebuild_counts, Dynamics, GlobalWeights, LabelState, RelationTensor,
};

/// Largest number of configurations [`enumerate_exact`] accepts (`2^24`).
pub const MAX_STATES: u64 = 1 << 24;

/// Exact truncated-model posterior.
///
/// Configuration codes are base-`k_max` numbers whose digit `2p` is the sender
/// label and digit `2p + 1` the receiver label of the `p`-th pair in
/// lexicographic `(t, i, j)` order (digit 0 least significant).
#[derive(Debug, Clone)]
pub struct ExactPosterior {
    n: usize,
    t: usize,
    k_max: usize,
    probs: Vec<f64>,
    log_evidence: f64,
}

impl ExactPosterior {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `log sum_Z P(Z) P(E | Z)`.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    /// Number of labels per configuration.
    pub fn label_count(&self) -> usize {
        2 * self.n * self.n.saturating_sub(1) * self.t
    }

    /// Decodes a configuration code into its flat label vector.
    pub fn decode_into(&self, mut code: usize, out: &mut Vec<u32>) {
        out.clear();
        for _ in 0..self.label_count() {
            out.push((code % self.k_max) as u32);
            code /= self.k_max;
        }
    }

    pub fn decode(&self, code: usize) -> LabelState {
        let mut flat = Vec::new();
        self.decode_into(code, &mut flat);
        labels_from_flat(self.n, self.t, self.k_max, &flat)
    }

    /// Encodes a label state (all labels must be `< k_max`).
    pub fn encode(&self, labels: &LabelState) -> usize {
        encode_labels(labels, self.k_max)
    }

    /// Pushes the posterior through a categorical statistic of the flat
    /// label vector.
    pub fn distribution<F>(&self, categories: usize, stat: F) -> Vec<f64>
    where
        F: Fn(&[u32]) -> usize + Sync,
    {
        let chunk = 1 << 14;
        self.probs
            .par_chunks(chunk)
            .enumerate()
            .map(|(c, probs)| {
                let mut out = vec![0.0; categories];
                let mut flat = Vec::new();
                for (off, &p) in probs.iter().enumerate() {
                    self.decode_into(c * chunk + off, &mut flat);
                    out[stat(&flat)] += p;
                }
                out
            })
            .reduce(
                || vec![0.0; categories],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    }
}

/// Flat label vector in enumeration order.
pub fn flatten_labels(labels: &LabelState) -> Vec<u32> {
    let mut out = Vec::with_capacity(2 * labels.n() * labels.n() * labels.times());
    for (i, j, t) in labels.pairs() {
        let (s, r) = labels.get(i, j, t);
        out.push(s);
        out.push(r);
    }
    out
}

pub fn encode_labels(labels: &LabelState, k_max: usize) -> usize {
    flatten_labels(labels)
        .iter()
        .rev()
        .fold(0usize, |acc, &d| acc * k_max + d as usize)
}

pub fn labels_from_flat(n: usize, t: usize, k: usize, flat: &[u32]) -> LabelState {
    let mut out = LabelState::single(n, t);
    out.set_k(k);
    let pairs: Vec<_> = out.pairs().collect();
    for (p, (i, j, tt)) in pairs.into_iter().enumerate() {
        out.set(i, j, tt, flat[2 * p], flat[2 * p + 1]);
    }
    out
}

/// Generic (slow) joint log-probability of one configuration in the
/// truncated model; the enumeration fast path is checked against it.
pub fn log_joint(labels: &LabelState, data: &RelationTensor, weights: &GlobalWeights, dynamics: Dynamics) -> f64 {
    let counts = rebuild_counts(labels, data).expect("consistent labels");
    label_log_prior(labels, data, weights, dynamics)
        + collapsed_loglik(counts.totals(), weights.hyper.lambda1, weights.hyper.lambda2)
}

/// Exact posterior `P(Z | E)` of the model truncated to `k_max` communities
/// with fixed weights (`weights.beta` must have `k_max` entries).
pub fn enumerate_exact(
    data: &RelationTensor,
    k_max: usize,
    weights: &GlobalWeights,
    dynamics: Dynamics,
) -> Result<ExactPosterior> {
    if weights.k() != k_max || k_max == 0 {
        return Err(Error::Dimension(format!(
            "weights carry {} communities, enumeration needs {k_max}",
            weights.k()
        )));
    }
    let n = data.n();
    let labels = 2 * n * n.saturating_sub(1) * data.times();
    let states = (k_max as f64).powi(labels as i32);
    if states > MAX_STATES as f64 {
        return Err(Error::TooLarge {
            states,
            limit: MAX_STATES,
        });
    }
    let states = states as usize;
    let eval = FastJoint::new(data, weights, dynamics);
    let chunk = 1 << 14;
    let mut logp = vec![0.0; states];
    logp.par_chunks_mut(chunk).enumerate().for_each(|(c, out)| {
        let mut digits = vec![0u32; labels];
        let mut code = c * chunk;
        for d in digits.iter_mut() {
            *d = (code % k_max) as u32;
            code /= k_max;
        }
        let mut scratch = Scratch::new(&eval);
        for slot in out.iter_mut() {
            *slot = eval.eval(&digits, &mut scratch);
            // odometer increment
            for d in digits.iter_mut() {
                *d += 1;
                if (*d as usize) < k_max {
                    break;
                }
                *d = 0;
            }
        }
    });
    let log_evidence = log_sum_exp(&logp);
    for x in logp.iter_mut() {
        *x = (*x - log_evidence).exp();
    }
    Ok(ExactPosterior {
        n,
        t: data.times(),
        k_max,
        probs: logp,
        log_evidence,
    })
}

/// Table-driven joint evaluator for enumeration.
struct FastJoint {
    n: usize,
    t: usize,
    k: usize,
    dynamics: Dynamics,
    pairs: Vec<(usize, usize, usize)>,
    edges: Vec<bool>,
    pairs_per_time: usize,
    /// Restaurant terms, `[k][prev][count]` (MTV) or `[sticky?][k][count]` (MTI).
    dish: Vec<Vec<Vec<f64>>>,
    /// Normalizer by restaurant kind and customer total.
    norm: Vec<Vec<f64>>,
    edge_table: Vec<Vec<f64>>,
}

struct Scratch {
    part: Vec<u32>,
    cells: Vec<[u32; 2]>,
    trans: Vec<u32>,
}

impl Scratch {
    fn new(f: &FastJoint) -> Self {
        Self {
            part: vec![0; f.t * f.n * f.k],
            cells: vec![[0, 0]; f.k * f.k],
            trans: vec![0; f.n * (f.k + 1) * f.k],
        }
    }
}

impl FastJoint {
    fn new(data: &RelationTensor, w: &GlobalWeights, dynamics: Dynamics) -> Self {
        let n = data.n();
        let t = data.times();
        let k = w.k();
        let pairs: Vec<_> = data.pairs().collect();
        let edges = pairs.iter().map(|&(i, j, tt)| data.get(i, j, tt)).collect();
        let alpha = w.alpha();
        let alpha_mass = w.alpha_mass();
        let per_node = 2 * n.saturating_sub(1);
        let max_count = match dynamics {
            Dynamics::Mtv => per_node,
            Dynamics::Mti => per_node * t,
        };
        let lg = |a: f64, c: usize| ln_gamma(a + c as f64) - ln_gamma(a);
        let (dish, norm) = match dynamics {
            Dynamics::Mtv => {
                let unit = w.sticky_unit(n);
                let dish = (0..k)
                    .map(|kk| {
                        (0..=per_node)
                            .map(|p| {
                                let a = alpha * w.beta[kk] + unit * p as f64;
                                (0..=per_node).map(|c| lg(a, c)).collect()
                            })
                            .collect()
                    })
                    .collect();
                let a0 = alpha_mass;
                let a1 = alpha_mass + unit * per_node as f64;
                let norm = vec![
                    vec![ln_gamma(a0) - ln_gamma(a0 + per_node as f64)],
                    vec![ln_gamma(a1) - ln_gamma(a1 + per_node as f64)],
                ];
                (dish, norm)
            }
            Dynamics::Mti => {
                let kappa = w.kappa();
                let dish = [0.0, kappa]
                    .iter()
                    .map(|&extra| {
                        (0..k)
                            .map(|kk| {
                                let a = alpha * w.beta[kk] + extra;
                                (0..=max_count).map(|c| lg(a, c)).collect()
                            })
                            .collect()
                    })
                    .collect();
                let norm = [alpha_mass, alpha_mass + kappa]
                    .iter()
                    .map(|&a| (0..=max_count).map(|c| ln_gamma(a) - ln_gamma(a + c as f64)).collect())
                    .collect();
                (dish, norm)
            }
        };
        let total_pairs = pairs.len();
        let (l1, l2) = (w.hyper.lambda1, w.hyper.lambda2);
        let prior = ln_beta(l1, l2);
        let edge_table = (0..=total_pairs)
            .map(|ones| {
                (0..=total_pairs)
                    .map(|zeros| ln_beta(ones as f64 + l1, zeros as f64 + l2) - prior)
                    .collect()
            })
            .collect();
        Self {
            n,
            t,
            k,
            dynamics,
            pairs,
            edges,
            pairs_per_time: n * n.saturating_sub(1),
            dish,
            norm,
            edge_table,
        }
    }

    fn eval(&self, labels: &[u32], s: &mut Scratch) -> f64 {
        let (n, k) = (self.n, self.k);
        s.cells.iter_mut().for_each(|c| *c = [0, 0]);
        let mut out = 0.0;
        match self.dynamics {
            Dynamics::Mtv => {
                s.part.iter_mut().for_each(|c| *c = 0);
                for (p, &(i, j, t)) in self.pairs.iter().enumerate() {
                    let (a, b) = (labels[2 * p] as usize, labels[2 * p + 1] as usize);
                    s.part[(t * n + i) * k + a] += 1;
                    s.part[(t * n + j) * k + b] += 1;
                    s.cells[a * k + b][usize::from(!self.edges[p])] += 1;
                }
                for t in 0..self.t {
                    for i in 0..n {
                        let row = &s.part[(t * n + i) * k..(t * n + i + 1) * k];
                        out += self.norm[usize::from(t > 0)][0];
                        for kk in 0..k {
                            let prev = if t > 0 {
                                s.part[((t - 1) * n + i) * k + kk] as usize
                            } else {
                                0
                            };
                            out += self.dish[kk][prev][row[kk] as usize];
                        }
                    }
                }
            }
            Dynamics::Mti => {
                s.trans.iter_mut().for_each(|c| *c = 0);
                let stride = (k + 1) * k;
                for (p, &(i, j, t)) in self.pairs.iter().enumerate() {
                    let (a, b) = (labels[2 * p] as usize, labels[2 * p + 1] as usize);
                    let (ra, rb) = if t == 0 {
                        (0, 0)
                    } else {
                        let q = p - self.pairs_per_time;
                        (labels[2 * q] as usize + 1, labels[2 * q + 1] as usize + 1)
                    };
                    s.trans[i * stride + ra * k + a] += 1;
                    s.trans[j * stride + rb * k + b] += 1;
                    s.cells[a * k + b][usize::from(!self.edges[p])] += 1;
                }
                for node in 0..n {
                    for row in 0..=k {
                        let base = node * stride + row * k;
                        let cnts = &s.trans[base..base + k];
                        let total: u32 = cnts.iter().sum();
                        if total == 0 {
                            continue;
                        }
                        out += self.norm[usize::from(row > 0)][total as usize];
                        for (kk, &c) in cnts.iter().enumerate() {
                            let sticky = usize::from(row == kk + 1);
                            out += self.dish[sticky][kk][c as usize];
                        }
                    }
                }
            }
        }
        for cell in &s.cells {
            if cell[0] + cell[1] > 0 {
                out += self.edge_table[cell[0] as usize][cell[1] as usize];
            }
        }
        out
    }
}
