//! Slice-efficient sampler for the time-varying model.
//!
//! Time steps are visited in order. At step `t` the membership sticks
//! `pi_i^t` are instantiated from their conditional given the labels, a
//! uniform slice is drawn under the stick of every current label, sticks are
//! extended until no unseen community can exceed a slice, and the labels at
//! `t` are redrawn among the communities whose sticks exceed their slices.
//! Memberships at the other time steps stay integrated out, so label weights
//! keep the forward factor on `t + 1` and the collapsed edge likelihood.

use rand::Rng;

use crate::gibbs::{forward_log_factor, Workspace};
use crate::hyper::update_globals;
use crate::math::{beta_variate, sample_weights};
use crate::model::{edge_predictive, Dynamics, RelationTensor};
use crate::state::{ChainState, SamplerOptions, SweepStats};

const MAX_EXTENSIONS: usize = 100_000;

/// Sticks of every node at one time step plus the slice variables of the
/// labels at that step.
#[derive(Debug, Clone, PartialEq)]
pub struct StickState {
    pub t: usize,
    /// `sticks[i][k]` is `pi_ik^t` for the instantiated communities.
    pub sticks: Vec<Vec<f64>>,
    /// Mass of node `i`'s sticks on unseen communities.
    pub remainder: Vec<f64>,
    /// Sender slice `u_{ij,s}^t`, indexed `i * n + j`.
    pub slice_s: Vec<f64>,
    /// Receiver slice `u_{ij,r}^t`, indexed `i * n + j`.
    pub slice_r: Vec<f64>,
}

impl StickState {
    pub fn n(&self) -> usize {
        self.sticks.len()
    }

    /// Smallest slice among the labels drawn from node `i`'s sticks.
    pub fn min_slice(&self, i: usize) -> f64 {
        let n = self.n();
        let mut m = f64::INFINITY;
        for j in (0..n).filter(|&j| j != i) {
            m = m.min(self.slice_s[i * n + j]).min(self.slice_r[j * n + i]);
        }
        m
    }
}

/// Draws `pi_i^t` for every node by stick breaking:
/// `pi'_k ~ Beta(a_k, sum_{l>k} a_l + alpha beta_u)` with
/// `a_k = alpha beta_k + N_ik^t + kappa/(2n) N_ik^{t-1}`.
pub fn sample_sticks<R: Rng + ?Sized>(state: &ChainState, t: usize, rng: &mut R) -> StickState {
    let n = state.n();
    let k = state.k();
    let w = &state.weights;
    let unit = w.sticky_unit(n);
    let tail_mass = w.alpha() * w.remainder;
    let mut sticks = Vec::with_capacity(n);
    let mut remainder = Vec::with_capacity(n);
    let mut a = vec![0.0; k];
    for i in 0..n {
        let now = state.counts.participation(t, i);
        for kk in 0..k {
            a[kk] = w.alpha() * w.beta[kk] + now[kk] as f64;
            if t > 0 {
                a[kk] += unit * state.counts.participation(t - 1, i)[kk] as f64;
            }
        }
        // suffix[k] = sum_{l >= k} a_l + alpha beta_u
        let mut suffix = vec![tail_mass; k + 1];
        for kk in (0..k).rev() {
            suffix[kk] = suffix[kk + 1] + a[kk];
        }
        let mut rest = 1.0;
        let mut row = Vec::with_capacity(k);
        for (kk, &ak) in a.iter().enumerate() {
            let b = suffix[kk + 1];
            let v = if b <= 0.0 { 1.0 } else { beta_variate(ak, b, rng) };
            row.push(rest * v);
            rest *= 1.0 - v;
        }
        sticks.push(row);
        remainder.push(if tail_mass > 0.0 { rest } else { 0.0 });
    }
    StickState {
        t,
        sticks,
        remainder,
        slice_s: vec![0.0; n * n],
        slice_r: vec![0.0; n * n],
    }
}

/// `u ~ U(0, pi of the current label]` for both labels of every pair at the
/// sticks' time step.
pub fn sample_slices<R: Rng + ?Sized>(state: &ChainState, sticks: &mut StickState, rng: &mut R) {
    let n = state.n();
    let t = sticks.t;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let (s, r) = state.labels.get(i, j, t);
            sticks.slice_s[i * n + j] = sticks.sticks[i][s as usize] * (1.0 - rng.random::<f64>());
            sticks.slice_r[i * n + j] = sticks.sticks[j][r as usize] * (1.0 - rng.random::<f64>());
        }
    }
}

/// Instantiates communities until every node's unseen mass is below its
/// smallest slice. Returns the number of communities added.
pub fn extend_sticks<R: Rng + ?Sized>(state: &mut ChainState, sticks: &mut StickState, rng: &mut R) -> usize {
    let n = state.n();
    let mins: Vec<f64> = (0..n).map(|i| sticks.min_slice(i)).collect();
    let mut added = 0;
    while added < MAX_EXTENSIONS && (0..n).any(|i| sticks.remainder[i] >= mins[i]) {
        let split = beta_variate(1.0, state.weights.gamma(), rng);
        let idx = state.push_community(split) as usize;
        let alpha = state.weights.alpha();
        let own = alpha * state.weights.beta[idx];
        let rest_mass = alpha * state.weights.remainder;
        for i in 0..n {
            let v = beta_variate(own, rest_mass, rng);
            sticks.sticks[i].push(sticks.remainder[i] * v);
            sticks.remainder[i] *= 1.0 - v;
        }
        added += 1;
    }
    added
}

/// Redraws `(s_ij^t, r_ij^t)` among the communities whose sticks exceed the
/// pair's slices.
pub fn sample_pair_labels_slice<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    i: usize,
    j: usize,
    sticks: &StickState,
    buf: &mut Vec<(u32, u32, f64)>,
    rng: &mut R,
) -> (u32, u32) {
    let n = state.n();
    let t = sticks.t;
    let edge = data.get(i, j, t);
    let (old_s, old_r) = state.labels.get(i, j, t);
    state.counts.update(i, j, t, old_s, old_r, edge, false);
    let (us, ur) = (sticks.slice_s[i * n + j], sticks.slice_r[i * n + j]);
    let (l1, l2) = (state.weights.hyper.lambda1, state.weights.hyper.lambda2);
    let cand_s: Vec<(u32, f64)> = candidates(&sticks.sticks[i], us)
        .map(|k| (k, forward_log_factor(state, i, t, k as usize)))
        .collect();
    let cand_r: Vec<(u32, f64)> = candidates(&sticks.sticks[j], ur)
        .map(|l| (l, forward_log_factor(state, j, t, l as usize)))
        .collect();
    buf.clear();
    for &(k, fs) in &cand_s {
        for &(l, fr) in &cand_r {
            buf.push((k, l, fs + fr));
        }
    }
    let max = buf.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = buf
        .iter()
        .map(|&(k, l, lf)| (lf - max).exp() * edge_predictive(k as usize, l as usize, edge, &state.counts, l1, l2))
        .collect();
    let (s, r, _) = buf[sample_weights(&weights, rng)];
    state.labels.set(i, j, t, s, r);
    state.counts.update(i, j, t, s, r, edge, true);
    (s, r)
}

fn candidates(row: &[f64], slice: f64) -> impl Iterator<Item = u32> + '_ {
    row.iter()
        .enumerate()
        .filter(move |(_, &p)| p > slice)
        .map(|(k, _)| k as u32)
}

/// One slice-sampler sweep followed by the shared table, weight and
/// hyperparameter updates.
pub fn slice_sweep_mtv<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    opts: &SamplerOptions,
    ws: &mut Workspace,
    rng: &mut R,
) -> SweepStats {
    assert_eq!(
        state.dynamics,
        Dynamics::Mtv,
        "the slice sampler covers the time-varying model only"
    );
    let n = state.n();
    let mut buf = Vec::new();
    for t in 0..state.times() {
        let mut sticks = sample_sticks(state, t, rng);
        sample_slices(state, &mut sticks, rng);
        if !state.truncated {
            extend_sticks(state, &mut sticks, rng);
        }
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                sample_pair_labels_slice(state, data, i, j, &sticks, &mut buf, rng);
            }
        }
    }
    state.compact();
    update_globals(state, opts, &mut ws.stirling, rng)
}
