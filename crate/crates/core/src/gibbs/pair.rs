use rand::Rng;

use crate::math::{beta_variate, ln_gamma, sample_weights};
use crate::model::{edge_predictive, Dynamics, RelationTensor};
use crate::state::ChainState;

/// Reusable buffers for pair updates.
#[derive(Debug, Clone, Default)]
pub struct PairScratch {
    s: Vec<f64>,
    r: Vec<f64>,
    joint: Vec<f64>,
}

/// Unnormalized CRF weight of label value `k` for a label of node `node` at
/// time `t` in the time-varying model, with the label already removed from
/// the counts: `N_ik^{t,-} + alpha beta_k + kappa/(2n) N_ik^{t-1}`; the index
/// `k = K` stands for all unseen communities together (`alpha beta_u`).
pub fn crf_predictive(state: &ChainState, node: usize, t: usize, k: usize) -> f64 {
    let w = &state.weights;
    if k >= state.k() {
        return w.alpha() * w.remainder;
    }
    let own = state.counts.participation(t, node)[k] as f64 + w.alpha() * w.beta[k];
    if t == 0 {
        own
    } else {
        own + w.sticky_unit(state.n()) * state.counts.participation(t - 1, node)[k] as f64
    }
}

/// Log of the change in the collapsed probability of node `node`'s labels at
/// `t + 1` when one more of its labels at `t` takes value `k`.
pub fn forward_log_factor(state: &ChainState, node: usize, t: usize, k: usize) -> f64 {
    if t + 1 >= state.times() || k >= state.k() {
        return 0.0;
    }
    let c = state.counts.participation(t + 1, node)[k];
    if c == 0 {
        return 0.0;
    }
    let w = &state.weights;
    let unit = w.sticky_unit(state.n());
    let a = (w.alpha() * w.beta[k] + unit * state.counts.participation(t, node)[k] as f64).max(f64::MIN_POSITIVE);
    let c = c as f64;
    ln_gamma(a + unit + c) - ln_gamma(a + unit) - ln_gamma(a + c) + ln_gamma(a)
}

/// Fills `out` with linear-scale weights `own(k) * forward(k)` over the
/// candidates `0..K` (plus the unseen bucket when `open`).
fn mtv_weights(state: &ChainState, node: usize, t: usize, open: bool, out: &mut Vec<f64>) {
    out.clear();
    let k = state.k();
    for kk in 0..k {
        out.push(crf_predictive(state, node, t, kk).ln() + forward_log_factor(state, node, t, kk));
    }
    if open {
        out.push((state.weights.alpha() * state.weights.remainder).ln());
    }
    exp_normalize(out);
}

/// Row of node `node`'s restaurant family serving a label whose predecessor
/// on the chain is `prev`.
#[inline]
fn row_of(prev: Option<u32>) -> usize {
    prev.map_or(0, |p| p as usize + 1)
}

/// Time-invariant counterpart of [`mtv_weights`]: own row predictive times
/// the predictive of the successor label in the row the candidate selects.
fn mti_weights(state: &ChainState, node: usize, prev: Option<u32>, next: Option<u32>, open: bool, out: &mut Vec<f64>) {
    out.clear();
    let w = &state.weights;
    let tr = state.transitions.as_ref().expect("transition counts");
    let (alpha, kappa) = (w.alpha(), w.kappa());
    let mass = w.alpha_mass();
    let rp = row_of(prev);
    for k in 0..state.k() {
        let sticky_here = rp == k + 1;
        let mut own = tr.count(node, rp, k) as f64 + alpha * w.beta[k];
        if sticky_here {
            own += kappa;
        }
        let mut lw = own.ln();
        if let Some(q) = next {
            let q = q as usize;
            let mut num = tr.count(node, k + 1, q) as f64 + alpha * w.beta[q];
            if q == k {
                num += kappa;
            }
            let mut den = tr.row_total(node, k + 1) as f64 + mass + kappa;
            if sticky_here {
                den += 1.0;
                if q == k {
                    num += 1.0;
                }
            }
            lw += num.ln() - den.ln();
        }
        out.push(lw);
    }
    if open {
        let mut lw = (alpha * w.remainder).ln();
        if let Some(q) = next {
            lw += (alpha * w.beta[q as usize]).ln() - (mass + kappa).ln();
        }
        out.push(lw);
    }
    exp_normalize(out);
}

fn exp_normalize(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
    }
}

/// Predecessor and successor of a label on its chain.
fn chain_neighbors(state: &ChainState, i: usize, j: usize, t: usize, sender: bool) -> (Option<u32>, Option<u32>) {
    let pick = |tt: usize| {
        let (s, r) = state.labels.get(i, j, tt);
        if sender {
            s
        } else {
            r
        }
    };
    let prev = (t > 0).then(|| pick(t - 1));
    let next = (t + 1 < state.times()).then(|| pick(t + 1));
    (prev, next)
}

fn chain_update(state: &mut ChainState, node: usize, prev: Option<u32>, label: u32, next: Option<u32>, add: bool) {
    let tr = state.transitions.as_mut().expect("transition counts");
    tr.update(node, row_of(prev), label as usize, add);
    if let Some(q) = next {
        tr.update(node, label as usize + 1, q as usize, add);
    }
}

/// Resamples `(s_ij^t, r_ij^t)` jointly from their collapsed conditional and
/// writes them back into the state. In nonparametric states the candidates
/// include one bucket for all unseen communities per coordinate.
pub fn sample_pair_labels<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    i: usize,
    j: usize,
    t: usize,
    scratch: &mut PairScratch,
    rng: &mut R,
) -> (u32, u32) {
    let edge = data.get(i, j, t);
    let (old_s, old_r) = state.labels.get(i, j, t);
    state.counts.update(i, j, t, old_s, old_r, edge, false);
    let open = !state.truncated;
    let k = state.k();
    let mut chains = None;
    match state.dynamics {
        Dynamics::Mtv => {
            mtv_weights(state, i, t, open, &mut scratch.s);
            mtv_weights(state, j, t, open, &mut scratch.r);
        }
        Dynamics::Mti => {
            let (sp, sn) = chain_neighbors(state, i, j, t, true);
            let (rp, rn) = chain_neighbors(state, i, j, t, false);
            chain_update(state, i, sp, old_s, sn, false);
            chain_update(state, j, rp, old_r, rn, false);
            mti_weights(state, i, sp, sn, open, &mut scratch.s);
            mti_weights(state, j, rp, rn, open, &mut scratch.r);
            chains = Some((sp, sn, rp, rn));
        }
    }
    let width = scratch.s.len();
    let (l1, l2) = (state.weights.hyper.lambda1, state.weights.hyper.lambda2);
    scratch.joint.clear();
    for a in 0..width {
        let sa = scratch.s[a];
        for b in 0..width {
            let p = edge_predictive(a, b, edge, &state.counts, l1, l2);
            scratch.joint.push(sa * scratch.r[b] * p);
        }
    }
    let idx = sample_weights(&scratch.joint, rng);
    let (mut s, mut r) = ((idx / width) as u32, (idx % width) as u32);
    let s_new = s as usize == k;
    let r_new = r as usize == k;
    let mut split = 0.0;
    if s_new {
        split = beta_variate(1.0, state.weights.gamma(), rng);
        s = state.push_community(split);
    }
    if r_new {
        // an unseen receiver community coincides with the sender's fresh one
        // with probability equal to that community's share of the old remainder
        if s_new && rng.random::<f64>() < split {
            r = s;
        } else {
            let b = beta_variate(1.0, state.weights.gamma(), rng);
            r = state.push_community(b);
        }
    }
    state.labels.set(i, j, t, s, r);
    state.counts.update(i, j, t, s, r, edge, true);
    if let Some((sp, sn, rp, rn)) = chains {
        chain_update(state, i, sp, s, sn, true);
        chain_update(state, j, rp, r, rn, true);
    }
    (s, r)
}
