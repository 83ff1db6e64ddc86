use crate::model::{edge_predictive_counts, CountCache, RelationTensor};
use crate::state::ChainState;

/// Estimated density
/// `D = -2 sum_{i,j,t} ln( sum_{k,l} N_ik^t N_jl^t / (4 n^2 T) p(e_ij^t | k, l) )`
/// with `p` the posterior predictive of the `(k, l)` cell given all counts.
pub fn density_from_counts(counts: &CountCache, data: &RelationTensor, lambda1: f64, lambda2: f64) -> f64 {
    let n = data.n();
    let k = counts.k();
    let scale = 4.0 * (n * n) as f64 * data.times() as f64;
    let mut p1 = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            let (ones, zeros) = counts.totals().get(a, b);
            p1[a * k + b] = edge_predictive_counts(ones, zeros, true, lambda1, lambda2);
        }
    }
    let mut out = 0.0;
    for (i, j, t) in data.pairs() {
        let e = data.get(i, j, t);
        let ni = counts.participation(t, i);
        let nj = counts.participation(t, j);
        let mut inner = 0.0;
        for a in 0..k {
            if ni[a] == 0 {
                continue;
            }
            for b in 0..k {
                if nj[b] == 0 {
                    continue;
                }
                let p = if e { p1[a * k + b] } else { 1.0 - p1[a * k + b] };
                inner += ni[a] as f64 * nj[b] as f64 * p;
            }
        }
        out += (inner / scale).ln();
    }
    -2.0 * out
}

pub fn density_d(state: &ChainState, data: &RelationTensor) -> f64 {
    let h = state.weights.hyper;
    density_from_counts(&state.counts, data, h.lambda1, h.lambda2)
}
