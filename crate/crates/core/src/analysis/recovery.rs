//! Label-switching-aware comparison of estimates with ground truth.

use crate::model::CountCache;

/// Squared-distance cost between truth column `a` and estimate column `b`
/// (columns past either width are zero).
fn column_cost(truth: &[Vec<f64>], estimate: &[Vec<f64>], a: usize, b: usize) -> f64 {
    truth
        .iter()
        .zip(estimate)
        .map(|(t, e)| {
            let x = t.get(a).copied().unwrap_or(0.0);
            let y = e.get(b).copied().unwrap_or(0.0);
            (x - y).powi(2)
        })
        .sum()
}

fn width(rows: &[Vec<f64>]) -> usize {
    rows.iter().map(Vec::len).max().unwrap_or(0)
}

/// Matches estimate columns to truth columns (rows are nodes) minimizing
/// the total squared distance. Both sides are padded with zero columns to a
/// common width `K*`; `perm[a]` is the estimate column matched to truth
/// column `a`, for `a` in `0..K*` (indices past the estimate's width are
/// padding).
pub fn align_communities(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<usize> {
    let k = width(estimate).max(width(truth));
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| column_cost(truth, estimate, a, b)).collect())
        .collect();
    assign(&cost)
}

/// Minimum-cost perfect assignment of rows to columns of a square matrix.
/// Exhaustive for up to 8 rows, Hungarian algorithm beyond.
pub fn assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    if k <= 8 {
        brute_force_assign(cost)
    } else {
        hungarian(cost)
    }
}

fn brute_force_assign(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = p.iter().enumerate().map(|(a, &b)| cost[a][b]).sum();
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(p);
        }
    });
    best
}

/// Visits every permutation of `xs[start..]` (Heap-free recursive swap).
pub fn permute<F: FnMut(&[usize])>(xs: &mut Vec<usize>, start: usize, visit: &mut F) {
    if start == xs.len() {
        visit(xs);
        return;
    }
    for i in start..xs.len() {
        xs.swap(start, i);
        permute(xs, start + 1, visit);
        xs.swap(start, i);
    }
}

/// Shortest-augmenting-path Hungarian algorithm with potentials, O(k^3).
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Reorders (and zero-pads) the columns of `rows` so column `a` holds the
/// old column `perm[a]`.
pub fn permute_columns(rows: &[Vec<f64>], perm: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| perm.iter().map(|&b| r.get(b).copied().unwrap_or(0.0)).collect())
        .collect()
}

/// Mean over rows of the Euclidean distance between estimated and true
/// membership rows, after optimal column alignment. Estimate row `r` is
/// compared with truth row `r % truth.len()`, so per-time estimates
/// (`T` stacked blocks of `n` rows) can be scored against per-node truth.
pub fn l2_membership(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    if estimate.is_empty() {
        return 0.0;
    }
    let tiled: Vec<Vec<f64>> = (0..estimate.len()).map(|r| truth[r % truth.len()].clone()).collect();
    let perm = align_communities(estimate, &tiled);
    let aligned = permute_columns(estimate, &perm);
    let truth = permute_columns(&tiled, &(0..perm.len()).collect::<Vec<_>>());
    aligned
        .iter()
        .zip(&truth)
        .map(|(e, t)| e.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .sum::<f64>()
        / aligned.len() as f64
}

fn pad_square(m: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| m.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0.0))
                .collect()
        })
        .collect()
}

/// Simultaneous row/column permutation of the estimate that best matches the
/// truth in squared Frobenius distance. Exhaustive for up to 8 communities;
/// beyond that columns and rows are matched on their concatenated profiles.
pub fn align_compat(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<usize> {
    let k = estimate.len().max(truth.len());
    let e = pad_square(estimate, k);
    let t = pad_square(truth, k);
    if k <= 8 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = perm.clone();
        let mut best_cost = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let mut c = 0.0;
            for a in 0..k {
                for b in 0..k {
                    c += (t[a][b] - e[p[a]][p[b]]).powi(2);
                }
            }
            if c < best_cost {
                best_cost = c;
                best.copy_from_slice(p);
            }
        });
        return best;
    }
    let profile = |m: &[Vec<f64>], a: usize| -> Vec<f64> {
        let mut v = m[a].clone();
        v.sort_by(f64::total_cmp);
        let mut col: Vec<f64> = (0..k).map(|b| m[b][a]).collect();
        col.sort_by(f64::total_cmp);
        v.extend(col);
        v
    };
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            let pa = profile(&t, a);
            (0..k)
                .map(|b| pa.iter().zip(profile(&e, b)).map(|(x, y)| (x - y).powi(2)).sum())
                .collect()
        })
        .collect();
    assign(&cost)
}

/// Mean over rows of the Euclidean row distance between compatibility
/// matrices after [`align_compat`]; both are zero-padded to a common size.
pub fn l2_compat(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let k = estimate.len().max(truth.len());
    if k == 0 {
        return 0.0;
    }
    let perm = align_compat(estimate, truth);
    let e = pad_square(estimate, k);
    let t = pad_square(truth, k);
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| (t[a][b] - e[perm[a]][perm[b]]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / k as f64
}

/// Empirical memberships `N_ik^t / (2(n-1))`, one row per `(t, i)` in
/// `t`-major order.
pub fn empirical_memberships(counts: &CountCache) -> Vec<Vec<f64>> {
    let n = counts.n();
    let per = (2 * n.saturating_sub(1)).max(1) as f64;
    (0..counts.times())
        .flat_map(|t| (0..n).map(move |i| (t, i)))
        .map(|(t, i)| counts.participation(t, i).iter().map(|&c| c as f64 / per).collect())
        .collect()
}

/// Running posterior means of the memberships and the compatibility matrix,
/// with each sample aligned to the running membership mean before it is
/// added.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecoveryAccumulator {
    pub(crate) samples: usize,
    pub(crate) membership: Vec<Vec<f64>>,
    pub(crate) compat: Vec<Vec<f64>>,
    pub(crate) compat_samples: Vec<Vec<f64>>,
}

impl RecoveryAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Adds one sample: empirical memberships and the posterior-mean
    /// compatibility matrix given the counts.
    pub fn add(&mut self, counts: &CountCache, lambda1: f64, lambda2: f64) {
        let rows = empirical_memberships(counts);
        let k = counts.k();
        let compat: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let (ones, zeros) = counts.totals().get(a, b);
                        crate::model::edge_predictive_counts(ones, zeros, true, lambda1, lambda2)
                    })
                    .collect()
            })
            .collect();
        self.add_sample(&rows, &compat);
    }

    pub fn add_sample(&mut self, rows: &[Vec<f64>], compat: &[Vec<f64>]) {
        let perm = if self.samples == 0 {
            (0..width(rows)).collect()
        } else {
            align_communities(rows, &self.membership_mean())
        };
        let k = perm.len();
        for r in &mut self.membership {
            r.resize(k, 0.0);
        }
        if self.membership.is_empty() {
            self.membership = vec![vec![0.0; k]; rows.len()];
        }
        for (acc, row) in self.membership.iter_mut().zip(permute_columns(rows, &perm)) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        self.compat = pad_square(&self.compat, k);
        self.compat_samples = pad_square(&self.compat_samples, k);
        for a in 0..k {
            for b in 0..k {
                if let Some(x) = compat.get(perm[a]).and_then(|r| r.get(perm[b])) {
                    self.compat[a][b] += x;
                    self.compat_samples[a][b] += 1.0;
                }
            }
        }
        self.samples += 1;
    }

    pub fn membership_mean(&self) -> Vec<Vec<f64>> {
        let s = self.samples.max(1) as f64;
        self.membership
            .iter()
            .map(|r| r.iter().map(|x| x / s).collect())
            .collect()
    }

    /// Posterior-mean compatibility; each cell averages over the samples in
    /// which both of its communities existed.
    pub fn compat_mean(&self) -> Vec<Vec<f64>> {
        self.compat
            .iter()
            .zip(&self.compat_samples)
            .map(|(r, c)| {
                r.iter()
                    .zip(c)
                    .map(|(x, n)| if *n > 0.0 { x / n } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Per-node membership estimate: the running mean of rows `i`, `i + n`,
    /// `i + 2n`, ... (one per time step).
    pub fn membership_by_node(&self, n: usize) -> Vec<Vec<f64>> {
        let mean = self.membership_mean();
        let blocks = (mean.len() / n.max(1)).max(1);
        (0..n.min(mean.len()))
            .map(|i| {
                let mut row = vec![0.0; width(&mean)];
                for r in mean.iter().skip(i).step_by(n) {
                    for (a, x) in row.iter_mut().zip(r) {
                        *a += x / blocks as f64;
                    }
                }
                row
            })
            .collect()
    }

    /// Indices of the `k` communities with the largest mean membership mass,
    /// in ascending index order.
    pub fn dominant(&self, k: usize) -> Vec<usize> {
        let mean = self.membership_mean();
        let width = width(&mean);
        let mass: Vec<f64> = (0..width).map(|c| mean.iter().map(|r| r[c]).sum()).collect();
        let mut idx: Vec<usize> = (0..width).collect();
        idx.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }

    /// Posterior-mean compatibility restricted to the `k` dominant
    /// communities. Rarely used communities carry prior-mean cells that say
    /// nothing about the data.
    pub fn compat_dominant(&self, k: usize) -> Vec<Vec<f64>> {
        let keep = self.dominant(k);
        let full = self.compat_mean();
        keep.iter()
            .map(|&a| keep.iter().map(|&b| full[a][b]).collect())
            .collect()
    }
}
