use crate::error::Result;
use crate::math::ln_beta;
use crate::model::{
    rebuild_counts, CompatibilityMatrix, CountCache, GlobalWeights, LabelState, LinkCounts, RelationTensor,
};

/// Collapsed Beta-Bernoulli predictive of one edge value given cell counts.
#[inline]
pub fn edge_predictive_counts(ones: u32, zeros: u32, edge: bool, lambda1: f64, lambda2: f64) -> f64 {
    let denom = ones as f64 + zeros as f64 + lambda1 + lambda2;
    if edge {
        (ones as f64 + lambda1) / denom
    } else {
        (zeros as f64 + lambda2) / denom
    }
}

/// `P(e | s = k, r = l, rest)` with `W` integrated out; counts are pooled over
/// time because `W` is shared by every time step. Communities beyond the
/// cache's `K` are treated as empty cells.
pub fn edge_predictive(k: usize, l: usize, edge: bool, counts: &CountCache, lambda1: f64, lambda2: f64) -> f64 {
    let (ones, zeros) = counts.totals().get_or_empty(k, l);
    edge_predictive_counts(ones, zeros, edge, lambda1, lambda2)
}

/// `log P(E | Z)` summed over community-pair Beta integrals.
pub fn collapsed_loglik(totals: &LinkCounts, lambda1: f64, lambda2: f64) -> f64 {
    let prior = ln_beta(lambda1, lambda2);
    let mut out = 0.0;
    for k in 0..totals.k() {
        for l in 0..totals.k() {
            let (ones, zeros) = totals.get(k, l);
            if ones + zeros > 0 {
                out += ln_beta(ones as f64 + lambda1, zeros as f64 + lambda2) - prior;
            }
        }
    }
    out
}

/// Joint collapsed log-likelihood of the data under the labels.
pub fn joint_loglik(labels: &LabelState, data: &RelationTensor, weights: &GlobalWeights) -> Result<f64> {
    let counts = rebuild_counts(labels, data)?;
    Ok(collapsed_loglik(
        counts.totals(),
        weights.hyper.lambda1,
        weights.hyper.lambda2,
    ))
}

/// Posterior mean of `W` given the current counts.
pub fn posterior_mean_compat(counts: &CountCache, lambda1: f64, lambda2: f64) -> CompatibilityMatrix {
    let k = counts.k();
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    let (ones, zeros) = counts.totals().get(a, b);
                    edge_predictive_counts(ones, zeros, true, lambda1, lambda2)
                })
                .collect()
        })
        .collect();
    CompatibilityMatrix::from_rows(&rows).expect("posterior means lie in [0,1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Hyperparameters;

    #[test]
    fn prior_mean_without_counts() {
        let c = CountCache::empty(3, 1, 1);
        assert_eq!(edge_predictive(0, 0, true, &c, 1.0, 1.0), 0.5);
        assert_eq!(edge_predictive(4, 7, true, &c, 2.0, 6.0), 0.25);
    }

    #[test]
    fn beta_bernoulli_predictive() {
        let p1 = edge_predictive_counts(3, 1, true, 1.0, 1.0);
        assert!((p1 - 4.0 / 6.0).abs() < 1e-15);
        let p0 = edge_predictive_counts(3, 1, false, 1.0, 1.0);
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_single_community() {
        // n = 3, T = 1: six pairs, no links -> B(1, 7) / B(1, 1) = 1/7
        let labels = LabelState::single(3, 1);
        let data = RelationTensor::zeros(3, 1);
        let w = GlobalWeights::uniform(1, Hyperparameters::default());
        let ll = joint_loglik(&labels, &data, &w).unwrap();
        assert!((ll + 7.0f64.ln()).abs() < 1e-12, "{ll}");
    }

    #[test]
    fn empty_data_is_zero() {
        let labels = LabelState::single(4, 0);
        let data = RelationTensor::zeros(4, 0);
        let w = GlobalWeights::uniform(1, Hyperparameters::default());
        assert_eq!(joint_loglik(&labels, &data, &w).unwrap(), 0.0);
    }
}
