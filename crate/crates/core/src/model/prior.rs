use crate::math::ln_gamma;
use crate::model::{rebuild_counts, Dynamics, GlobalWeights, LabelState, RelationTensor, Transitions};

/// `log P(Z | beta, alpha, kappa)` with every membership distribution
/// integrated out.
///
/// Each restaurant contributes a Dirichlet-multinomial term
/// `lnG(A) - lnG(A + N) + sum_k [lnG(a_k + N_k) - lnG(a_k)]`, where the base
/// masses `a_k` include `alpha * beta_k` and the sticky term of the chosen
/// dynamics. The remainder mass enters only through `A`.
pub fn label_log_prior(labels: &LabelState, data: &RelationTensor, weights: &GlobalWeights, dynamics: Dynamics) -> f64 {
    let alpha = weights.alpha();
    let alpha_mass = weights.alpha_mass();
    match dynamics {
        Dynamics::Mtv => {
            let counts = rebuild_counts(labels, data).expect("consistent labels");
            let n = labels.n();
            let unit = weights.sticky_unit(n);
            let mut out = 0.0;
            for t in 0..labels.times() {
                for i in 0..n {
                    let row = counts.participation(t, i);
                    let prev = (t > 0).then(|| counts.participation(t - 1, i));
                    let mut total_a = alpha_mass;
                    let mut total_n = 0.0;
                    for k in 0..labels.k() {
                        let sticky = prev.map_or(0.0, |p| unit * p[k] as f64);
                        let a = alpha * weights.beta[k] + sticky;
                        total_a += sticky;
                        let c = row[k] as f64;
                        total_n += c;
                        if c > 0.0 {
                            out += ln_gamma(a + c) - ln_gamma(a);
                        }
                    }
                    out += ln_gamma(total_a) - ln_gamma(total_a + total_n);
                }
            }
            out
        }
        Dynamics::Mti => {
            let tr = Transitions::from_labels(labels);
            let kappa = weights.kappa();
            let mut out = 0.0;
            for node in 0..labels.n() {
                for row in 0..=labels.k() {
                    let total = tr.row_total(node, row) as f64;
                    if total == 0.0 {
                        continue;
                    }
                    let sticky = if row == 0 { 0.0 } else { kappa };
                    let total_a = alpha_mass + sticky;
                    out += ln_gamma(total_a) - ln_gamma(total_a + total);
                    for k in 0..labels.k() {
                        let c = tr.count(node, row, k) as f64;
                        if c > 0.0 {
                            let a = alpha * weights.beta[k] + if row == k + 1 { kappa } else { 0.0 };
                            out += ln_gamma(a + c) - ln_gamma(a);
                        }
                    }
                }
            }
            out
        }
    }
}
