//! Log-space numerics and random variates shared by the samplers.
//!
//! Gamma, Beta and Dirichlet draws are produced through log-Gamma variates so
//! that shape parameters far below one (common for `alpha * beta_k` with a
//! long stick tail) never underflow to `0/0`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

pub use statrs::function::gamma::ln_gamma;

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Draws an index with probability proportional to the (nonnegative) weights.
///
/// Falls back to the last positive entry when rounding pushes the uniform past
/// the cumulative total.
pub fn sample_weights<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0 && total.is_finite(), "bad weight total {total}");
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (idx, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return idx;
            }
            last = idx;
        }
        u -= w;
    }
    last
}

/// Draws an index from unnormalized log weights.
pub fn sample_log_weights<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    sample_weights(&weights, rng)
}

/// Uniform draw on the open-at-zero interval `(0, 1]`.
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Logarithm of a `Gamma(shape, 1)` variate.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0, "gamma shape must be positive, got {shape}");
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("valid gamma shape").sample(rng);
        g.ln()
    } else {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        ln_gamma_variate(shape + 1.0, rng) + open_uniform(rng).ln() / shape
    }
}

/// `Gamma(shape, rate)` variate.
pub fn gamma_variate<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    ln_gamma_variate(shape, rng).exp() / rate
}

/// `Beta(a, b)` variate, robust to tiny shapes.
pub fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let la = ln_gamma_variate(a, rng);
    let lb = ln_gamma_variate(b, rng);
    (la - log_add_exp(la, lb)).exp()
}

/// Dirichlet variate written into `out`. Zero parameters and components that
/// underflow come back as exact zeros; the vector still sums to one.
pub fn dirichlet_variate<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    out.extend(alphas.iter().map(|&a| {
        if a > 0.0 {
            ln_gamma_variate(a, rng)
        } else {
            f64::NEG_INFINITY
        }
    }));
    let norm = log_sum_exp(out);
    for x in out.iter_mut() {
        *x = (*x - norm).exp();
    }
}

/// Unbiased sample mean and variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
