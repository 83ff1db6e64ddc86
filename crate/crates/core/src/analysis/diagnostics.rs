use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::math::mean_var;

/// Sample autocorrelation at `lag` (biased autocovariance over the
/// variance).
pub fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let m = xs.len();
    let mean = xs.iter().sum::<f64>() / m as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if lag >= m || var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..m - lag).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum();
    cov / var
}

/// Integrated autocorrelation time `1/2 + sum_{l=1}^{C-1} rho_l`, where the
/// cutoff `C` is the first lag with `|rho_C| < 2 / sqrt(M)`.
pub fn iat(xs: &[f64]) -> Result<f64> {
    let m = xs.len();
    if m < 10 {
        return Err(Error::InvalidArgument(format!(
            "autocorrelation time needs at least 10 values, got {m}"
        )));
    }
    let mean = xs.iter().sum::<f64>() / m as f64;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let var: f64 = centered.iter().map(|x| x * x).sum();
    if !(var > 0.0) {
        return Err(Error::Numeric(
            "autocorrelation of a constant series is undefined".into(),
        ));
    }
    let bound = 2.0 / (m as f64).sqrt();
    let mut tau = 0.5;
    for lag in 1..m {
        let rho = centered[..m - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / var;
        if rho.abs() < bound {
            break;
        }
        tau += rho;
    }
    Ok(tau)
}

/// Gelman-Rubin potential scale reduction factor with the usual
/// degrees-of-freedom correction. Returns the point estimate and the upper
/// limit of its 95% interval.
pub fn psrf(chains: &[Vec<f64>]) -> Result<(f64, f64)> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "scale reduction needs at least two chains".into(),
        ));
    }
    let n = chains[0].len();
    if n < 2 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "chains must have equal length of at least 2".into(),
        ));
    }
    let nf = n as f64;
    let mf = m as f64;
    let stats: Vec<(f64, f64)> = chains.iter().map(|c| mean_var(c)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let vars: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let w = vars.iter().sum::<f64>() / mf;
    if !(w > 0.0) {
        return Err(Error::Numeric("zero within-chain variance".into()));
    }
    let b = nf * mean_var(&means).1;
    let mu = means.iter().sum::<f64>() / mf;
    let var_w = mean_var(&vars).1 / mf;
    let var_b = 2.0 * b * b / (mf - 1.0);
    let sq: Vec<f64> = means.iter().map(|x| x * x).collect();
    let cov_wb = (nf / mf) * (covariance(&vars, &sq) - 2.0 * mu * covariance(&vars, &means));
    let v = (nf - 1.0) * w / nf + (1.0 + 1.0 / mf) * b / nf;
    let var_v =
        ((nf - 1.0).powi(2) * var_w + (1.0 + 1.0 / mf).powi(2) * var_b + 2.0 * (nf - 1.0) * (1.0 + 1.0 / mf) * cov_wb)
            / (nf * nf);
    let df_adj = if var_v > 0.0 {
        let df = 2.0 * v * v / var_v;
        (df + 3.0) / (df + 1.0)
    } else {
        1.0
    };
    let fixed = (nf - 1.0) / nf;
    let random = (1.0 + 1.0 / mf) * (b / w) / nf;
    let w_df = if var_w > 0.0 {
        (2.0 * w * w / var_w).min(1e7)
    } else {
        1e7
    };
    let q = FisherSnedecor::new(mf - 1.0, w_df)
        .map_err(|e| Error::Numeric(e.to_string()))?
        .inverse_cdf(0.975);
    Ok((
        (df_adj * (fixed + random)).sqrt(),
        (df_adj * (fixed + q * random)).sqrt(),
    ))
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
}

/// Number of batches used for batch-means variance estimates.
pub const GEWEKE_BATCHES: usize = 20;

/// Variance of the sample mean via non-overlapping batch means. Short
/// series use fewer batches (at least one value each).
pub fn batch_means_variance(xs: &[f64], batches: usize) -> f64 {
    let batches = batches.min(xs.len()).max(1);
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    mean_var(&means).1 / batches as f64
}

/// Geweke z-score comparing the mean of the first `first` fraction with the
/// mean of the last `last` fraction of the series.
pub fn geweke_z(xs: &[f64], first: f64, last: f64) -> Result<f64> {
    let m = xs.len();
    if m < 100 {
        return Err(Error::InvalidArgument(format!(
            "Geweke diagnostic needs at least 100 values, got {m}"
        )));
    }
    if !(first > 0.0 && last > 0.0 && first + last <= 1.0) {
        return Err(Error::InvalidArgument(
            "window fractions must be positive and sum to at most 1".into(),
        ));
    }
    let a = &xs[..(first * m as f64).floor() as usize];
    let b = &xs[m - (last * m as f64).floor() as usize..];
    let va = batch_means_variance(a, GEWEKE_BATCHES);
    let vb = batch_means_variance(b, GEWEKE_BATCHES);
    if !(va + vb > 0.0) {
        return Err(Error::Numeric("degenerate variance in Geweke windows".into()));
    }
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    Ok((ma - mb) / (va + vb).sqrt())
}
