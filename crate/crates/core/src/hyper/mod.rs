//! Resampling of `gamma`, `alpha + kappa` and `kappa / (alpha + kappa)`.

mod ars;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::gibbs::{resample_beta, sample_tables, split_tables, StirlingTable, TableCounts};
use crate::math::{beta_variate, gamma_variate, ln_gamma, open_uniform};
use crate::state::{ChainState, SamplerOptions, SweepStats};

pub use ars::{ars_sample, grid_density, grid_sample};

/// Grid used when adaptive rejection sampling fails.
pub const GRID_POINTS: usize = 1024;
pub const GRID_RANGE: (f64, f64) = (-9.210340371976182, 9.210340371976182); // ln 1e-4, ln 1e4

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

/// Priors on the three learned hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperPriors {
    pub gamma: GammaPrior,
    /// Prior on `alpha + kappa`.
    pub concentration: GammaPrior,
    /// Prior on `kappa / (alpha + kappa)`.
    pub ratio: BetaPrior,
}

impl Default for HyperPriors {
    fn default() -> Self {
        Self {
            gamma: GammaPrior { shape: 1.0, rate: 1.0 },
            concentration: GammaPrior { shape: 1.0, rate: 1.0 },
            ratio: BetaPrior { a: 1.0, b: 1.0 },
        }
    }
}

/// Log posterior of `x = ln gamma` given `k` communities and `tables`
/// global-mass tables, with its derivative.
pub fn gamma_log_posterior(x: f64, k: usize, tables: u64, prior: GammaPrior) -> (f64, f64) {
    let g = x.exp();
    let m = tables as f64;
    let shape = prior.shape + k as f64;
    let mut h = shape * x - prior.rate * g;
    let mut d = shape - prior.rate * g;
    if tables > 0 {
        h += ln_gamma(g) - ln_gamma(g + m);
        d += g * (digamma(g) - digamma(g + m));
    }
    (h, d)
}

/// Draws `gamma` from `p(gamma) gamma^K Gamma(gamma) / Gamma(gamma + M)`.
/// The second value reports whether the grid fallback was used.
pub fn sample_gamma<R: Rng + ?Sized>(k: usize, tables: u64, prior: GammaPrior, rng: &mut R) -> (f64, bool) {
    let (lo, hi) = (0.01f64.ln(), 100f64.ln());
    let init: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let logf = |x: f64| gamma_log_posterior(x, k, tables, prior);
    match ars_sample(logf, &init, rng) {
        Some(x) => (x.exp(), false),
        None => {
            let x = grid_sample(|x| logf(x).0, GRID_RANGE.0, GRID_RANGE.1, GRID_POINTS, rng);
            (x.exp(), true)
        }
    }
}

/// Auxiliary-variable update of `c = alpha + kappa`.
///
/// Restaurant `j` has mass `c * a_j` with `a_j` from
/// [`Restaurant::mass_factor`](crate::gibbs::Restaurant::mass_factor); given
/// `w_j ~ Beta(c a_j + 1, N_j)` and `s_j ~ Bernoulli(N_j / (N_j + c a_j))`,
/// `c ~ Gamma(shape + sum m_j - sum s_j, rate - sum a_j ln w_j)`.
pub fn sample_concentration<R: Rng + ?Sized>(
    tables: &TableCounts,
    current: f64,
    ratio: f64,
    prior: GammaPrior,
    rng: &mut R,
) -> f64 {
    let mut shape = prior.shape;
    let mut rate = prior.rate;
    for r in tables.restaurants.iter().filter(|r| r.customers > 0) {
        let a = r.mass_factor(ratio);
        let n = r.customers as f64;
        let w = beta_variate(current * a + 1.0, n, rng);
        let s = rng.random::<f64>() * (n + current * a) < n;
        shape += r.tables as f64 - f64::from(u8::from(s));
        rate -= a * w.ln();
    }
    gamma_variate(shape, rate, rng).max(f64::MIN_POSITIVE)
}

/// Conjugate Beta parameters for the ratio from the table split alone:
/// successes `sum (m - m̂)`, failures `sum m̂`, over restaurants that carry
/// sticky mass.
pub fn ratio_conjugate_params(tables: &TableCounts, prior: BetaPrior) -> (f64, f64) {
    let (sticky, plain) = tables.sticky_split();
    (prior.a + sticky as f64, prior.b + plain as f64)
}

/// Log conditional density of the ratio `rho` given tables and `c`.
///
/// Besides the table split this includes the restaurant normalizers
/// `Gamma(c a_j) / Gamma(c a_j + N_j)` and the global-mass tables of
/// restaurants without sticky mass, which both depend on `rho`.
pub fn ratio_log_conditional(rho: f64, tables: &TableCounts, concentration: f64, prior: BetaPrior) -> f64 {
    if !(rho > 0.0 && rho < 1.0) {
        return f64::NEG_INFINITY;
    }
    let (a, b) = ratio_conjugate_params(tables, prior);
    let mut out = (a - 1.0) * rho.ln() + (b - 1.0 + tables.initial_unsticky() as f64) * (-rho).ln_1p();
    for r in tables
        .restaurants
        .iter()
        .filter(|r| r.customers > 0 && r.sticky_share < 1.0)
    {
        let mass = concentration * r.mass_factor(rho);
        out += ln_gamma(mass) - ln_gamma(mass + r.customers as f64);
    }
    out
}

/// Draws `kappa / (alpha + kappa)` from its exact conditional by univariate
/// slice sampling on `(0, 1)`.
pub fn sample_ratio<R: Rng + ?Sized>(
    tables: &TableCounts,
    concentration: f64,
    current: f64,
    prior: BetaPrior,
    rng: &mut R,
) -> f64 {
    let logp = |r: f64| ratio_log_conditional(r, tables, concentration, prior);
    let x0 = current.clamp(1e-12, 1.0 - 1e-12);
    let level = logp(x0) + open_uniform(rng).ln();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let x = lo + (hi - lo) * open_uniform(rng);
        if x > 0.0 && x < 1.0 && logp(x) >= level {
            return x;
        }
        if x < x0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    x0
}

/// Tables, global weights and hyperparameters for one sweep. Truncated
/// states skip all of it.
pub fn update_globals<R: Rng + ?Sized>(
    state: &mut ChainState,
    opts: &SamplerOptions,
    stirling: &mut StirlingTable,
    rng: &mut R,
) -> SweepStats {
    let mut stats = SweepStats {
        k: state.k(),
        ..SweepStats::default()
    };
    if state.truncated || state.k() == 0 {
        return stats;
    }
    let mut tables = sample_tables(state, stirling, rng);
    split_tables(&mut tables, rng);
    stats.tables = tables.total_tables();
    stats.unsticky_tables = tables.total_unsticky();
    let freeze = opts.freeze;
    let priors = opts.priors;
    if !freeze.gamma {
        let (g, fallback) = sample_gamma(state.k(), stats.unsticky_tables, priors.gamma, rng);
        state.weights.hyper.gamma = g;
        stats.gamma_fallback = fallback;
    }
    let (beta, remainder) = resample_beta(&tables, state.weights.gamma(), rng);
    state.weights.beta = beta;
    state.weights.remainder = remainder;
    let hyper = &mut state.weights.hyper;
    let mut conc = hyper.alpha + hyper.kappa;
    let mut ratio = if conc > 0.0 { hyper.kappa / conc } else { 0.0 };
    if !freeze.concentration {
        conc = sample_concentration(&tables, conc.max(f64::MIN_POSITIVE), ratio, priors.concentration, rng);
    }
    if !freeze.ratio && tables.restaurants.iter().any(|r| !r.initial) {
        ratio = sample_ratio(&tables, conc, ratio, priors.ratio, rng);
    }
    if !(freeze.concentration && freeze.ratio) {
        hyper.alpha = conc * (1.0 - ratio);
        hyper.kappa = conc * ratio;
    }
    stats
}
