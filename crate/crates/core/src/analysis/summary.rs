use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{geweke_z, iat, psrf, ChainTrace, Stat};
use crate::error::{Error, Result};
use crate::math::mean_var;

/// Mean with a symmetric 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Mean of the retained values and `mean -/+ 1.96 * standard error`.
pub fn loglik_summary(values: &[f64]) -> Result<Interval> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "log-likelihood summary needs at least 2 retained samples".into(),
        ));
    }
    let (mean, var) = mean_var(values);
    let half = 1.96 * (var / values.len() as f64).sqrt();
    Ok(Interval {
        mean,
        lower: mean - half,
        upper: mean + half,
    })
}

/// One entry of a summary report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Value(f64),
    Estimate { estimate: f64, upper: f64 },
    Interval(Interval),
    Skipped { skipped: String },
}

impl Metric {
    pub fn value(&self) -> Option<f64> {
        match self {
            Metric::Value(v) => Some(*v),
            Metric::Estimate { estimate, .. } => Some(*estimate),
            Metric::Interval(i) => Some(i.mean),
            Metric::Skipped { .. } => None,
        }
    }

    fn from_result<T>(r: Result<T>, f: impl FnOnce(T) -> Metric) -> Metric {
        match r {
            Ok(v) => f(v),
            Err(e) => Metric::Skipped { skipped: e.to_string() },
        }
    }
}

/// Metric name to value, serialized as a JSON object.
pub type Report = BTreeMap<String, Metric>;

/// How traces are reduced before diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetainPolicy {
    /// Leading fraction discarded as burn-in.
    pub burn_in: f64,
    /// Keep every `thin`-th retained iteration.
    pub thin: usize,
}

impl Default for RetainPolicy {
    fn default() -> Self {
        Self { burn_in: 0.5, thin: 1 }
    }
}

/// Convergence and fit metrics over a set of chains.
///
/// Keys: `psrf_K`, `psrf_D` (multi-chain), `geweke_K/chain{c}`,
/// `geweke_D/chain{c}`, `iat_K/chain{c}`, `iat_D/chain{c}`, `K_mode`,
/// `K_mean`, `loglik` (pooled retained samples) and `retained`.
pub fn summarize(traces: &[ChainTrace], policy: RetainPolicy) -> Report {
    let mut out = Report::new();
    let retained: Vec<_> = traces.iter().map(|t| t.retained(policy.burn_in, policy.thin)).collect();
    let series = |stat: Stat| -> Vec<Vec<f64>> {
        retained
            .iter()
            .map(|r| r.iter().map(|x| x.get(stat)).collect())
            .collect()
    };
    for (name, stat) in [("K", Stat::K), ("D", Stat::D)] {
        let chains = series(stat);
        out.insert(
            format!("psrf_{name}"),
            Metric::from_result(psrf(&chains), |(estimate, upper)| Metric::Estimate { estimate, upper }),
        );
        for (trace, full) in traces.iter().zip(traces.iter().map(|t| t.series(stat))) {
            let c = trace.chain;
            out.insert(
                format!("geweke_{name}/chain{c}"),
                Metric::from_result(
                    geweke_z(&full[(full.len() as f64 * policy.burn_in) as usize..], 0.1, 0.5),
                    Metric::Value,
                ),
            );
        }
        for (trace, s) in traces.iter().zip(&chains) {
            out.insert(
                format!("iat_{name}/chain{}", trace.chain),
                Metric::from_result(iat(s), Metric::Value),
            );
        }
    }
    let ks: Vec<usize> = retained.iter().flatten().map(|r| r.k).collect();
    out.insert("retained".into(), Metric::Value(ks.len() as f64));
    if let Some(mode) = mode(&ks) {
        out.insert("K_mode".into(), Metric::Value(mode as f64));
        out.insert(
            "K_mean".into(),
            Metric::Value(ks.iter().sum::<usize>() as f64 / ks.len() as f64),
        );
    }
    let ll: Vec<f64> = retained.iter().flatten().map(|r| r.loglik).collect();
    out.insert(
        "loglik".into(),
        Metric::from_result(loglik_summary(&ll), Metric::Interval),
    );
    out
}

/// Most frequent value (smallest on ties).
pub fn mode(xs: &[usize]) -> Option<usize> {
    let mut counts = BTreeMap::new();
    for &x in xs {
        *counts.entry(x).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, c)| c == best).map(|(x, _)| x)
}
