//! Multi-chain orchestration: configuration, checkpoints and output files.
//!
//! A run directory holds `chain-{c}.csv` traces, `chain-{c}.ckpt`
//! checkpoints, `estimate-{c}.json` recovery estimates and `summary.json`.

mod chain;
mod checkpoint;
mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use chain::{chain_rng, retained, Chain};
pub use checkpoint::{Checkpoint, MAGIC, VERSION};
pub use config::{DataSection, GeneratorKind, GeneratorSpec, HyperSection, ModelKind, RunConfig, RunSection};

use crate::analysis::{
    l2_compat, l2_membership, loglik_summary, mode, summarize, ChainTrace, Metric, Report, RetainPolicy,
};
use crate::error::{Error, Result};
use crate::generator::{DatasetBundle, GroundTruth};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DIM3_THREADS";

/// Runtime knobs that do not affect the sampled chains.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunControl {
    /// Stop every chain after this many total sweeps without finishing the
    /// run (as if the process had been killed).
    pub stop_after: Option<u64>,
    /// Worker thread cap; falls back to the environment variable.
    pub threads: Option<usize>,
}

/// Point estimates of one chain, written to `estimate-{c}.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEstimate {
    pub chain: u32,
    pub samples: usize,
    /// Posterior mode of K over retained sweeps.
    pub k_mode: usize,
    /// Per-node memberships averaged over time and retained sweeps.
    pub membership: Vec<Vec<f64>>,
    /// Posterior-mean compatibilities of the `k_mode` dominant communities.
    pub compat: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub chains: Vec<Chain>,
    /// False when the run stopped early.
    pub completed: bool,
    pub report: Option<Report>,
    pub seconds_per_iteration: f64,
}

impl RunOutcome {
    pub fn traces(&self) -> Vec<ChainTrace> {
        self.chains.iter().map(|c| c.trace.clone()).collect()
    }
}

pub fn trace_path(dir: &Path, chain: u32) -> PathBuf {
    dir.join(format!("chain-{chain}.csv"))
}

pub fn checkpoint_path(dir: &Path, chain: u32) -> PathBuf {
    dir.join(format!("chain-{chain}.ckpt"))
}

pub fn estimate_path(dir: &Path, chain: u32) -> PathBuf {
    dir.join(format!("estimate-{chain}.json"))
}

pub fn summary_path(dir: &Path) -> PathBuf {
    dir.join("summary.json")
}

/// Thread cap from `DIM3_THREADS`, if set to a positive integer.
pub fn thread_cap_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV}: expected a positive integer, got '{v}'"
            ))),
        },
    }
}

/// Starts every chain from scratch.
pub fn run(config: &RunConfig, control: &RunControl) -> Result<RunOutcome> {
    config.validate()?;
    let bundle = config.data.load()?;
    prepare_output(&config.run.output)?;
    let chains = (0..config.run.chains)
        .map(|id| Chain::start(config, &bundle.data, id))
        .collect::<Result<Vec<_>>>()?;
    drive(config, &bundle, chains, control)
}

/// Continues every chain from its checkpoint in the output directory.
pub fn resume(config: &RunConfig, control: &RunControl) -> Result<RunOutcome> {
    config.validate()?;
    let bundle = config.data.load()?;
    let dir = &config.run.output;
    let chains = (0..config.run.chains)
        .map(|id| {
            let ckpt = Checkpoint::load(checkpoint_path(dir, id), &bundle.data)?;
            if ckpt.chain != id {
                return Err(Error::Checkpoint(format!(
                    "file for chain {id} holds chain {}",
                    ckpt.chain
                )));
            }
            Chain::from_checkpoint(config, ckpt)
        })
        .collect::<Result<Vec<_>>>()?;
    drive(config, &bundle, chains, control)
}

fn prepare_output(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".dim3-write-test");
    std::fs::write(&probe, b"").map_err(|e| Error::io(dir, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(dir, e))
}

fn drive(
    config: &RunConfig,
    bundle: &DatasetBundle,
    mut chains: Vec<Chain>,
    control: &RunControl,
) -> Result<RunOutcome> {
    let cap = match control.threads {
        Some(n) => Some(n),
        None => thread_cap_from_env()?,
    };
    let workers = cap.unwrap_or(usize::MAX).min(chains.len()).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let target = config.run.iterations;
    let stop = control.stop_after.map_or(target, |s| s.min(target));
    let dir = &config.run.output;
    let start = Instant::now();
    let swept: u64 = chains.iter().map(|c| stop.saturating_sub(c.iteration)).sum();
    pool.install(|| {
        chains.par_iter_mut().try_for_each(|chain| -> Result<()> {
            while chain.iteration < stop {
                chain.step(&bundle.data, config)?;
                let every = config.run.checkpoint_interval;
                if every > 0 && (chain.iteration % every == 0 || chain.iteration == target) {
                    chain.checkpoint(config).save(checkpoint_path(dir, chain.id))?;
                }
            }
            Ok(())
        })
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    let per_chain_sweeps = swept as f64 / chains.len() as f64;
    let seconds_per_iteration = if swept > 0 {
        elapsed * workers as f64 / (per_chain_sweeps * chains.len() as f64)
    } else {
        0.0
    };
    let completed = chains.iter().all(|c| c.iteration >= target);
    if !completed {
        return Ok(RunOutcome {
            chains,
            completed,
            report: None,
            seconds_per_iteration,
        });
    }
    let mut estimates = Vec::new();
    for chain in &chains {
        chain.trace.write_csv(trace_path(dir, chain.id))?;
        let est = estimate(chain, config, bundle.data.n());
        write_json(&estimate_path(dir, chain.id), &est)?;
        estimates.push(est);
    }
    let traces: Vec<ChainTrace> = chains.iter().map(|c| c.trace.clone()).collect();
    let mut report = summarize(&traces, policy(config));
    report.insert("seconds_per_iteration".into(), Metric::Value(seconds_per_iteration));
    if let Some(truth) = &bundle.truth {
        report.extend(recovery_metrics(&estimates, truth));
    }
    write_json(&summary_path(dir), &report)?;
    Ok(RunOutcome {
        chains,
        completed,
        report: Some(report),
        seconds_per_iteration,
    })
}

pub fn policy(config: &RunConfig) -> RetainPolicy {
    RetainPolicy {
        burn_in: config.run.burn_in,
        thin: config.run.thin,
    }
}

/// Recovery estimates of a finished chain.
pub fn estimate(chain: &Chain, config: &RunConfig, n: usize) -> ChainEstimate {
    let ks: Vec<usize> = chain
        .trace
        .rows
        .iter()
        .filter(|r| retained(config, r.iteration))
        .map(|r| r.k)
        .collect();
    let k_mode = mode(&ks).unwrap_or(chain.state.k());
    ChainEstimate {
        chain: chain.id,
        samples: chain.recovery.samples(),
        k_mode,
        membership: chain.recovery.membership_by_node(n),
        compat: chain.recovery.compat_dominant(k_mode),
    }
}

/// `l2_membership/chain{c}`, `l2_compat/chain{c}` and their chain means.
pub fn recovery_metrics(estimates: &[ChainEstimate], truth: &GroundTruth) -> Report {
    let mut out = Report::new();
    let truth_compat = truth.compat.rows();
    let mut m = Vec::new();
    let mut c = Vec::new();
    for e in estimates {
        if e.samples == 0 {
            out.insert(
                format!("l2_membership/chain{}", e.chain),
                Metric::Skipped {
                    skipped: "no retained samples".into(),
                },
            );
            continue;
        }
        let lm = l2_membership(&e.membership, &truth.membership);
        let lc = l2_compat(&e.compat, &truth_compat);
        out.insert(format!("l2_membership/chain{}", e.chain), Metric::Value(lm));
        out.insert(format!("l2_compat/chain{}", e.chain), Metric::Value(lc));
        m.push(lm);
        c.push(lc);
    }
    if !m.is_empty() {
        out.insert(
            "l2_membership".into(),
            Metric::Value(m.iter().sum::<f64>() / m.len() as f64),
        );
        out.insert(
            "l2_compat".into(),
            Metric::Value(c.iter().sum::<f64>() / c.len() as f64),
        );
    }
    out
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numeric(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Trace files `chain-*.csv` in a run directory, ordered by chain id.
pub fn find_traces(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(id) = name
            .strip_prefix("chain-")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<u32>().ok())
        {
            found.push((id, path));
        }
    }
    if found.is_empty() {
        return Err(Error::Config(format!("no chain-*.csv traces in {}", dir.display())));
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

/// Fit report over the traces of a run directory: the pooled retained
/// log-likelihood summary, plus recovery distances when `truth` is given
/// (read from the `estimate-{c}.json` files next to the traces).
pub fn evaluate(dir: &Path, truth: Option<&GroundTruth>, policy: RetainPolicy) -> Result<Report> {
    let traces = find_traces(dir)?
        .iter()
        .map(ChainTrace::read_csv)
        .collect::<Result<Vec<_>>>()?;
    let ll: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.retained(policy.burn_in, policy.thin))
        .map(|r| r.loglik)
        .collect();
    let mut report = Report::new();
    report.insert(
        "loglik".into(),
        match loglik_summary(&ll) {
            Ok(i) => Metric::Interval(i),
            Err(e) => Metric::Skipped { skipped: e.to_string() },
        },
    );
    if let Some(truth) = truth {
        let mut estimates = Vec::new();
        for t in &traces {
            let path = estimate_path(dir, t.chain);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let est: ChainEstimate = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
            estimates.push(est);
        }
        report.extend(recovery_metrics(&estimates, truth));
    }
    Ok(report)
}

/// Writes a generated dataset.
pub fn generate(spec: &GeneratorSpec, out: &Path) -> Result<DatasetBundle> {
    let bundle = spec.generate()?;
    crate::generator::save_dataset(&bundle, out)?;
    Ok(bundle)
}
