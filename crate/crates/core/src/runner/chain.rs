use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{density_d, ChainTrace, RecoveryAccumulator, TraceRow};
use crate::error::{Error, Result};
use crate::gibbs::{finite_sweep, gibbs_sweep, Workspace};
use crate::model::{collapsed_loglik, RelationTensor};
use crate::runner::checkpoint::Checkpoint;
use crate::runner::config::{ModelKind, RunConfig};
use crate::slice::slice_sweep_mtv;
use crate::state::{ChainState, Freeze, SamplerOptions};

/// One Markov chain together with its rng, trace and running estimates.
#[derive(Debug, Clone)]
pub struct Chain {
    pub id: u32,
    pub model: ModelKind,
    pub state: ChainState,
    pub rng: ChaCha8Rng,
    /// Sweeps completed.
    pub iteration: u64,
    pub trace: ChainTrace,
    pub recovery: RecoveryAccumulator,
    opts: SamplerOptions,
    ws: Workspace,
}

/// Chain `id` draws from stream `id` of the run seed.
pub fn chain_rng(seed: u64, id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn options(config: &RunConfig) -> SamplerOptions {
    SamplerOptions {
        priors: config.hyper.priors,
        freeze: if config.run.model.is_finite() {
            Freeze::ALL
        } else {
            config.hyper.freeze()
        },
        order: config.run.order,
    }
}

impl Chain {
    /// Random starting state for chain `id`.
    pub fn start(config: &RunConfig, data: &RelationTensor, id: u32) -> Result<Self> {
        let mut rng = chain_rng(config.run.seed, id);
        let model = config.run.model;
        let hyper = config.hyper.values();
        let state = if model.is_finite() {
            ChainState::finite(data, config.run.k_fixed, hyper, model.dynamics(), &mut rng)?
        } else {
            ChainState::initial(data, config.run.k_init, hyper, model.dynamics(), &mut rng)?
        };
        Ok(Self {
            id,
            model,
            state,
            rng,
            iteration: 0,
            trace: ChainTrace::new(id),
            recovery: RecoveryAccumulator::new(),
            opts: options(config),
            ws: Workspace::new(),
        })
    }

    pub fn from_checkpoint(config: &RunConfig, ckpt: Checkpoint) -> Result<Self> {
        if ckpt.digest != config.digest() {
            return Err(Error::Checkpoint(format!(
                "chain {}: checkpoint was written under a different configuration",
                ckpt.chain
            )));
        }
        if ckpt.state.dynamics != config.run.model.dynamics() || ckpt.state.truncated != config.run.model.is_finite() {
            return Err(Error::Checkpoint(format!(
                "chain {}: checkpoint does not match model {}",
                ckpt.chain, config.run.model
            )));
        }
        Ok(Self {
            id: ckpt.chain,
            model: config.run.model,
            state: ckpt.state,
            rng: ckpt.rng,
            iteration: ckpt.iteration,
            trace: ckpt.trace,
            recovery: ckpt.recovery,
            opts: options(config),
            ws: Workspace::new(),
        })
    }

    pub fn checkpoint(&self, config: &RunConfig) -> Checkpoint {
        Checkpoint {
            digest: config.digest(),
            chain: self.id,
            iteration: self.iteration,
            rng: self.rng.clone(),
            state: self.state.clone(),
            trace: self.trace.clone(),
            recovery: self.recovery.clone(),
        }
    }

    /// One sweep, then a trace row; retained sweeps also feed the recovery
    /// estimates.
    pub fn step(&mut self, data: &RelationTensor, config: &RunConfig) -> Result<()> {
        let mut opts = self.opts;
        if self.iteration < config.run.warmup {
            opts.freeze = Freeze::ALL;
        }
        match self.model {
            ModelKind::MtvGibbs | ModelKind::MtiGibbs => {
                gibbs_sweep(&mut self.state, data, &opts, &mut self.ws, &mut self.rng);
            }
            ModelKind::MtvSlice => {
                slice_sweep_mtv(&mut self.state, data, &opts, &mut self.ws, &mut self.rng);
            }
            ModelKind::FMtv | ModelKind::FMti => {
                finite_sweep(&mut self.state, data, self.opts.order, &mut self.ws, &mut self.rng);
            }
        }
        self.iteration += 1;
        let h = self.state.weights.hyper;
        let row = TraceRow {
            iteration: self.iteration,
            chain: self.id,
            k: self.state.k(),
            d: density_d(&self.state, data),
            loglik: collapsed_loglik(self.state.counts.totals(), h.lambda1, h.lambda2),
            gamma: h.gamma,
            alpha: h.alpha,
            kappa: h.kappa,
        };
        if !(row.d.is_finite()
            && row.loglik.is_finite()
            && h.gamma.is_finite()
            && h.alpha.is_finite()
            && h.kappa.is_finite())
        {
            return Err(Error::Numeric(format!(
                "chain {} produced non-finite values at iteration {}: {row:?}",
                self.id, self.iteration
            )));
        }
        self.trace.push(row)?;
        if retained(config, self.iteration) {
            self.recovery.add(&self.state.counts, h.lambda1, h.lambda2);
        }
        Ok(())
    }
}

/// Whether sweep number `iteration` (1-based) survives burn-in and thinning,
/// matching [`ChainTrace::retained`] on the final trace.
pub fn retained(config: &RunConfig, iteration: u64) -> bool {
    let skip = (config.run.iterations as f64 * config.run.burn_in).floor() as u64;
    let r = iteration - 1;
    r >= skip && (r - skip) % config.run.thin as u64 == 0
}
