//! Collapsed Gibbs sampler over pair labels, for both dynamics and for the
//! finite baselines.

mod pair;
mod tables;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::hyper::update_globals;
use crate::model::{Dynamics, RelationTensor};
use crate::state::{ChainState, SamplerOptions, SweepOrder, SweepStats};

pub use pair::{crf_predictive, forward_log_factor, sample_pair_labels, PairScratch};
pub use tables::{
    resample_beta, sample_table_count, sample_tables, split_tables, Restaurant, StirlingTable, TableCell, TableCounts,
};

/// Buffers reused across sweeps.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub pair: PairScratch,
    pub stirling: StirlingTable,
    order: Vec<(usize, usize, usize)>,
}

impl Workspace {
    pub fn new() -> Self {
        Self {
            stirling: StirlingTable::new(),
            ..Self::default()
        }
    }
}

/// Visits every pair once, compacts, then updates tables, weights and
/// hyperparameters.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    opts: &SamplerOptions,
    ws: &mut Workspace,
    rng: &mut R,
) -> SweepStats {
    label_pass(state, data, opts.order, ws, rng);
    state.compact();
    update_globals(state, opts, &mut ws.stirling, rng)
}

pub fn gibbs_sweep_mtv<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    opts: &SamplerOptions,
    ws: &mut Workspace,
    rng: &mut R,
) -> SweepStats {
    assert_eq!(
        state.dynamics,
        Dynamics::Mtv,
        "time-varying sweep on a {} state",
        state.dynamics
    );
    gibbs_sweep(state, data, opts, ws, rng)
}

pub fn gibbs_sweep_mti<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    opts: &SamplerOptions,
    ws: &mut Workspace,
    rng: &mut R,
) -> SweepStats {
    assert_eq!(
        state.dynamics,
        Dynamics::Mti,
        "time-invariant sweep on a {} state",
        state.dynamics
    );
    gibbs_sweep(state, data, opts, ws, rng)
}

/// Sweep of a finite model (f-MTV / f-MTI): labels only, over the fixed
/// community set.
pub fn finite_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    order: SweepOrder,
    ws: &mut Workspace,
    rng: &mut R,
) -> SweepStats {
    assert!(state.truncated, "finite sweep needs a truncated state");
    label_pass(state, data, order, ws, rng);
    SweepStats {
        k: state.k(),
        ..SweepStats::default()
    }
}

fn label_pass<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RelationTensor,
    order: SweepOrder,
    ws: &mut Workspace,
    rng: &mut R,
) {
    ws.order.clear();
    ws.order.extend(data.pairs());
    if order == SweepOrder::Random {
        ws.order.shuffle(rng);
    }
    for idx in 0..ws.order.len() {
        let (i, j, t) = ws.order[idx];
        sample_pair_labels(state, data, i, j, t, &mut ws.pair, rng);
    }
}
