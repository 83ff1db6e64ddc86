//! The slice sampler and the collapsed Gibbs sampler side by side on the same
//! data: both target the same posterior, so their community counts and
//! log-likelihoods should settle in the same range.
//!
//! `cargo run --release --example slice_mtv -- [iterations]`

use dim3::analysis::mode;
use dim3::generator::{generate_fixed, synthetic_truth};
use dim3::gibbs::{gibbs_sweep, Workspace};
use dim3::model::{collapsed_loglik, Dynamics, Hyperparameters};
use dim3::slice::slice_sweep_mtv;
use dim3::{ChainState, SamplerOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() -> dim3::Result<()> {
    let iterations: usize = std::env::args()
        .nth(1)
        .map_or(2000, |a| a.parse().expect("iteration count"));
    let bundle = generate_fixed(&synthetic_truth(1, 16)?, 16, 3, 3)?;
    let data = &bundle.data;
    for slice in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state = ChainState::initial(data, 10, Hyperparameters::default(), Dynamics::Mtv, &mut rng)?;
        let mut ws = Workspace::new();
        let opts = SamplerOptions::default();
        let mut ks = Vec::new();
        let mut ll = 0.0;
        let start = Instant::now();
        for it in 0..iterations {
            if slice {
                slice_sweep_mtv(&mut state, data, &opts, &mut ws, &mut rng);
            } else {
                gibbs_sweep(&mut state, data, &opts, &mut ws, &mut rng);
            }
            if it >= iterations / 2 {
                ks.push(state.k());
                ll += collapsed_loglik(state.counts.totals(), 1.0, 1.0);
            }
        }
        println!(
            "{:<6} K mode {:?}  mean loglik {:.2}  {:.2} ms/iter",
            if slice { "slice" } else { "gibbs" },
            mode(&ks),
            ll / ks.len().max(1) as f64,
            1e3 * start.elapsed().as_secs_f64() / iterations as f64
        );
    }
    Ok(())
}
