//! Collapsed Gibbs sampling of the time-varying model on a simulated network,
//! printing the number of communities and the log-likelihood as it goes.
//!
//! `cargo run --release --example gibbs_mtv -- [iterations]`

use dim3::generator::{generate_fixed, synthetic_truth};
use dim3::gibbs::{gibbs_sweep, Workspace};
use dim3::model::{collapsed_loglik, Dynamics, Hyperparameters};
use dim3::{ChainState, SamplerOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dim3::Result<()> {
    let iterations: usize = std::env::args()
        .nth(1)
        .map_or(2000, |a| a.parse().expect("iteration count"));
    let bundle = generate_fixed(&synthetic_truth(1, 20)?, 20, 3, 7)?;
    let data = &bundle.data;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = ChainState::initial(data, 10, Hyperparameters::default(), Dynamics::Mtv, &mut rng)?;
    let opts = SamplerOptions::default();
    let mut ws = Workspace::new();
    let every = (iterations / 10).max(1);
    for it in 1..=iterations {
        let stats = gibbs_sweep(&mut state, data, &opts, &mut ws, &mut rng);
        if it % every == 0 {
            let h = state.weights.hyper;
            println!(
                "iter {it:>6}  K {:>2}  tables {:>4}  loglik {:>9.2}  gamma {:.3}  alpha {:.3}  kappa {:.3}",
                stats.k,
                stats.tables,
                collapsed_loglik(state.counts.totals(), h.lambda1, h.lambda2),
                h.gamma,
                h.alpha,
                h.kappa
            );
        }
    }
    state.check(data)?;
    Ok(())
}
