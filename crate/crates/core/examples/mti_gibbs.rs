//! Fits the time-invariant model to a network simulated from it and shows the
//! learned stickiness: label chains mostly keep their community between steps.
//!
//! `cargo run --release --example mti_gibbs -- [iterations]`

use dim3::generator::generate_mti;
use dim3::gibbs::{gibbs_sweep, Workspace};
use dim3::model::{Dynamics, Hyperparameters};
use dim3::{ChainState, SamplerOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn persistence(state: &ChainState) -> f64 {
    let l = &state.labels;
    let (mut same, mut total) = (0usize, 0usize);
    for (i, j, t) in l.pairs().filter(|&(_, _, t)| t > 0) {
        let (a, b) = l.get(i, j, t);
        let (c, d) = l.get(i, j, t - 1);
        same += usize::from(a == c) + usize::from(b == d);
        total += 2;
    }
    same as f64 / total.max(1) as f64
}

fn main() -> dim3::Result<()> {
    let iterations: usize = std::env::args()
        .nth(1)
        .map_or(1500, |a| a.parse().expect("iteration count"));
    let truth = Hyperparameters {
        gamma: 2.0,
        alpha: 1.0,
        kappa: 8.0,
        ..Hyperparameters::default()
    };
    let bundle = generate_mti(15, 5, &truth, 11)?;
    let latent = bundle.latent.as_ref().expect("simulated data");
    println!("simulated: K = {}", latent.labels.k());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut state = ChainState::initial(&bundle.data, 10, Hyperparameters::default(), Dynamics::Mti, &mut rng)?;
    let mut ws = Workspace::new();
    let opts = SamplerOptions::default();
    for it in 1..=iterations {
        gibbs_sweep(&mut state, &bundle.data, &opts, &mut ws, &mut rng);
        if it % (iterations / 5).max(1) == 0 {
            let h = state.weights.hyper;
            println!(
                "iter {it:>5}  K {:>2}  alpha {:.2}  kappa {:.2}  label persistence {:.2}",
                state.k(),
                h.alpha,
                h.kappa,
                persistence(&state)
            );
        }
    }
    Ok(())
}
