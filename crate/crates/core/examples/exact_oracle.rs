//! Compares the collapsed Gibbs sampler with the brute-force posterior on a
//! tiny network (3 nodes, 2 time steps, 2 communities).
//!
//! `cargo run --release --example exact_oracle -- [sweeps]`

use dim3::gibbs::{finite_sweep, Workspace};
use dim3::model::{
    enumerate_exact, flatten_labels, Dynamics, GlobalWeights, Hyperparameters, LabelState, RelationTensor,
};
use dim3::slice::slice_sweep_mtv;
use dim3::{ChainState, SweepOrder};
use dim3::{Freeze, SamplerOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dim3::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut data = RelationTensor::zeros(3, 2);
    for (i, j, t) in data.clone().pairs() {
        data.set(i, j, t, rng.random_bool(0.5));
    }
    let hyper = Hyperparameters {
        gamma: 1.0,
        alpha: 1.5,
        kappa: 2.0,
        lambda1: 1.0,
        lambda2: 1.0,
    };
    let weights = GlobalWeights::truncated(vec![0.6, 0.4], hyper)?;
    for dynamics in [Dynamics::Mtv, Dynamics::Mti] {
        let exact = enumerate_exact(&data, 2, &weights, dynamics)?;
        // marginal of the first pair's (sender, receiver) labels at each time
        let view = |flat: &[u32]| (flat[0] * 2 + flat[1]) as usize * 4 + (flat[12] * 2 + flat[13]) as usize;
        let truth = exact.distribution(16, view);

        let labels = LabelState::random(3, 2, 2, &mut rng);
        let mut state = ChainState::truncated(&data, labels, weights.clone(), dynamics)?;
        let mut ws = Workspace::new();
        let sweeps: usize = std::env::args()
            .nth(1)
            .map_or(100_000, |a| a.parse().expect("sweep count"));
        let mut hist = vec![0.0; 16];
        for _ in 0..sweeps {
            finite_sweep(&mut state, &data, SweepOrder::Lexicographic, &mut ws, &mut rng);
            hist[view(&flatten_labels(&state.labels))] += 1.0 / sweeps as f64;
        }
        let tv: f64 = 0.5 * truth.iter().zip(&hist).map(|(a, b)| (a - b).abs()).sum::<f64>();
        println!("{dynamics} gibbs: total variation on the first pair's label chain = {tv:.4}");
        if dynamics == Dynamics::Mtv {
            let opts = SamplerOptions {
                freeze: Freeze::ALL,
                ..SamplerOptions::default()
            };
            let mut hist = vec![0.0; 16];
            for _ in 0..sweeps {
                slice_sweep_mtv(&mut state, &data, &opts, &mut ws, &mut rng);
                hist[view(&flatten_labels(&state.labels))] += 1.0 / sweeps as f64;
            }
            let tv: f64 = 0.5 * truth.iter().zip(&hist).map(|(a, b)| (a - b).abs()).sum::<f64>();
            println!("{dynamics} slice: total variation on the first pair's label chain = {tv:.4}");
        }
    }
    Ok(())
}
