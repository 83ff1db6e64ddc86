//! Recovers memberships and the compatibility matrix of the benchmark
//! network, aligning estimated communities to the truth before comparing.
//!
//! `cargo run --release --example recovery -- [iterations]`

use dim3::analysis::{align_communities, l2_compat, l2_membership, mode, permute_columns, RecoveryAccumulator};
use dim3::generator::{generate_fixed, synthetic_truth};
use dim3::gibbs::{gibbs_sweep, Workspace};
use dim3::model::{Dynamics, Hyperparameters};
use dim3::{ChainState, Freeze, SamplerOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dim3::Result<()> {
    let iterations: usize = std::env::args()
        .nth(1)
        .map_or(6000, |a| a.parse().expect("iteration count"));
    let n = 20;
    let truth = synthetic_truth(1, n)?;
    let data = generate_fixed(&truth, n, 3, 1)?.data;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut state = ChainState::initial(&data, 10, Hyperparameters::default(), Dynamics::Mtv, &mut rng)?;
    let mut ws = Workspace::new();
    let mut acc = RecoveryAccumulator::new();
    let mut ks = Vec::new();
    for it in 0..iterations {
        // hyperparameters held for the first quarter
        let opts = SamplerOptions {
            freeze: if it < iterations / 4 {
                Freeze::ALL
            } else {
                Freeze::default()
            },
            ..SamplerOptions::default()
        };
        gibbs_sweep(&mut state, &data, &opts, &mut ws, &mut rng);
        if it >= iterations / 2 {
            acc.add(&state.counts, 1.0, 1.0);
            ks.push(state.k());
        }
    }
    let k = mode(&ks).unwrap_or(1);
    let membership = acc.membership_by_node(n);
    let compat = acc.compat_dominant(k);
    let perm = align_communities(&membership, &truth.membership);
    println!("K mode {k}");
    println!("membership error {:.3}", l2_membership(&membership, &truth.membership));
    println!("compatibility error {:.3}", l2_compat(&compat, &truth.compat.rows()));
    for group in 0..4 {
        let row = &permute_columns(&membership, &perm)[group * n / 4];
        let shown: Vec<String> = row.iter().map(|x| format!("{x:.2}")).collect();
        println!(
            "group {group} node {:>2}: {}  (truth {:?})",
            group * n / 4,
            shown.join(" "),
            truth.membership[group * n / 4]
        );
    }
    Ok(())
}
