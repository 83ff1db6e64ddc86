#![allow(dead_code)]

use dim3::generator::{generate_mti, generate_mtv};
use dim3::gibbs::{gibbs_sweep, Workspace};
use dim3::math::{beta_variate, gamma_variate, mean_var};
use dim3::model::{rebuild_counts, Dynamics, Hyperparameters, LabelState, RelationTensor};
use dim3::slice::slice_sweep_mtv;
use dim3::{ChainState, SamplerOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    GibbsMtv,
    SliceMtv,
    GibbsMti,
}

impl Kernel {
    pub fn dynamics(self) -> Dynamics {
        match self {
            Kernel::GibbsMti => Dynamics::Mti,
            _ => Dynamics::Mtv,
        }
    }

    pub fn sweep<R: Rng>(
        self,
        state: &mut ChainState,
        data: &RelationTensor,
        opts: &SamplerOptions,
        ws: &mut Workspace,
        rng: &mut R,
    ) {
        match self {
            Kernel::SliceMtv => {
                slice_sweep_mtv(state, data, opts, ws, rng);
            }
            _ => {
                gibbs_sweep(state, data, opts, ws, rng);
            }
        }
    }
}

/// Mean over observed pairs of the posterior-mean link probability of the
/// pair's community cell.
pub fn mean_edge_predictive(labels: &LabelState, data: &RelationTensor, lambda1: f64, lambda2: f64) -> f64 {
    let counts = rebuild_counts(labels, data).unwrap();
    let mut total = 0.0;
    let mut m = 0usize;
    for (i, j, t) in data.pairs() {
        let (s, r) = labels.get(i, j, t);
        let (ones, zeros) = counts.totals().get(s as usize, r as usize);
        total += (ones as f64 + lambda1) / ((ones + zeros) as f64 + lambda1 + lambda2);
        m += 1;
    }
    total / m as f64
}

pub const GEWEKE_STATS: [&str; 4] = ["K", "mean edge predictive", "alpha+kappa", "gamma"];

fn geweke_stats(labels: &LabelState, data: &RelationTensor, hyper: &Hyperparameters) -> [f64; 4] {
    [
        labels.k() as f64,
        mean_edge_predictive(labels, data, hyper.lambda1, hyper.lambda2),
        hyper.alpha + hyper.kappa,
        hyper.gamma,
    ]
}

fn prior_hyper<R: Rng>(rng: &mut R) -> Hyperparameters {
    let gamma = gamma_variate(1.0, 1.0, rng);
    let conc = gamma_variate(1.0, 1.0, rng);
    let ratio = beta_variate(1.0, 1.0, rng);
    Hyperparameters {
        gamma,
        alpha: conc * (1.0 - ratio),
        kappa: conc * ratio,
        lambda1: 1.0,
        lambda2: 1.0,
    }
}

/// Batch-means standard error of the mean.
pub fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    (mean_var(&means).1 / batches as f64).sqrt()
}

/// Prior draws versus successive-conditional draws (sweep, then fresh data
/// given the labels) on a 4-node, 2-step network. Returns one z-score per
/// statistic in [`GEWEKE_STATS`].
pub fn geweke_z(kernel: Kernel, draws: usize, seed: u64) -> Vec<f64> {
    let (n, t) = (4, 2);
    let dynamics = kernel.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simulate = |hyper: &Hyperparameters, seed: u64| match dynamics {
        Dynamics::Mtv => generate_mtv(n, t, hyper, seed).unwrap(),
        Dynamics::Mti => generate_mti(n, t, hyper, seed).unwrap(),
    };
    let mut prior = vec![Vec::with_capacity(draws); 4];
    for _ in 0..draws {
        let hyper = prior_hyper(&mut rng);
        let b = simulate(&hyper, rng.random());
        let latent = b.latent.unwrap();
        for (s, v) in prior.iter_mut().zip(geweke_stats(&latent.labels, &b.data, &hyper)) {
            s.push(v);
        }
    }
    let hyper = prior_hyper(&mut rng);
    let b = simulate(&hyper, rng.random());
    let latent = b.latent.unwrap();
    let mut data = b.data;
    let mut state = ChainState::new(&data, latent.labels, latent.weights.unwrap(), dynamics).unwrap();
    let opts = SamplerOptions::default();
    let mut ws = Workspace::new();
    let mut chain = vec![Vec::with_capacity(draws); 4];
    for _ in 0..draws {
        kernel.sweep(&mut state, &data, &opts, &mut ws, &mut rng);
        // fresh W from its prior, then E given Z and W
        let k = state.k();
        let h = state.weights.hyper;
        let w: Vec<f64> = (0..k * k)
            .map(|_| beta_variate(h.lambda1, h.lambda2, &mut rng))
            .collect();
        for (i, j, tt) in data.clone().pairs() {
            let (s, r) = state.labels.get(i, j, tt);
            data.set(i, j, tt, rng.random_bool(w[s as usize * k + r as usize]));
        }
        state = ChainState::new(&data, state.labels.clone(), state.weights.clone(), dynamics).unwrap();
        for (s, v) in chain.iter_mut().zip(geweke_stats(&state.labels, &data, &h)) {
            s.push(v);
        }
    }
    prior
        .iter()
        .zip(&chain)
        .map(|(p, c)| {
            let (mp, vp) = mean_var(p);
            let mc = mean_var(c).0;
            let se = (vp / p.len() as f64 + batch_se(c, 50).powi(2)).sqrt();
            (mp - mc) / se
        })
        .collect()
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
