//! Convergence diagnostics for several chains: potential scale reduction,
//! Geweke scores and autocorrelation times of K and the density statistic.
//!
//! `cargo run --release --example diagnostics -- [iterations]`

use dim3::analysis::{summarize, RetainPolicy};
use dim3::runner::{run, GeneratorKind, GeneratorSpec, RunConfig, RunControl};

fn main() -> dim3::Result<()> {
    let iterations: u64 = std::env::args()
        .nth(1)
        .map_or(2000, |a| a.parse().expect("iteration count"));
    let dir = std::env::temp_dir().join(format!("dim3-diagnostics-{}", std::process::id()));
    let mut c = RunConfig::default();
    c.run.iterations = iterations;
    c.run.chains = 4;
    c.run.output = dir.clone();
    c.data.generate = Some(GeneratorSpec {
        kind: GeneratorKind::Case,
        case: 2,
        n: 12,
        t: 3,
        seed: 9,
        hyper: Default::default(),
    });
    let out = run(&c, &RunControl::default())?;
    let report = summarize(&out.traces(), RetainPolicy { burn_in: 0.5, thin: 1 });
    for (key, metric) in &report {
        println!("{key:<20} {}", serde_json::to_string(metric).unwrap_or_default());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
