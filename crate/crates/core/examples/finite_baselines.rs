//! Runs all five model/sampler combinations through the run driver on the
//! same network and compares their retained log-likelihoods.
//!
//! `cargo run --release --example finite_baselines -- [iterations]`

use dim3::analysis::Metric;
use dim3::runner::{run, GeneratorKind, GeneratorSpec, ModelKind, RunConfig, RunControl};

fn main() -> dim3::Result<()> {
    let iterations: u64 = std::env::args()
        .nth(1)
        .map_or(1000, |a| a.parse().expect("iteration count"));
    let dir = std::env::temp_dir().join(format!("dim3-baselines-{}", std::process::id()));
    for model in ModelKind::ALL {
        let mut c = RunConfig::default();
        c.run.model = model;
        c.run.iterations = iterations;
        c.run.k_fixed = 3;
        c.run.output = dir.join(model.name());
        c.data.generate = Some(GeneratorSpec {
            kind: GeneratorKind::Case,
            case: 1,
            n: 16,
            t: 3,
            seed: 4,
            hyper: Default::default(),
        });
        let out = run(&c, &RunControl::default())?;
        let report = out.report.expect("finished run");
        let ll = match report.get("loglik") {
            Some(Metric::Interval(i)) => format!("{:.1} [{:.1}, {:.1}]", i.mean, i.lower, i.upper),
            other => format!("{other:?}"),
        };
        let l2 = report.get("l2_membership").and_then(Metric::value).unwrap_or(f64::NAN);
        println!("{:<10} loglik {ll:<28} membership error {l2:.3}", model.name());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
