//! Interrupts a run, resumes it from its checkpoints and confirms the trace
//! is byte-identical to an uninterrupted run.
//!
//! `cargo run --release --example checkpoint_resume -- [iterations]`

use dim3::runner::{resume, run, trace_path, GeneratorKind, GeneratorSpec, RunConfig, RunControl};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let iterations: u64 = std::env::args()
        .nth(1)
        .map_or(400, |a| a.parse().expect("iteration count"));
    let root = std::env::temp_dir().join(format!("dim3-resume-{}", std::process::id()));
    let config = |name: &str| {
        let mut c = RunConfig::default();
        c.run.iterations = iterations;
        c.run.chains = 2;
        c.run.checkpoint_interval = (iterations / 8).max(1);
        c.run.output = root.join(name);
        c.data.generate = Some(GeneratorSpec {
            kind: GeneratorKind::Case,
            case: 3,
            n: 10,
            t: 3,
            seed: 5,
            hyper: Default::default(),
        });
        c
    };
    run(&config("straight"), &RunControl::default())?;
    let interrupted = config("interrupted");
    let partial = run(
        &interrupted,
        &RunControl {
            stop_after: Some(iterations / 2 + 7),
            ..RunControl::default()
        },
    )?;
    println!(
        "stopped at iteration {} (completed: {})",
        partial.chains[0].iteration, partial.completed
    );
    let done = resume(&interrupted, &RunControl::default())?;
    println!("resumed to iteration {}", done.chains[0].iteration);
    for chain in 0..2 {
        let a = std::fs::read(trace_path(&root.join("straight"), chain))?;
        let b = std::fs::read(trace_path(&root.join("interrupted"), chain))?;
        println!("chain {chain}: traces identical = {}", a == b);
    }
    let _ = std::fs::remove_dir_all(&root);
    Ok(())
}
