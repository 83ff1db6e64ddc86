use std::path::Path;

use dim3::analysis::Metric;
use dim3::generator::load_dataset;
use dim3::runner::{
    checkpoint_path, evaluate, policy, resume, run, summary_path, trace_path, Checkpoint, GeneratorKind, GeneratorSpec,
    ModelKind, RunConfig, RunControl,
};
use dim3::Error;

fn config(dir: &Path, model: ModelKind, iterations: u64, chains: u32) -> RunConfig {
    let mut c = RunConfig::default();
    c.run.model = model;
    c.run.iterations = iterations;
    c.run.chains = chains;
    c.run.seed = 99;
    c.run.output = dir.to_path_buf();
    c.data.generate = Some(GeneratorSpec {
        kind: GeneratorKind::Case,
        case: 1,
        n: 8,
        t: 3,
        seed: 7,
        hyper: Default::default(),
    });
    c
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn same_seed_gives_identical_traces() {
    for model in [
        ModelKind::MtvGibbs,
        ModelKind::MtvSlice,
        ModelKind::MtiGibbs,
        ModelKind::FMti,
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(&config(a.path(), model, 40, 2), &RunControl::default()).unwrap();
        let one_thread = RunControl {
            threads: Some(1),
            ..RunControl::default()
        };
        run(&config(b.path(), model, 40, 2), &one_thread).unwrap();
        for c in 0..2 {
            assert_eq!(
                read(trace_path(a.path(), c)),
                read(trace_path(b.path(), c)),
                "{model} chain {c}"
            );
        }
    }
}

#[test]
fn chains_use_distinct_streams() {
    let dir = tempfile::tempdir().unwrap();
    run(&config(dir.path(), ModelKind::MtvGibbs, 20, 2), &RunControl::default()).unwrap();
    let a = String::from_utf8(read(trace_path(dir.path(), 0))).unwrap();
    let b = String::from_utf8(read(trace_path(dir.path(), 1))).unwrap();
    let body = |s: &str| {
        s.lines()
            .skip(1)
            .map(|l| l.split_once(',').unwrap().1.split_once(',').unwrap().1.to_string())
            .collect::<Vec<_>>()
    };
    assert_ne!(body(&a), body(&b));
}

#[test]
fn kill_and_resume_matches_uninterrupted_run() {
    for model in [
        ModelKind::MtvGibbs,
        ModelKind::MtvSlice,
        ModelKind::MtiGibbs,
        ModelKind::FMtv,
    ] {
        let full = tempfile::tempdir().unwrap();
        let cut = tempfile::tempdir().unwrap();
        let mut c = config(full.path(), model, 60, 2);
        c.run.checkpoint_interval = 10;
        run(&c, &RunControl::default()).unwrap();
        c.run.output = cut.path().to_path_buf();
        // killed after 37 sweeps: the last checkpoint is at 30
        let partial = run(
            &c,
            &RunControl {
                stop_after: Some(37),
                ..RunControl::default()
            },
        )
        .unwrap();
        assert!(!partial.completed);
        assert!(!trace_path(cut.path(), 0).exists());
        let data = c.data.load().unwrap().data;
        assert_eq!(
            Checkpoint::load(checkpoint_path(cut.path(), 0), &data)
                .unwrap()
                .iteration,
            30
        );
        let resumed = resume(&c, &RunControl::default()).unwrap();
        assert!(resumed.completed);
        for chain in 0..2 {
            assert_eq!(
                read(trace_path(full.path(), chain)),
                read(trace_path(cut.path(), chain)),
                "{model}"
            );
            assert_eq!(
                read(checkpoint_path(full.path(), chain)),
                read(checkpoint_path(cut.path(), chain))
            );
        }
    }
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), ModelKind::MtiGibbs, 25, 1);
    c.run.checkpoint_interval = 25;
    let out = run(&c, &RunControl::default()).unwrap();
    let data = c.data.load().unwrap().data;
    let bytes = read(checkpoint_path(dir.path(), 0));
    let ckpt = Checkpoint::from_bytes(&bytes, &data).unwrap();
    assert_eq!(ckpt.to_bytes(), bytes);
    assert_eq!(ckpt.trace, out.chains[0].trace);
    assert_eq!(ckpt.state.labels, out.chains[0].state.labels);
    assert_eq!(&bytes[..8], b"DIM3CKPT");
}

#[test]
fn corrupt_or_foreign_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), ModelKind::MtvGibbs, 10, 1);
    c.run.checkpoint_interval = 5;
    run(&c, &RunControl::default()).unwrap();
    let data = c.data.load().unwrap().data;
    let bytes = read(checkpoint_path(dir.path(), 0));
    assert!(matches!(
        Checkpoint::from_bytes(&bytes[..bytes.len() - 3], &data),
        Err(Error::Checkpoint(_))
    ));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Checkpoint::from_bytes(&bad, &data), Err(Error::Checkpoint(_))));
    let mut version = bytes.clone();
    version[8] = 9;
    assert!(matches!(
        Checkpoint::from_bytes(&version, &data),
        Err(Error::Checkpoint(_))
    ));
    // a different configuration must not resume from these files
    c.hyper.lambda1 = 2.0;
    assert!(
        matches!(resume(&c, &RunControl::default()), Err(Error::Checkpoint(m)) if m.contains("different configuration"))
    );
}

#[test]
fn single_iteration_skips_long_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), ModelKind::MtvGibbs, 1, 2);
    c.run.burn_in = 0.0;
    let out = run(&c, &RunControl::default()).unwrap();
    assert_eq!(out.chains[0].trace.len(), 1);
    let report = out.report.unwrap();
    for key in ["psrf_K", "psrf_D", "iat_K/chain0", "geweke_D/chain1"] {
        assert!(matches!(report[key], Metric::Skipped { .. }), "{key}");
    }
    // two chains pool two retained values, enough for an interval
    assert!(matches!(report["loglik"], Metric::Interval(_)));
    let single = run(&config(dir.path(), ModelKind::MtvGibbs, 1, 1), &RunControl::default()).unwrap();
    assert!(matches!(single.report.unwrap()["loglik"], Metric::Skipped { .. }));
}

#[test]
fn five_chain_run_reports_scale_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path(), ModelKind::MtvGibbs, 200, 5);
    c.data.generate.as_mut().unwrap().n = 12;
    let out = run(&c, &RunControl::default()).unwrap();
    for chain in 0..5 {
        assert!(trace_path(dir.path(), chain).exists());
    }
    let text = std::fs::read_to_string(summary_path(dir.path())).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(json["psrf_K"]["estimate"].is_f64());
    assert!(json["psrf_D"]["upper"].is_f64());
    assert!(json["l2_membership"].is_f64());
    assert!(json["seconds_per_iteration"].as_f64().unwrap() > 0.0);
    assert_eq!(out.report.unwrap()["retained"].value(), Some(500.0));
}

#[test]
fn eval_with_and_without_truth() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), ModelKind::FMtv, 50, 2);
    run(&c, &RunControl::default()).unwrap();
    let plain = evaluate(dir.path(), None, policy(&c)).unwrap();
    assert_eq!(plain.keys().collect::<Vec<_>>(), vec!["loglik"]);
    let truth = c.data.load().unwrap().truth.unwrap();
    let full = evaluate(dir.path(), Some(&truth), policy(&c)).unwrap();
    assert!(full["l2_membership"].value().unwrap() >= 0.0);
    assert!(full["l2_compat/chain1"].value().is_some());
    assert_eq!(full["loglik"], plain["loglik"]);
}

#[test]
fn invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(Box<dyn Fn(&mut RunConfig)>, &str)> = vec![
        (Box::new(|c| c.run.iterations = 0), "run.iterations"),
        (Box::new(|c| c.run.chains = 0), "run.chains"),
        (Box::new(|c| c.run.burn_in = 1.0), "run.burn_in"),
        (Box::new(|c| c.hyper.lambda2 = -1.0), "hyper.lambda2"),
        (Box::new(|c| c.data.generate = None), "data"),
    ];
    for (edit, key) in cases {
        let mut c = config(dir.path(), ModelKind::MtvGibbs, 5, 1);
        edit(&mut c);
        match run(&c, &RunControl::default()) {
            Err(Error::Config(m)) => assert!(m.starts_with(key), "{m}"),
            other => panic!("{key}: {other:?}"),
        }
    }
}

#[test]
fn toml_config_round_trip_and_errors() {
    let text = r#"
[run]
model = "mti-gibbs"
iterations = 500
chains = 3
seed = 4

[data.generate]
kind = "case"
case = 2
n = 16
t = 3
seed = 11

[hyper]
gamma = 0.5
freeze_gamma = true

[hyper.priors.concentration]
shape = 2.0
rate = 1.0
"#;
    let c = RunConfig::from_toml(text).unwrap();
    assert_eq!(c.run.model, ModelKind::MtiGibbs);
    assert_eq!(c.run.k_init, 10);
    assert!(c.hyper.freeze_gamma);
    assert_eq!(c.hyper.priors.concentration.shape, 2.0);
    assert_eq!(c.hyper.priors.ratio.a, 1.0);
    c.validate().unwrap();
    assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    assert!(matches!(
        RunConfig::from_toml("[run]\nmodel = \"nope\"\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(RunConfig::from_toml("[run]\nspeed = 3\n"), Err(Error::Config(m)) if m.contains("speed")));
    let mut other = c.clone();
    other.run.output = "elsewhere".into();
    assert_eq!(other.digest(), c.digest());
    other.run.seed += 1;
    assert_ne!(other.digest(), c.digest());
}

#[test]
fn generated_dataset_matches_config_generator() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GeneratorSpec {
        kind: GeneratorKind::Case,
        case: 1,
        n: 20,
        t: 3,
        seed: 7,
        hyper: Default::default(),
    };
    let path = dir.path().join("case1.txt");
    let written = dim3::runner::generate(&spec, &path).unwrap();
    let loaded = load_dataset(&path).unwrap();
    assert_eq!(loaded.data, written.data);
    assert_eq!(loaded.truth, written.truth);
}
