use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dim3::generator::load_dataset;
use dim3::model::Hyperparameters;
use dim3::runner::{self, GeneratorKind, GeneratorSpec, ModelKind, RunConfig, RunControl};
use dim3::{Error, Result, SweepOrder};

#[derive(Parser)]
#[command(name = "dim3", version, about = "Dynamic infinite mixed-membership blockmodels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run chains from scratch.
    Run(RunArgs),
    /// Continue chains from their checkpoints.
    Resume(RunArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
    /// Fit and recovery report for a finished run directory.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with [run], [data] and [hyper] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_init: Option<usize>,
    #[arg(long)]
    k_fixed: Option<usize>,
    /// Iterations with hyperparameters held fixed before they are sampled.
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long, value_parser = parse_order)]
    order: Option<SweepOrder>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    checkpoint_interval: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    freeze_gamma: bool,
    #[arg(long)]
    freeze_concentration: bool,
    #[arg(long)]
    freeze_ratio: bool,
    /// Worker threads (overrides DIM3_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "case")]
    kind: GeneratorKind,
    #[arg(long, default_value_t = 1)]
    case: u8,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    t: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Run directory holding chain-*.csv traces.
    #[arg(long)]
    dir: PathBuf,
    /// Dataset file with a truth section.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    burn_in: f64,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_order(s: &str) -> std::result::Result<SweepOrder, String> {
    match s {
        "lexicographic" => Ok(SweepOrder::Lexicographic),
        "random" => Ok(SweepOrder::Random),
        other => Err(format!("unknown order '{other}' (lexicographic or random)")),
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| match e {
                Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
                other => other,
            })?,
            None => RunConfig::default(),
        };
        let r = &mut c.run;
        macro_rules! set {
            ($field:expr, $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(r.model, self.model);
        set!(r.iterations, self.iterations);
        set!(r.burn_in, self.burn_in);
        set!(r.thin, self.thin);
        set!(r.chains, self.chains);
        set!(r.seed, self.seed);
        set!(r.k_init, self.k_init);
        set!(r.k_fixed, self.k_fixed);
        set!(r.warmup, self.warmup);
        set!(r.order, self.order);
        set!(r.output, self.output);
        set!(r.checkpoint_interval, self.checkpoint_interval);
        if let Some(path) = &self.data {
            c.data.path = Some(path.clone());
            c.data.generate = None;
        }
        let h = &mut c.hyper;
        set!(h.gamma, self.gamma);
        set!(h.alpha, self.alpha);
        set!(h.kappa, self.kappa);
        h.freeze_gamma |= self.freeze_gamma;
        h.freeze_concentration |= self.freeze_concentration;
        h.freeze_ratio |= self.freeze_ratio;
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => drive(args, false),
        Command::Resume(args) => drive(args, true),
        Command::Gen(args) => {
            let spec = GeneratorSpec {
                kind: args.kind,
                case: args.case,
                n: args.n,
                t: args.t,
                seed: args.seed,
                hyper: Hyperparameters {
                    gamma: args.gamma,
                    alpha: args.alpha,
                    kappa: args.kappa,
                    ..Hyperparameters::default()
                },
            };
            let bundle = runner::generate(&spec, &args.out)?;
            println!(
                "wrote {} ({} nodes, {} steps, {} links)",
                args.out.display(),
                bundle.data.n(),
                bundle.data.times(),
                bundle.data.ones()
            );
            Ok(())
        }
        Command::Eval(args) => {
            let truth = match &args.truth {
                Some(path) => {
                    let bundle = load_dataset(path)?;
                    Some(
                        bundle
                            .truth
                            .ok_or_else(|| Error::Config(format!("{} has no truth section", path.display())))?,
                    )
                }
                None => None,
            };
            let policy = dim3::analysis::RetainPolicy {
                burn_in: args.burn_in,
                thin: args.thin.max(1),
            };
            let report = runner::evaluate(&args.dir, truth.as_ref(), policy)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            if let Some(out) = &args.out {
                std::fs::write(out, format!("{text}\n"))
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", out.display())))?;
            }
            println!("{text}");
            Ok(())
        }
    }
}

fn drive(args: RunArgs, resume: bool) -> Result<()> {
    let config = args.config()?;
    let control = RunControl {
        stop_after: None,
        threads: args.threads,
    };
    let outcome = if resume {
        runner::resume(&config, &control)?
    } else {
        runner::run(&config, &control)?
    };
    let dir = config.run.output.display();
    println!(
        "{} chain(s) of {} finished {} iterations ({:.4} s/iteration); results in {dir}",
        outcome.chains.len(),
        config.run.model,
        config.run.iterations,
        outcome.seconds_per_iteration
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dim3: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
