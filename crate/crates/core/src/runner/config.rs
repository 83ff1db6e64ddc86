use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::generator::{generate_fixed, generate_mti, generate_mtv, load_dataset, synthetic_truth, DatasetBundle};
use crate::hyper::HyperPriors;
use crate::model::{Dynamics, Hyperparameters};
use crate::state::{Freeze, SweepOrder};

/// Sampler and model combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    MtvGibbs,
    MtvSlice,
    MtiGibbs,
    FMtv,
    FMti,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::MtvGibbs,
        ModelKind::MtvSlice,
        ModelKind::MtiGibbs,
        ModelKind::FMtv,
        ModelKind::FMti,
    ];

    pub fn dynamics(self) -> Dynamics {
        match self {
            ModelKind::MtiGibbs | ModelKind::FMti => Dynamics::Mti,
            _ => Dynamics::Mtv,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ModelKind::FMtv | ModelKind::FMti)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::MtvGibbs => "mtv-gibbs",
            ModelKind::MtvSlice => "mtv-slice",
            ModelKind::MtiGibbs => "mti-gibbs",
            ModelKind::FMtv => "f-mtv",
            ModelKind::FMti => "f-mti",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "run.model: unknown model '{s}' (expected one of mtv-gibbs, mtv-slice, mti-gibbs, f-mtv, f-mti)"
            ))
        })
    }
}

/// How a synthetic dataset is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Fixed four-group benchmark with one of the compatibility cases.
    Case,
    /// Prior draw from the time-varying model.
    Mtv,
    /// Prior draw from the time-invariant model.
    Mti,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case" => Ok(GeneratorKind::Case),
            "mtv" => Ok(GeneratorKind::Mtv),
            "mti" => Ok(GeneratorKind::Mti),
            other => Err(Error::Config(format!(
                "generator kind '{other}' (expected case, mtv or mti)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default = "default_case")]
    pub case: u8,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    /// Hyperparameters of prior draws.
    #[serde(default)]
    pub hyper: Hyperparameters,
}

fn default_case() -> u8 {
    1
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<DatasetBundle> {
        match self.kind {
            GeneratorKind::Case => generate_fixed(&synthetic_truth(self.case, self.n)?, self.n, self.t, self.seed),
            GeneratorKind::Mtv => generate_mtv(self.n, self.t, &self.hyper, self.seed),
            GeneratorKind::Mti => generate_mti(self.n, self.t, &self.hyper, self.seed),
        }
    }
}

/// `[data]`: either a dataset file or a generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub generate: Option<GeneratorSpec>,
}

impl DataSection {
    pub fn load(&self) -> Result<DatasetBundle> {
        match (&self.path, &self.generate) {
            (Some(path), None) => load_dataset(path),
            (None, Some(spec)) => spec.generate(),
            (Some(_), Some(_)) => Err(Error::Config("data: set either path or generate, not both".into())),
            (None, None) => Err(Error::Config("data: missing path or generate".into())),
        }
    }
}

/// `[run]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub model: ModelKind,
    pub iterations: u64,
    /// Leading fraction of iterations discarded.
    pub burn_in: f64,
    pub thin: usize,
    pub chains: u32,
    pub seed: u64,
    /// Communities of the random starting state.
    pub k_init: usize,
    /// Community count of the finite models.
    pub k_fixed: usize,
    /// Leading iterations run with every hyperparameter held at its
    /// starting value.
    pub warmup: u64,
    pub order: SweepOrder,
    pub output: PathBuf,
    /// Iterations between checkpoints; 0 disables them.
    pub checkpoint_interval: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            model: ModelKind::MtvGibbs,
            iterations: 1000,
            burn_in: 0.5,
            thin: 1,
            chains: 1,
            seed: 1,
            k_init: 10,
            k_fixed: 3,
            warmup: 0,
            order: SweepOrder::Lexicographic,
            output: PathBuf::from("dim3-out"),
            checkpoint_interval: 0,
        }
    }
}

/// `[hyper]`: starting values, freeze flags and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperSection {
    pub gamma: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub freeze_gamma: bool,
    pub freeze_concentration: bool,
    pub freeze_ratio: bool,
    pub priors: HyperPriors,
}

impl Default for HyperSection {
    fn default() -> Self {
        let h = Hyperparameters::default();
        Self {
            gamma: h.gamma,
            alpha: h.alpha,
            kappa: h.kappa,
            lambda1: h.lambda1,
            lambda2: h.lambda2,
            freeze_gamma: false,
            freeze_concentration: false,
            freeze_ratio: false,
            priors: HyperPriors::default(),
        }
    }
}

impl HyperSection {
    pub fn values(&self) -> Hyperparameters {
        Hyperparameters {
            gamma: self.gamma,
            alpha: self.alpha,
            kappa: self.kappa,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
        }
    }

    pub fn freeze(&self) -> Freeze {
        Freeze {
            gamma: self.freeze_gamma,
            concentration: self.freeze_concentration,
            ratio: self.freeze_ratio,
        }
    }
}

/// Full run configuration, read from TOML with `[run]`, `[data]` and
/// `[hyper]` sections.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub data: DataSection,
    pub hyper: HyperSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field; the message names the offending key.
    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        let bad = |key: &str, why: String| Err(Error::Config(format!("{key}: {why}")));
        if r.iterations == 0 {
            return bad("run.iterations", "must be positive".into());
        }
        if r.chains == 0 {
            return bad("run.chains", "must be at least 1".into());
        }
        if !(0.0..1.0).contains(&r.burn_in) {
            return bad("run.burn_in", format!("{} not in [0, 1)", r.burn_in));
        }
        if r.thin == 0 {
            return bad("run.thin", "must be at least 1".into());
        }
        if r.k_init == 0 {
            return bad("run.k_init", "must be at least 1".into());
        }
        if r.model.is_finite() && r.k_fixed == 0 {
            return bad("run.k_fixed", "must be at least 1".into());
        }
        let h = &self.hyper;
        for (key, v, strict) in [
            ("hyper.gamma", h.gamma, true),
            ("hyper.alpha", h.alpha, false),
            ("hyper.kappa", h.kappa, false),
            ("hyper.lambda1", h.lambda1, true),
            ("hyper.lambda2", h.lambda2, true),
        ] {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                return bad(key, format!("invalid value {v}"));
            }
        }
        if h.alpha + h.kappa <= 0.0 {
            return bad("hyper.alpha", "alpha + kappa must be positive".into());
        }
        let p = &h.priors;
        for (key, a, b) in [
            ("hyper.priors.gamma", p.gamma.shape, p.gamma.rate),
            (
                "hyper.priors.concentration",
                p.concentration.shape,
                p.concentration.rate,
            ),
            ("hyper.priors.ratio", p.ratio.a, p.ratio.b),
        ] {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return bad(key, format!("parameters ({a}, {b}) must be positive"));
            }
        }
        match (&self.data.path, &self.data.generate) {
            (Some(_), Some(_)) => bad("data", "set either path or generate, not both".into()),
            (None, None) => bad("data", "missing path or generate".into()),
            (None, Some(g)) if g.n < 2 => bad("data.generate.n", "need at least two nodes".into()),
            (None, Some(g)) if g.kind == GeneratorKind::Case && !(1..=4).contains(&g.case) => {
                bad("data.generate.case", format!("{} not in 1..=4", g.case))
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 over the settings that determine the sampled chains (the
    /// output location and checkpoint cadence are excluded).
    pub fn digest(&self) -> [u8; 32] {
        let mut c = self.clone();
        c.run.output = PathBuf::new();
        c.run.checkpoint_interval = 0;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).into()
    }
}
