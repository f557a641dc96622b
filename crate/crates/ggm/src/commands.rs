//! Subcommand bodies behind the `ggm` binary. Each reads a JSON config,
//! writes its outputs into a run directory and finishes with `manifest.json`.
//! Relative paths inside a config resolve against the config file's
//! directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ggm_core::bounds::{evaluate, BoundsConfig, BoundsReport};
use ggm_core::estimator::{estimate, EstimationInput, EstimatorConfig};
use ggm_core::graph::{Ensemble, EnsembleConfig};
use ggm_core::lbp::{lbp_run, LbpConfig};
use ggm_core::model::{synthesize_model, SignPattern};
use ggm_core::sampler::sample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::{
    load_edge_list, load_model, load_samples, save_edge_list, save_json, save_model, save_samples, FormatError, ModelSpec,
};
use crate::harness::{sweep, HarnessError, SweepSpec};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Core(#[from] ggm_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, CommandError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Where a command reads its config and writes its results.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config_path: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the config file bytes, hex.
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
}

struct Run {
    ctx: RunContext,
    text: String,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn open(ctx: &RunContext) -> Result<Self> {
        let text = fs::read_to_string(&ctx.config_path).map_err(|source| CommandError::Io { path: ctx.config_path.clone(), source })?;
        fs::create_dir_all(&ctx.out).map_err(|source| CommandError::Io { path: ctx.out.clone(), source })?;
        Ok(Self { ctx: ctx.clone(), text, outputs: Vec::new() })
    }

    fn config<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_str(&self.text)
            .map_err(|e| CommandError::Config(format!("{}: {e}", self.ctx.config_path.display())))
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        self.ctx.config_path.parent().unwrap_or(Path::new(".")).join(p)
    }

    fn out(&mut self, name: &str) -> PathBuf {
        let p = self.ctx.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out(name);
        fs::write(&path, text).map_err(|source| CommandError::Io { path, source })
    }

    fn finish(self, command: &str, seeds: Vec<u64>) -> Result<Manifest> {
        let digest = Sha256::digest(self.text.as_bytes());
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: digest.iter().fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            }),
            seeds,
            outputs: self
                .outputs
                .iter()
                .map(|p| p.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned()))
                .collect(),
        };
        save_json(&self.ctx.out.join("manifest.json"), &manifest)?;
        Ok(manifest)
    }
}

fn reseed(cfg: &mut EnsembleConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

/// `generate`: config is an [`EnsembleConfig`]; writes `graph.edges`.
pub fn generate(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let mut cfg: EnsembleConfig = run.config()?;
    reseed(&mut cfg, ctx.seed);
    let g = cfg.generate()?;
    let path = run.out("graph.edges");
    save_edge_list(&path, &g)?;
    run.finish("generate", vec![cfg.seed])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesizeConfig {
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub model: ModelSpec,
}

/// `synthesize`: draws or loads a graph and writes `model.edges`,
/// `model.precision.csv` and `model.json`. The seed drives the graph and any
/// random sign pattern.
pub fn synthesize(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let mut cfg: SynthesizeConfig = run.config()?;
    reseed(&mut cfg.ensemble, ctx.seed);
    let g = match &cfg.ensemble.ensemble {
        Ensemble::Explicit { path } => load_edge_list(&run.resolve(path))?,
        _ => cfg.ensemble.generate()?,
    };
    if let SignPattern::Random { .. } = cfg.model.sign_pattern {
        cfg.model.sign_pattern = SignPattern::Random { seed: cfg.ensemble.seed };
    }
    let m = synthesize_model(&g, cfg.model.target_alpha, cfg.model.sign_pattern, cfg.model.diagonal)?;
    save_model(&ctx.out, "model", &m, Some(cfg.ensemble.seed), Some(cfg.model))?;
    for name in ["model.edges", "model.precision.csv", "model.json"] {
        run.out(name);
    }
    run.finish("synthesize", vec![cfg.ensemble.seed])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Model sidecar written by `synthesize`.
    pub model: String,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// `sample`: writes `samples.csv` and `samples.json`.
pub fn sample_cmd(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let cfg: SampleConfig = run.config()?;
    let seed = ctx.seed.unwrap_or(cfg.seed);
    let m = load_model(&run.resolve(&cfg.model))?;
    let s = sample(&m, cfg.n, seed)?;
    save_samples(&ctx.out, "samples", &s)?;
    run.out("samples.csv");
    run.out("samples.json");
    run.finish("sample", vec![seed])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    /// Sample sidecar; when absent the model's exact covariance is used.
    #[serde(default)]
    pub samples: Option<String>,
    /// Model sidecar; needed for exact mode and the oracle threshold.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
}

/// `learn`: writes `estimate.edges` plus `estimate.json` (full result) or
/// `estimate.csv` (one row per pair).
pub fn learn(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let cfg: LearnConfig = run.config()?;
    let model = cfg.model.as_deref().map(|p| load_model(&run.resolve(p))).transpose()?;
    let samples = cfg.samples.as_deref().map(|p| load_samples(&run.resolve(p))).transpose()?;
    let mut seeds = Vec::new();
    let input = match (&samples, &model) {
        (Some(s), m) => {
            seeds.push(s.seed());
            let input = EstimationInput::samples(s);
            match m {
                Some(m) => input.with_model(m),
                None => input,
            }
        }
        (None, Some(m)) => EstimationInput::exact(m),
        (None, None) => return Err(CommandError::Config("learn needs 'samples', 'model', or both".into())),
    };
    let result = estimate(&input, &cfg.estimator)?;
    let path = run.out("estimate.edges");
    save_edge_list(&path, &result.graph)?;
    match ctx.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let path = run.out("estimate.json");
            save_json(&path, &result)?;
        }
        OutputFormat::Csv => {
            let mut text = String::from("i,j,value,argmin,skipped,status,edge\n");
            for r in &result.per_pair {
                let argmin: Vec<String> = r.argmin.iter().map(ToString::to_string).collect();
                let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    r.i,
                    r.j,
                    r.value,
                    argmin.join(" "),
                    r.skipped,
                    status,
                    result.graph.has_edge(r.i, r.j)
                );
            }
            run.write_text("estimate.csv", &text)?;
        }
    }
    run.finish("learn", seeds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbpCommandConfig {
    pub model: String,
    /// Potential vector; zeros when absent.
    #[serde(default)]
    pub h: Option<Vec<f64>>,
    #[serde(default)]
    pub lbp: LbpConfig,
}

/// `lbp`: writes `lbp.json` (full result) or `lbp.csv` (per-node variances
/// and means next to the exact ones).
pub fn lbp(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let cfg: LbpCommandConfig = run.config()?;
    let m = load_model(&run.resolve(&cfg.model))?;
    let h = cfg.h.unwrap_or_else(|| vec![0.0; m.node_count()]);
    let r = lbp_run(&m, &h, &cfg.lbp)?;
    match ctx.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let path = run.out("lbp.json");
            save_json(&path, &r)?;
        }
        OutputFormat::Csv => {
            let sigma = m.covariance();
            let exact_mean = sigma.matvec(&h);
            let mut text = String::from("node,variance,mean,exact_variance,exact_mean\n");
            for i in 0..m.node_count() {
                let _ = writeln!(text, "{i},{},{},{},{}", r.variances[i], r.means[i], sigma[(i, i)], exact_mean[i]);
            }
            run.write_text("lbp.csv", &text)?;
        }
    }
    run.finish("lbp", Vec::new())
}

/// Cartesian grid for the bounds calculator; empty axes keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsGrid {
    pub p: Vec<usize>,
    pub c: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsCommandConfig {
    #[serde(flatten)]
    pub base: BoundsConfig,
    #[serde(default)]
    pub grid: Option<BoundsGrid>,
}

fn or_base<T: Copy>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// `bounds`: writes `bounds.json`, plus `bounds_grid.csv` when a grid is
/// configured.
pub fn bounds(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let cfg: BoundsCommandConfig = run.config()?;
    let report: BoundsReport = evaluate(&cfg.base)?;
    let path = run.out("bounds.json");
    save_json(&path, &report)?;
    if let Some(grid) = &cfg.grid {
        let mut text = String::from("p,c,alpha,n_exact,n_simplified,n_distortion\n");
        for p in or_base(&grid.p, cfg.base.p) {
            for c in or_base(&grid.c, cfg.base.c) {
                for alpha in or_base(&grid.alpha, cfg.base.alpha) {
                    let r = evaluate(&BoundsConfig { p, c, alpha, ..cfg.base })?;
                    let d = r.n_distortion.map_or_else(String::new, |d| d.value.to_string());
                    let _ = writeln!(text, "{p},{c},{alpha},{},{},{d}", r.n_exact, r.n_simplified);
                }
            }
        }
        run.write_text("bounds_grid.csv", &text)?;
    }
    run.finish("bounds", Vec::new())
}

/// `sweep`: config is a [`SweepSpec`]; writes `sweep.csv` (default) or
/// `sweep.json`.
pub fn sweep_cmd(ctx: &RunContext) -> Result<Manifest> {
    let mut run = Run::open(ctx)?;
    let mut spec: SweepSpec = run.config()?;
    if let Some(s) = ctx.seed {
        spec.base.seed = s;
    }
    if let Ensemble::Explicit { path } = &spec.base.ensemble.ensemble {
        spec.base.ensemble.ensemble = Ensemble::Explicit { path: run.resolve(path).to_string_lossy().into_owned() };
    }
    let result = sweep(&spec.expand()?, spec.bounds)?;
    match ctx.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => run.write_text("sweep.csv", &result.to_csv())?,
        OutputFormat::Json => {
            let path = run.out("sweep.json");
            save_json(&path, &result)?;
        }
    }
    run.finish("sweep", vec![spec.base.seed])
}
