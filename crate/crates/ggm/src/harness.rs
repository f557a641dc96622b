//! Experiment orchestration: generate, synthesize, sample, learn, score.
//!
//! Every random draw in a trial comes from the trial seed `master ^ index`,
//! split into independent streams by the core crate. Trials and grid points
//! run on the rayon pool; results are collected in index order, so output is
//! a pure function of the configuration unless timing is switched on.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use ggm_core::bounds::fano_lower_bound;
use ggm_core::estimator::{estimate, EstimationInput, EstimationResult, EstimatorConfig};
use ggm_core::graph::{edit_distance, Ensemble, EnsembleConfig};
use ggm_core::model::{synthesize_model, SignPattern};
use ggm_core::rng::trial_seed;
use ggm_core::sampler::{sample, SampleSet};
use ggm_core::{GaussianModel, Graph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formats::{load_edge_list, FormatError, ModelSpec};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] ggm_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Samples per trial; ignored when `exact` is set.
    pub n: usize,
    #[serde(default = "one")]
    pub trials: usize,
    /// Master seed. It replaces `ensemble.seed` and any seed inside a random
    /// sign pattern.
    #[serde(default)]
    pub seed: u64,
    /// Learn from the true covariance instead of samples.
    #[serde(default)]
    pub exact: bool,
    /// Edit distance tolerated before a trial counts as an error.
    #[serde(default)]
    pub distortion: usize,
    /// Draw the graph and signs once from the master seed and vary only the
    /// samples across trials.
    #[serde(default)]
    pub fixed_graph: bool,
    /// Record wall-clock runtimes. Off by default because it makes output
    /// nondeterministic.
    #[serde(default)]
    pub timing: bool,
    /// A graph supplied in code; takes precedence over `ensemble`.
    #[serde(skip)]
    pub graph: Option<Graph>,
}

impl TrialConfig {
    /// Config for a fixed graph, with defaults everywhere else.
    pub fn for_graph(g: Graph, n: usize) -> Self {
        Self {
            ensemble: EnsembleConfig { ensemble: Ensemble::Explicit { path: String::new() }, p: g.node_count(), seed: 0 },
            model: ModelSpec::default(),
            estimator: EstimatorConfig::default(),
            n,
            trials: 1,
            seed: 0,
            exact: false,
            distortion: 0,
            fixed_graph: true,
            timing: false,
            graph: Some(g),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if !self.exact && self.n == 0 {
            return Err(HarnessError::Config("n must be at least 1 in sample mode".into()));
        }
        if let Some(g) = &self.graph {
            if g.node_count() != self.ensemble.p {
                return Err(HarnessError::Config(format!(
                    "supplied graph has {} nodes, ensemble says {}",
                    g.node_count(),
                    self.ensemble.p
                )));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.graph.as_ref().map_or(self.ensemble.p, Graph::node_count)
    }

    fn structure_seed(&self, index: usize) -> u64 {
        if self.fixed_graph {
            self.seed
        } else {
            trial_seed(self.seed, index as u64)
        }
    }

    fn graph_for(&self, index: usize, explicit: Option<&Graph>) -> Result<Graph> {
        if let Some(g) = self.graph.as_ref().or(explicit) {
            return Ok(g.clone());
        }
        let cfg = EnsembleConfig { seed: self.structure_seed(index), ..self.ensemble.clone() };
        Ok(cfg.generate()?)
    }

    fn signs_for(&self, index: usize) -> SignPattern {
        match self.model.sign_pattern {
            SignPattern::Random { .. } => SignPattern::Random { seed: self.structure_seed(index) },
            other => other,
        }
    }

    fn explicit_graph(&self) -> Result<Option<Graph>> {
        match (&self.graph, &self.ensemble.ensemble) {
            (None, Ensemble::Explicit { path }) => {
                let g = load_edge_list(Path::new(path))?;
                if g.node_count() != self.ensemble.p {
                    return Err(HarnessError::Config(format!("'{path}' has {} nodes, ensemble says {}", g.node_count(), self.ensemble.p)));
                }
                Ok(Some(g))
            }
            _ => Ok(None),
        }
    }
}

/// Summary of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub edges: usize,
    pub estimated_edges: Option<usize>,
    pub edit_distance: Option<usize>,
    pub exact_recovery: bool,
    pub alpha: Option<f64>,
    pub j_min: Option<f64>,
    pub walk_summable: Option<bool>,
    pub xi: Option<f64>,
    pub failed_pairs: usize,
    pub runtime_secs: f64,
    /// Set when a stage failed; the trial then counts as an error.
    pub error: Option<String>,
}

/// Everything one trial produced.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub graph: Option<Graph>,
    pub model: Option<GaussianModel>,
    pub samples: Option<SampleSet>,
    pub estimate: Option<EstimationResult>,
}

fn run_one(cfg: &TrialConfig, index: usize, explicit: Option<&Graph>) -> TrialOutcome {
    let seed = trial_seed(cfg.seed, index as u64);
    let start = Instant::now();
    let mut out = TrialOutcome {
        record: TrialRecord {
            index,
            seed,
            edges: 0,
            estimated_edges: None,
            edit_distance: None,
            exact_recovery: false,
            alpha: None,
            j_min: None,
            walk_summable: None,
            xi: None,
            failed_pairs: 0,
            runtime_secs: 0.0,
            error: None,
        },
        graph: None,
        model: None,
        samples: None,
        estimate: None,
    };
    let result = (|| -> Result<()> {
        let g = cfg.graph_for(index, explicit)?;
        out.record.edges = g.edge_count();
        out.graph = Some(g.clone());
        let m = synthesize_model(&g, cfg.model.target_alpha, cfg.signs_for(index), cfg.model.diagonal)?;
        out.record.alpha = Some(m.alpha());
        out.record.j_min = Some(m.j_min());
        out.record.walk_summable = Some(m.is_walk_summable());
        let est = if cfg.exact {
            estimate(&EstimationInput::exact(&m), &cfg.estimator)?
        } else {
            let s = sample(&m, cfg.n, seed)?;
            let est = estimate(&EstimationInput::samples(&s).with_model(&m), &cfg.estimator)?;
            out.samples = Some(s);
            est
        };
        let d = edit_distance(&g, &est.graph)?;
        out.record.estimated_edges = Some(est.graph.edge_count());
        out.record.edit_distance = Some(d);
        out.record.exact_recovery = d == 0;
        out.record.xi = Some(est.xi);
        out.record.failed_pairs = est.failed_pairs;
        out.model = Some(m);
        out.estimate = Some(est);
        Ok(())
    })();
    if let Err(e) = result {
        out.record.error = Some(e.to_string());
    }
    if cfg.timing {
        out.record.runtime_secs = start.elapsed().as_secs_f64();
    }
    out
}

/// Runs a single trial and keeps its artifacts.
pub fn run_single_trial(cfg: &TrialConfig, index: usize) -> Result<TrialOutcome> {
    cfg.validate()?;
    let explicit = cfg.explicit_graph()?;
    Ok(run_one(cfg, index, explicit.as_ref()))
}

/// Runs all trials and returns their summaries in index order. Stage
/// failures are recorded in the affected record and the run continues.
pub fn run_trial(cfg: &TrialConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let explicit = cfg.explicit_graph()?;
    Ok((0..cfg.trials).into_par_iter().map(|k| run_one(cfg, k, explicit.as_ref()).record).collect())
}

/// Fraction of trials whose edit distance exceeds `distortion`; failed
/// trials count as errors.
pub fn error_rate(records: &[TrialRecord], distortion: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let bad = records.iter().filter(|r| r.edit_distance.is_none_or(|d| d > distortion)).count();
    bad as f64 / records.len() as f64
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub p: usize,
    /// Mean degree for Erdős–Rényi and small-world ensembles, degree for
    /// regular ones.
    pub c_or_delta: Option<f64>,
    pub alpha: Option<f64>,
    pub j_min: Option<f64>,
    pub n: usize,
    pub exact: bool,
    pub trials: usize,
    pub p_error: f64,
    pub mean_edit_distance: Option<f64>,
    pub mean_runtime: f64,
    pub n_fano_exact: Option<f64>,
    pub n_fano_simplified: Option<f64>,
    pub failed_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "index,p,c_or_delta,alpha,j_min,n,exact,trials,p_error,mean_edit_distance,mean_runtime,n_fano_exact,n_fano_simplified,failed_trials";

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                r.p,
                opt(r.c_or_delta),
                opt(r.alpha),
                opt(r.j_min),
                r.n,
                r.exact,
                r.trials,
                r.p_error,
                opt(r.mean_edit_distance),
                r.mean_runtime,
                opt(r.n_fano_exact),
                opt(r.n_fano_simplified),
                r.failed_trials
            );
        }
        out
    }
}

fn family_parameter(cfg: &TrialConfig) -> Option<f64> {
    if cfg.graph.is_some() {
        return None;
    }
    match cfg.ensemble.ensemble {
        Ensemble::ErdosRenyi { c } | Ensemble::SmallWorld { c, .. } => Some(c),
        Ensemble::RandomRegular { delta } => Some(delta as f64),
        Ensemble::Explicit { .. } => None,
    }
}

/// Fano overlay; only meaningful for the Erdős–Rényi ensemble.
fn overlay(cfg: &TrialConfig) -> Option<(f64, f64)> {
    match cfg.ensemble.ensemble {
        Ensemble::ErdosRenyi { c } if cfg.graph.is_none() => {
            fano_lower_bound(cfg.ensemble.p, c, cfg.model.target_alpha).ok().map(|b| (b.exact, b.simplified))
        }
        _ => None,
    }
}

fn summarize(index: usize, cfg: &TrialConfig, records: &[TrialRecord], bounds: bool) -> SweepRow {
    let ok = || records.iter().filter(|r| r.error.is_none());
    let fano = if bounds { overlay(cfg) } else { None };
    SweepRow {
        index,
        p: cfg.node_count(),
        c_or_delta: family_parameter(cfg),
        alpha: mean(ok().filter_map(|r| r.alpha)),
        j_min: mean(ok().filter_map(|r| r.j_min)),
        n: cfg.n,
        exact: cfg.exact,
        trials: cfg.trials,
        p_error: error_rate(records, cfg.distortion),
        mean_edit_distance: mean(ok().filter_map(|r| r.edit_distance.map(|d| d as f64))),
        mean_runtime: mean(records.iter().map(|r| r.runtime_secs)).unwrap_or(0.0),
        n_fano_exact: fano.map(|f| f.0),
        n_fano_simplified: fano.map(|f| f.1),
        failed_trials: records.iter().filter(|r| r.error.is_some()).count(),
    }
}

/// One row per grid point, in grid order. With `bounds` set, Erdős–Rényi
/// rows carry the Fano sample-count bounds at the target α.
pub fn sweep(grid: &[TrialConfig], bounds: bool) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(HarnessError::Config("sweep grid is empty".into()));
    }
    for cfg in grid {
        cfg.validate()?;
    }
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(k, cfg)| {
            let records = run_trial(cfg)?;
            Ok(summarize(k, cfg, &records, bounds))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Axes of a Cartesian sweep. Empty axes keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepAxes {
    pub p: Vec<usize>,
    /// Mean degree; Erdős–Rényi and small-world only.
    pub c: Vec<f64>,
    /// Degree; random regular only.
    pub delta: Vec<usize>,
    pub alpha: Vec<f64>,
    pub eta: Vec<usize>,
    pub n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: TrialConfig,
    #[serde(default)]
    pub axes: SweepAxes,
    #[serde(default)]
    pub bounds: bool,
}

fn axis<T: Copy>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl SweepSpec {
    /// Expands the axes in the order p, c, delta, alpha, eta, n (n fastest).
    pub fn expand(&self) -> Result<Vec<TrialConfig>> {
        let base = &self.base;
        let (base_c, base_delta) = match base.ensemble.ensemble {
            Ensemble::ErdosRenyi { c } | Ensemble::SmallWorld { c, .. } => (Some(c), None),
            Ensemble::RandomRegular { delta } => (None, Some(delta)),
            Ensemble::Explicit { .. } => (None, None),
        };
        if !self.axes.c.is_empty() && base_c.is_none() {
            return Err(HarnessError::Config("the c axis needs an erdos_renyi or small_world ensemble".into()));
        }
        if !self.axes.delta.is_empty() && base_delta.is_none() {
            return Err(HarnessError::Config("the delta axis needs a random_regular ensemble".into()));
        }
        if !self.axes.p.is_empty() && (base.graph.is_some() || matches!(base.ensemble.ensemble, Ensemble::Explicit { .. })) {
            return Err(HarnessError::Config("the p axis cannot vary a fixed graph".into()));
        }
        let mut grid = Vec::new();
        for p in axis(&self.axes.p, base.ensemble.p) {
            for c in axis(&self.axes.c.iter().copied().map(Some).collect::<Vec<_>>(), base_c) {
                for delta in axis(&self.axes.delta.iter().copied().map(Some).collect::<Vec<_>>(), base_delta) {
                    for alpha in axis(&self.axes.alpha, base.model.target_alpha) {
                        for eta in axis(&self.axes.eta, base.estimator.eta) {
                            for n in axis(&self.axes.n, base.n) {
                                let mut cfg = base.clone();
                                cfg.ensemble.p = p;
                                cfg.ensemble.ensemble = match (&base.ensemble.ensemble, c, delta) {
                                    (Ensemble::ErdosRenyi { .. }, Some(c), _) => Ensemble::ErdosRenyi { c },
                                    (Ensemble::SmallWorld { d, .. }, Some(c), _) => Ensemble::SmallWorld { d: *d, c },
                                    (Ensemble::RandomRegular { .. }, _, Some(delta)) => Ensemble::RandomRegular { delta },
                                    (e, _, _) => e.clone(),
                                };
                                cfg.model.target_alpha = alpha;
                                cfg.estimator.eta = eta;
                                cfg.n = n;
                                grid.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        Ok(grid)
    }
}
