//! Conditional covariance and conditional mutual information thresholding.
//!
//! For every pair `(i, j)` the statistic is minimized over all conditioning
//! sets `S ⊆ V∖{i,j}` with `|S| ≤ η`; the pair becomes an edge iff the
//! minimum strictly exceeds the threshold (ξ for covariances, ξ² for mutual
//! information).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::linalg::{Matrix, SchurWorkspace};
use crate::model::GaussianModel;
use crate::sampler::SampleSet;

/// Condition estimates of `Σ(S,S)` above this skip the set.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Default κ in `ξ = κ √(ln p / n)`.
pub const DEFAULT_KAPPA: f64 = 2.0;
/// Early exit fires once the statistic drops to this fraction of the threshold.
pub const EARLY_EXIT_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Statistic {
    /// `|Σ(i,j|S)|`, thresholded at ξ.
    #[default]
    Covariance,
    /// `−½ ln(1 − ρ²(i,j|S))` in nats, thresholded at ξ².
    MutualInformation,
}

/// How ξ is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "rule", rename_all = "snake_case")
)]
pub enum Threshold {
    Fixed { xi: f64 },
    /// `κ √(ln p / n)`; needs a sample count.
    Scaled { kappa: f64 },
    /// Midpoint of the model's oracle gap; needs the true model. With no
    /// γ given, the largest γ whose local separators fit in η is used.
    Oracle { gamma: Option<usize> },
}

impl Default for Threshold {
    fn default() -> Self {
        Self::Scaled { kappa: DEFAULT_KAPPA }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct EstimatorConfig {
    pub eta: usize,
    pub threshold: Threshold,
    pub statistic: Statistic,
    /// Stop scanning a pair once its statistic falls below
    /// [`EARLY_EXIT_FRACTION`] of the threshold.
    pub early_exit: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { eta: 1, threshold: Threshold::default(), statistic: Statistic::Covariance, early_exit: false }
    }
}

/// Covariance to test plus what is known about where it came from.
#[derive(Clone, Copy, Debug)]
pub struct EstimationInput<'a> {
    pub covariance: &'a Matrix,
    /// Sample count; `None` for an exact covariance.
    pub n: Option<usize>,
    /// Ground truth, used only by [`Threshold::Oracle`].
    pub model: Option<&'a GaussianModel>,
}

impl<'a> EstimationInput<'a> {
    pub fn samples(s: &'a SampleSet) -> Self {
        Self { covariance: s.covariance(), n: Some(s.n()), model: None }
    }

    pub fn exact(m: &'a GaussianModel) -> Self {
        Self { covariance: m.covariance(), n: None, model: Some(m) }
    }

    pub fn with_model(self, m: &'a GaussianModel) -> Self {
        Self { model: Some(m), ..self }
    }

    fn limits(&self, eta: usize) -> SetLimits {
        SetLimits {
            max_size: eta.min(self.covariance.rows().saturating_sub(2)),
            // Σ̂(S,S) is singular unless n > |S|.
            usable: self.n.map_or(usize::MAX, |n| n.saturating_sub(1)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum PairStatus {
    Ok,
    /// Every conditioning set was skipped; the pair is treated as a non-edge.
    Failed,
}

/// Outcome of the minimization for one pair.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    /// Minimized statistic; `+∞` when the pair failed.
    pub value: f64,
    pub argmin: Vec<usize>,
    /// Conditioning sets skipped for ill-conditioning.
    pub skipped: usize,
    pub status: PairStatus,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimationResult {
    pub graph: Graph,
    /// Resolved ξ (MI pairs are compared against `xi²`).
    pub xi: f64,
    pub config: EstimatorConfig,
    /// One record per pair `i < j`, lexicographic.
    pub per_pair: Vec<PairRecord>,
    pub failed_pairs: usize,
    pub elapsed_secs: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct SetLimits {
    max_size: usize,
    usable: usize,
}

fn check_args(sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<()> {
    let p = sigma.rows();
    if !sigma.is_square() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    if i >= p || j >= p || s.iter().any(|&k| k >= p) {
        return Err(Error::InvalidArgument(format!("node index out of range for p = {p}")));
    }
    if s.contains(&i) || s.contains(&j) {
        return Err(Error::InvalidArgument("conditioning set contains a queried node".into()));
    }
    Ok(())
}

fn schur(ws: &mut SchurWorkspace, sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<(f64, f64, f64)> {
    let b = ws.pair(sigma, i, j, s).ok_or(Error::Conditioning { condition: f64::INFINITY })?;
    if !(b.condition <= CONDITION_LIMIT) {
        return Err(Error::Conditioning { condition: b.condition });
    }
    Ok((b.ii, b.ij, b.jj))
}

/// Signed `Σ(i,j|S) = Σ(i,j) − Σ(i,S) Σ(S,S)⁻¹ Σ(S,j)`.
pub fn conditional_covariance(sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<f64> {
    check_args(sigma, i, j, s)?;
    schur(&mut SchurWorkspace::default(), sigma, i, j, s).map(|(_, ij, _)| ij)
}

fn correlation_from_block(ii: f64, ij: f64, jj: f64) -> Result<f64> {
    if !(ii > 0.0 && jj > 0.0) {
        return Err(Error::NumericFailure(format!("nonpositive conditional variance ({ii:e}, {jj:e})")));
    }
    Ok(ij / libm::sqrt(ii * jj))
}

/// `ρ(i,j|S) = Σ(i,j|S) / √(Σ(i,i|S) Σ(j,j|S))`.
pub fn conditional_correlation(sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<f64> {
    check_args(sigma, i, j, s)?;
    let (ii, ij, jj) = schur(&mut SchurWorkspace::default(), sigma, i, j, s)?;
    correlation_from_block(ii, ij, jj)
}

/// `−½ ln(1 − ρ²)` in nats.
pub fn mutual_information_from_correlation(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::NumericFailure(format!("|rho| = {} is not below 1", rho.abs())));
    }
    Ok(-0.5 * libm::log1p(-rho * rho))
}

/// `I(X_i; X_j | X_S)` in nats.
pub fn conditional_mutual_information(sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<f64> {
    mutual_information_from_correlation(conditional_correlation(sigma, i, j, s)?)
}

/// `κ √(ln p / n)` with the natural log.
pub fn default_threshold(n: usize, p: usize, kappa: f64) -> f64 {
    kappa * libm::sqrt(libm::log(p as f64) / n as f64)
}

/// Minimum of a statistic over conditioning sets, with its argmin.
#[derive(Clone, Debug, PartialEq)]
pub struct MinStatistic {
    pub value: f64,
    pub argmin: Vec<usize>,
    pub skipped: usize,
}

/// Advances `idx` (strictly increasing indices into `0..m`) to the next
/// combination of the same size in lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < m - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct Scanner {
    ws: SchurWorkspace,
    others: Vec<usize>,
    idx: Vec<usize>,
    set: Vec<usize>,
}

impl Scanner {
    fn new() -> Self {
        Self { ws: SchurWorkspace::default(), others: Vec::new(), idx: Vec::new(), set: Vec::new() }
    }

    fn statistic(&mut self, sigma: &Matrix, i: usize, j: usize, stat: Statistic) -> Option<f64> {
        let (ii, ij, jj) = schur(&mut self.ws, sigma, i, j, &self.set).ok()?;
        match stat {
            Statistic::Covariance => Some(ij.abs()),
            Statistic::MutualInformation => {
                mutual_information_from_correlation(correlation_from_block(ii, ij, jj).ok()?).ok()
            }
        }
    }

    /// Shortlex scan of all `S` with `|S| ≤ max_size`; the first strict
    /// minimum wins ties.
    fn scan(&mut self, sigma: &Matrix, i: usize, j: usize, limits: SetLimits, stat: Statistic, cutoff: Option<f64>) -> MinStatistic {
        let p = sigma.rows();
        self.others.clear();
        self.others.extend((0..p).filter(|&v| v != i && v != j));
        let m = self.others.len();
        let mut best = MinStatistic { value: f64::INFINITY, argmin: Vec::new(), skipped: 0 };
        let mut found = false;
        for k in 0..=limits.max_size.min(m) {
            self.idx.clear();
            self.idx.extend(0..k);
            loop {
                self.set.clear();
                self.set.extend(self.idx.iter().map(|&t| self.others[t]));
                let value = if k > limits.usable { None } else { self.statistic(sigma, i, j, stat) };
                match value {
                    Some(v) => {
                        if !found || v < best.value {
                            found = true;
                            best.value = v;
                            best.argmin.clone_from(&self.set);
                        }
                        if cutoff.is_some_and(|c| best.value <= c) {
                            return best;
                        }
                    }
                    None => best.skipped += 1,
                }
                if !next_combination(&mut self.idx, m) {
                    break;
                }
            }
        }
        best
    }
}

/// Exhaustive `min_{|S| ≤ η} stat(i, j | S)`. Ill-conditioned sets are
/// skipped; if all are skipped the pair fails.
pub fn min_conditional_statistic(input: &EstimationInput<'_>, i: usize, j: usize, eta: usize, stat: Statistic) -> Result<MinStatistic> {
    check_args(input.covariance, i, j, &[])?;
    if i == j {
        return Err(Error::InvalidArgument("pair must have distinct nodes".into()));
    }
    let best = Scanner::new().scan(input.covariance, i, j, input.limits(eta), stat, None);
    if best.value.is_infinite() && best.argmin.is_empty() && best.skipped > 0 {
        return Err(Error::EstimationFailed { i: i.min(j), j: i.max(j) });
    }
    Ok(best)
}

/// `(C_min, C_max)` and whether a threshold can split them.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleGap {
    /// Smallest edge statistic minimized over `|S| ≤ η` (`+∞` without edges).
    pub c_min: f64,
    /// Largest non-edge statistic at its γ-local separator (0 without non-edges).
    pub c_max: f64,
    pub separable: bool,
}

impl OracleGap {
    /// A threshold strictly inside the gap when one exists.
    pub fn midpoint(&self) -> f64 {
        if self.c_min.is_finite() {
            0.5 * (self.c_min + self.c_max)
        } else {
            self.c_max
        }
    }
}

/// Oracle gap of the covariance statistic on the exact covariance.
pub fn oracle_gap(m: &GaussianModel, eta: usize, gamma: usize) -> OracleGap {
    oracle_gap_with(m, eta, gamma, Statistic::Covariance)
}

/// [`oracle_gap`] for either statistic.
pub fn oracle_gap_with(m: &GaussianModel, eta: usize, gamma: usize, stat: Statistic) -> OracleGap {
    let sigma = m.covariance();
    let g = m.graph();
    let input = EstimationInput::exact(m);
    let limits = input.limits(eta);
    let mut scanner = Scanner::new();
    let mut c_min = f64::INFINITY;
    for (i, j) in g.edges() {
        c_min = c_min.min(scanner.scan(sigma, i, j, limits, stat, None).value);
    }
    let profile = graph::separation_profile(g, gamma);
    let mut c_max = 0.0f64;
    for (&(i, j), sep) in &profile.per_pair {
        scanner.set.clone_from(sep);
        // Exact covariances are positive definite, so every set is usable.
        let v = scanner.statistic(sigma, i, j, stat).unwrap_or(f64::INFINITY);
        c_max = c_max.max(v);
    }
    OracleGap { c_min, c_max, separable: c_min > c_max }
}

/// The ξ a configuration resolves to for this input.
pub fn resolve_threshold(input: &EstimationInput<'_>, cfg: &EstimatorConfig) -> Result<f64> {
    let xi = match cfg.threshold {
        Threshold::Fixed { xi } => xi,
        Threshold::Scaled { kappa } => {
            if !(kappa > 0.0) {
                return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
            }
            let n = input
                .n
                .ok_or_else(|| Error::InvalidArgument("the scaled threshold needs a sample count".into()))?;
            default_threshold(n, input.covariance.rows(), kappa)
        }
        Threshold::Oracle { gamma } => {
            let m = input
                .model
                .ok_or_else(|| Error::InvalidArgument("the oracle threshold needs the true model".into()))?;
            let p = m.node_count();
            let gamma = match gamma {
                Some(g) => g,
                None => graph::largest_feasible_gamma(m.graph(), cfg.eta, p).unwrap_or(0),
            };
            let mid = oracle_gap_with(m, cfg.eta, gamma, cfg.statistic).midpoint();
            match cfg.statistic {
                Statistic::Covariance => mid,
                // MI is compared against ξ², so take the root of the MI midpoint.
                Statistic::MutualInformation => libm::sqrt(mid),
            }
        }
    };
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold must be finite and nonnegative, got {xi}")));
    }
    Ok(xi)
}

fn pair_record(scanner: &mut Scanner, input: &EstimationInput<'_>, i: usize, j: usize, limits: SetLimits, stat: Statistic, cutoff: Option<f64>) -> PairRecord {
    let best = scanner.scan(input.covariance, i, j, limits, stat, cutoff);
    let failed = best.value.is_infinite() && best.skipped > 0;
    PairRecord {
        i,
        j,
        value: best.value,
        argmin: best.argmin,
        skipped: best.skipped,
        status: if failed { PairStatus::Failed } else { PairStatus::Ok },
    }
}

fn run(input: &EstimationInput<'_>, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    #[cfg(feature = "std")]
    let start = std::time::Instant::now();

    let sigma = input.covariance;
    if !sigma.is_square() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    let p = sigma.rows();
    let xi = resolve_threshold(input, cfg)?;
    let bar = match cfg.statistic {
        Statistic::Covariance => xi,
        Statistic::MutualInformation => xi * xi,
    };
    let cutoff = cfg.early_exit.then_some(bar * EARLY_EXIT_FRACTION);
    let limits = input.limits(cfg.eta);
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();

    #[cfg(feature = "parallel")]
    let per_pair: Vec<PairRecord> = {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map_init(Scanner::new, |sc, &(i, j)| pair_record(sc, input, i, j, limits, cfg.statistic, cutoff))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_pair: Vec<PairRecord> = {
        let mut sc = Scanner::new();
        pairs.iter().map(|&(i, j)| pair_record(&mut sc, input, i, j, limits, cfg.statistic, cutoff)).collect()
    };

    let failed_pairs = per_pair.iter().filter(|r| r.status == PairStatus::Failed).count();
    let graph = Graph::from_edges(p, per_pair.iter().filter(|r| r.status == PairStatus::Ok && r.value > bar).map(|r| (r.i, r.j)))?;

    #[cfg(feature = "std")]
    let elapsed_secs = Some(start.elapsed().as_secs_f64());
    #[cfg(not(feature = "std"))]
    let elapsed_secs = None;

    Ok(EstimationResult { graph, xi, config: cfg.clone(), per_pair, failed_pairs, elapsed_secs })
}

/// Conditional covariance thresholding. Overrides `cfg.statistic` with
/// [`Statistic::Covariance`].
pub fn cmit(input: &EstimationInput<'_>, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    run(input, &EstimatorConfig { statistic: Statistic::Covariance, ..cfg.clone() })
}

/// Conditional mutual information thresholding at ξ². Overrides
/// `cfg.statistic` with [`Statistic::MutualInformation`].
pub fn cmit_mi(input: &EstimationInput<'_>, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    run(input, &EstimatorConfig { statistic: Statistic::MutualInformation, ..cfg.clone() })
}

/// Runs whichever statistic `cfg` names.
pub fn estimate(input: &EstimationInput<'_>, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    run(input, cfg)
}
