//! Walk-summable Gaussian graphical models.
//!
//! Models are zero-mean; the potential vector only appears in [`crate::lbp`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, Cholesky, Matrix, SchurWorkspace};
use crate::rng;

/// Relative residual target for the walk-summability power iteration.
pub const ALPHA_TOLERANCE: f64 = 1e-10;
/// Iteration cap for the walk-summability power iteration.
pub const ALPHA_MAX_ITERATIONS: usize = 10_000;
/// Largest accepted `‖JΣ − I‖_max` for [`exact_covariance`].
pub const INVERSE_RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Allowed gap between requested and realized α in [`synthesize_model`].
pub const SYNTHESIS_TOLERANCE: f64 = 1e-6;
/// Default slack δ for the edge-potential homogeneity condition.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Signs of the edge partial correlations in a synthesized model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum SignPattern {
    /// Every partial correlation positive, so every off-diagonal `J ≤ 0`.
    Attractive,
    /// Signs alternate along the lexicographic edge order, starting positive.
    Alternating,
    /// Independent fair signs drawn from the given seed.
    Random { seed: u64 },
}

/// Zero-mean Gaussian model `N(0, J⁻¹)` Markov on `graph`.
///
/// Immutable once built; the covariance and α are computed up front.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "ModelRepr", try_from = "ModelRepr")
)]
pub struct GaussianModel {
    graph: Graph,
    precision: Matrix,
    covariance: Matrix,
    alpha: f64,
    j_min: f64,
    j_max: f64,
    d_min: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct ModelRepr {
    graph: Graph,
    precision: Matrix,
}

#[cfg(feature = "serde")]
impl From<GaussianModel> for ModelRepr {
    fn from(m: GaussianModel) -> Self {
        Self { graph: m.graph, precision: m.precision }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<ModelRepr> for GaussianModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        GaussianModel::new(r.graph, r.precision)
    }
}

impl GaussianModel {
    /// Validates `precision` against `graph`: exact symmetry, off-diagonal
    /// support equal to the edge set, and positive definiteness.
    pub fn new(graph: Graph, precision: Matrix) -> Result<Self> {
        let p = graph.node_count();
        if precision.rows() != p || precision.cols() != p {
            return Err(Error::InvalidArgument(format!(
                "precision matrix is {}x{}, graph has {p} nodes",
                precision.rows(),
                precision.cols()
            )));
        }
        if !precision.is_symmetric() {
            return Err(Error::InvalidArgument("precision matrix is not symmetric".into()));
        }
        for i in 0..p {
            for j in i + 1..p {
                if (precision[(i, j)] != 0.0) != graph.has_edge(i, j) {
                    return Err(Error::InvalidArgument(format!(
                        "sparsity of J disagrees with the graph at ({i}, {j})"
                    )));
                }
            }
        }
        let covariance = exact_covariance(&precision)?;
        let alpha = walk_summability_alpha(&precision)?;
        let (mut j_min, mut j_max) = (f64::INFINITY, 0.0f64);
        for (i, j) in graph.edges() {
            let v = precision[(i, j)].abs();
            j_min = j_min.min(v);
            j_max = j_max.max(v);
        }
        if graph.edge_count() == 0 {
            j_min = 0.0;
        }
        let d_min = precision.diagonal().into_iter().fold(f64::INFINITY, f64::min);
        Ok(Self { graph, precision, covariance, alpha, j_min, j_max, d_min })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `J`.
    pub fn precision(&self) -> &Matrix {
        &self.precision
    }

    /// `Σ = J⁻¹`.
    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// `‖R̄‖₂`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_walk_summable(&self) -> bool {
        self.alpha < 1.0
    }

    /// Smallest `|J(i,j)|` over edges (0 for an empty graph).
    pub fn j_min(&self) -> f64 {
        self.j_min
    }

    /// Largest `|J(i,j)|` over edges.
    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    /// Smallest diagonal entry of `J`.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn is_attractive(&self) -> bool {
        self.graph.edges().all(|(i, j)| self.precision[(i, j)] <= 0.0)
    }

    pub fn partial_correlations(&self) -> PartialCorrelations {
        partial_correlation_matrix(&self.precision).expect("validated precision matrix")
    }

    /// Same model rescaled to unit diagonal, `D^{-1/2} J D^{-1/2}`.
    pub fn normalized(&self) -> Self {
        let s: Vec<f64> = self.precision.diagonal().into_iter().map(|d| 1.0 / libm::sqrt(d)).collect();
        let j = Matrix::from_fn(self.node_count(), self.node_count(), |a, b| {
            if a == b {
                1.0
            } else {
                self.precision[(a, b)] * (s[a] * s[b])
            }
        });
        Self::new(self.graph.clone(), j).expect("rescaling preserves validity")
    }

    /// FNV-1a hash of the precision matrix bits; a stable model identifier.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let p = self.node_count() as u64;
        for byte in p.to_le_bytes().into_iter().chain(self.precision.as_slice().iter().flat_map(|x| x.to_bits().to_le_bytes())) {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// `R` with `R(i,j) = −J(i,j)/√(J(i,i)J(j,j))` and zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialCorrelations(Matrix);

impl PartialCorrelations {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `R̄`, the entrywise absolute value.
    pub fn absolute(&self) -> Matrix {
        self.0.map(f64::abs)
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

pub fn partial_correlation_matrix(j: &Matrix) -> Result<PartialCorrelations> {
    if !j.is_symmetric() {
        return Err(Error::InvalidArgument("precision matrix is not symmetric".into()));
    }
    let d = j.diagonal();
    if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive diagonal entry J({i},{i}) = {}", d[i])));
    }
    let s: Vec<f64> = d.iter().map(|&x| libm::sqrt(x)).collect();
    let n = j.rows();
    Ok(PartialCorrelations(Matrix::from_fn(n, n, |a, b| {
        if a == b {
            0.0
        } else {
            // 0 / x is +0; normalize -0 so structural zeros compare cleanly.
            let r = -j[(a, b)] / (s[a] * s[b]);
            if r == 0.0 {
                0.0
            } else {
                r
            }
        }
    })))
}

/// `α = ‖R̄‖₂` by power iteration.
pub fn walk_summability_alpha(j: &Matrix) -> Result<f64> {
    let r_abs = partial_correlation_matrix(j)?.absolute();
    Ok(linalg::symmetric_spectral_norm(&r_abs, ALPHA_TOLERANCE, ALPHA_MAX_ITERATIONS)?.norm)
}

/// `Σ = J⁻¹` through Cholesky, with a reconstruction check.
pub fn exact_covariance(j: &Matrix) -> Result<Matrix> {
    let sigma = Cholesky::new(j)?.inverse();
    let residual = j.matmul(&sigma).max_abs_diff(&Matrix::identity(j.rows()));
    if !(residual <= INVERSE_RESIDUAL_TOLERANCE) {
        return Err(Error::NumericFailure(format!("inverse residual {residual:e} exceeds tolerance")));
    }
    Ok(sigma)
}

/// Walk-sum `Σ_{k=0}^{K} R^k`, the order-`K` truncation of `(I − R)⁻¹`.
///
/// For a unit-diagonal model this approximates `Σ` itself.
pub fn truncated_walksum_covariance(r: &PartialCorrelations, order: usize) -> Matrix {
    let n = r.matrix().rows();
    let mut acc = Matrix::identity(n);
    for _ in 0..order {
        acc = r.matrix().matmul(&acc);
        for i in 0..n {
            acc[(i, i)] += 1.0;
        }
    }
    acc
}

fn check_conditioning_args(p: usize, i: usize, j: usize, s: &[usize]) -> Result<()> {
    if i >= p || j >= p || s.iter().any(|&k| k >= p) {
        return Err(Error::InvalidArgument(format!("node index out of range for p = {p}")));
    }
    if s.contains(&i) || s.contains(&j) {
        return Err(Error::InvalidArgument("conditioning set contains a queried node".into()));
    }
    Ok(())
}

/// `Σ(i,j|S)` by Schur complement; `i = j` gives the conditional variance.
pub fn conditional_covariance_exact(sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Result<f64> {
    check_conditioning_args(sigma.rows(), i, j, s)?;
    SchurWorkspace::default()
        .pair(sigma, i, j, s)
        .map(|b| b.ij)
        .ok_or_else(|| Error::NumericFailure("Σ(S,S) is singular".into()))
}

/// Synthesizes a model on `g` whose edge partial correlations share one
/// magnitude `ρ`, chosen so that `α = target_alpha`, with constant diagonal.
///
/// With unit magnitudes `R̄` is the adjacency matrix, so `α = ρ·‖A‖₂` and
/// `ρ` follows in closed form from one spectral norm.
pub fn synthesize_model(g: &Graph, target_alpha: f64, signs: SignPattern, diagonal: f64) -> Result<GaussianModel> {
    if !(0.0..1.0).contains(&target_alpha) {
        return Err(Error::InvalidParameter(format!("target alpha {target_alpha} outside [0, 1)")));
    }
    if !(diagonal >= 1.0 && diagonal.is_finite()) {
        return Err(Error::InvalidParameter(format!("diagonal {diagonal} must be finite and ≥ 1")));
    }
    let p = g.node_count();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    if edges.is_empty() != (target_alpha == 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target alpha {target_alpha} is unreachable on a graph with {} edges",
            edges.len()
        )));
    }
    let mut adjacency = Matrix::zeros(p, p);
    for &(u, v) in &edges {
        adjacency[(u, v)] = 1.0;
        adjacency[(v, u)] = 1.0;
    }
    let spectral = linalg::symmetric_spectral_norm(&adjacency, ALPHA_TOLERANCE, ALPHA_MAX_ITERATIONS)
        .map_err(|e| Error::SynthesisFailed(format!("adjacency spectral norm: {e}")))?
        .norm;
    let rho = if edges.is_empty() { 0.0 } else { target_alpha / spectral };

    let mut sign_rng = rng::stream(
        match signs {
            SignPattern::Random { seed } => seed,
            _ => 0,
        },
        rng::SIGN_STREAM,
    );
    let mut j = Matrix::identity(p).map(|x| x * diagonal);
    for (k, &(u, v)) in edges.iter().enumerate() {
        let positive = match signs {
            SignPattern::Attractive => true,
            SignPattern::Alternating => k % 2 == 0,
            SignPattern::Random { .. } => sign_rng.random_bool(0.5),
        };
        let r = if positive { rho } else { -rho };
        j[(u, v)] = -r * diagonal;
        j[(v, u)] = -r * diagonal;
    }
    let model = GaussianModel::new(g.clone(), j).map_err(|e| match e {
        // α < 1 forces I − R ≻ 0, so this is a bug rather than bad input.
        Error::NotPositiveDefinite { .. } => Error::NumericFailure(format!("synthesized model is not positive definite: {e}")),
        other => Error::SynthesisFailed(format!("{other}")),
    })?;
    if (model.alpha() - target_alpha).abs() > SYNTHESIS_TOLERANCE {
        return Err(Error::SynthesisFailed(format!(
            "realized alpha {} misses target {target_alpha}",
            model.alpha()
        )));
    }
    Ok(model)
}

/// Diagnostics for the model-side assumptions of the learning guarantees.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssumptionReport {
    pub alpha: f64,
    pub walk_summable: bool,
    /// `K(i,j) = ‖J(V∖{i,j}, {i,j})‖₂²` for every edge.
    pub k_values: BTreeMap<(usize, usize), f64>,
    /// `D_min(1−α)·min |J(i,j)|/K(i,j) − 1`; infinite when every `K` is 0.
    pub a4_margin: f64,
    pub a4_pass: bool,
    /// Attractive models do not need the edge-potential condition.
    pub a4_waived: bool,
    pub attractive: bool,
    /// `J_min · D_min⁻¹ · α^{−γ}`.
    pub a3_quantity: f64,
    pub eta: usize,
    pub gamma: usize,
    pub delta: f64,
    pub notes: Vec<String>,
}

/// `‖B‖₂²` for the `(p−2)×2` block `B = J(V∖{i,j}, {i,j})`, via the 2×2 Gram matrix.
fn k_value(j: &Matrix, a: usize, b: usize) -> f64 {
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for k in 0..j.rows() {
        if k == a || k == b {
            continue;
        }
        let (x, y) = (j[(k, a)], j[(k, b)]);
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    let mid = 0.5 * (saa + sbb);
    let half = 0.5 * (saa - sbb);
    mid + libm::sqrt(half * half + sab * sab)
}

pub fn check_assumptions(m: &GaussianModel, eta: usize, gamma: usize, delta: f64) -> AssumptionReport {
    let alpha = m.alpha();
    let attractive = m.is_attractive();
    let j = m.precision();
    let mut k_values = BTreeMap::new();
    let mut ratio = f64::INFINITY;
    for (a, b) in m.graph().edges() {
        let k = k_value(j, a, b);
        k_values.insert((a, b), k);
        if k > 0.0 {
            ratio = ratio.min(j[(a, b)].abs() / k);
        }
    }
    let a4_margin = m.d_min() * (1.0 - alpha) * ratio - 1.0;
    let a4_pass = a4_margin > delta;
    let a3_quantity = m.j_min() / m.d_min() / libm::pow(alpha, gamma as f64);

    let mut notes = Vec::new();
    if alpha >= 1.0 {
        notes.push(format!("not walk-summable: alpha = {alpha}"));
    }
    if attractive {
        notes.push("attractive model: edge-potential condition waived".into());
    } else if !a4_pass {
        notes.push(format!("edge-potential margin {a4_margin} does not exceed delta = {delta}"));
    }
    AssumptionReport {
        alpha,
        walk_summable: alpha < 1.0,
        k_values,
        a4_margin,
        a4_pass,
        a4_waived: attractive,
        attractive,
        a3_quantity,
        eta,
        gamma,
        delta,
        notes,
    }
}
