//! Fano-type lower bounds on the sample size needed to learn Erdős–Rényi
//! Gaussian graphical models, and the typical-set machinery behind them.
//!
//! Entropies are in bits; the rate function uses natural logs.

use alloc::format;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `−q log₂ q − (1−q) log₂(1−q)`, with `0 log 0 = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("probability {q} outside [0, 1]")));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * libm::log2(x) };
    Ok(term(q) + term(1.0 - q))
}

fn pairs(p: usize) -> f64 {
    let p = p as f64;
    p * (p - 1.0) / 2.0
}

fn check(p: usize, c: f64, alpha: f64) -> Result<()> {
    if !(c > 0.0 && c < p as f64) {
        return Err(Error::InvalidParameter(format!("mean degree c = {c} must lie in (0, {p})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// `log₂[2πe(1/(1−α) + 1)]`: the per-sample information cap.
fn information_cap(alpha: f64) -> f64 {
    libm::log2(2.0 * core::f64::consts::PI * core::f64::consts::E * (1.0 / (1.0 - alpha) + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FanoBound {
    /// `2·C(p,2)·H_b(c/p) / (p·L)`.
    pub exact: f64,
    /// `c·log₂p / L`.
    pub simplified: f64,
}

/// Sample size below which no estimator recovers `G(p, c/p)` reliably;
/// `L = log₂[2πe(1/(1−α)+1)]`.
pub fn fano_lower_bound(p: usize, c: f64, alpha: f64) -> Result<FanoBound> {
    check(p, c, alpha)?;
    let cap = information_cap(alpha);
    let h = binary_entropy(c / p as f64)?;
    Ok(FanoBound {
        exact: 2.0 * pairs(p) * h / (p as f64 * cap),
        simplified: c * libm::log2(p as f64) / cap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistortionBound {
    /// Zero when not informative.
    pub value: f64,
    /// `D / C(p,2)`.
    pub beta: f64,
    /// False when `β ≥ c/p`, where the bound degenerates.
    pub informative: bool,
}

/// Bound for recovery up to `distortion` edge edits:
/// `H_b(c/p)` is replaced by `H_b(c/p) − H_b(β)`.
pub fn fano_lower_bound_distortion(p: usize, c: f64, alpha: f64, distortion: f64) -> Result<DistortionBound> {
    check(p, c, alpha)?;
    if !(distortion >= 0.0) {
        return Err(Error::InvalidParameter(format!("distortion {distortion} must be nonnegative")));
    }
    let q = c / p as f64;
    let beta = distortion / pairs(p);
    if !(beta < q) {
        return Ok(DistortionBound { value: 0.0, beta, informative: false });
    }
    let gain = binary_entropy(q)? - binary_entropy(beta)?;
    let value = (2.0 * pairs(p) * gain / (p as f64 * information_cap(alpha))).max(0.0);
    Ok(DistortionBound { value, beta, informative: true })
}

/// `K(c,ε) = (c/2)[(1+ε)ln(1+ε) − ε]`.
pub fn rate_function(c: f64, epsilon: f64) -> Result<f64> {
    if !(c > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate function needs c > 0 and epsilon ≥ 0, got {c}, {epsilon}")));
    }
    Ok(0.5 * c * ((1.0 + epsilon) * libm::log1p(epsilon) - epsilon))
}

/// `min(1, 2·exp(−p·K(c,ε)))`.
pub fn atypical_probability_bound(p: usize, c: f64, epsilon: f64) -> Result<f64> {
    Ok((2.0 * libm::exp(-(p as f64) * rate_function(c, epsilon)?)).min(1.0))
}

/// Graphs whose edge density is `ε`-close to `c/2` per node.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TypicalSet {
    pub p: usize,
    pub c: f64,
    pub epsilon: f64,
}

impl TypicalSet {
    pub fn new(p: usize, c: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c < p as f64) || !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("typical set needs 0 < c < p and epsilon ≥ 0, got c = {c}, epsilon = {epsilon}")));
        }
        Ok(Self { p, c, epsilon })
    }

    /// `|m/(p·c) − 1/2| ≤ ε/2` for a graph with `m` edges.
    pub fn contains_edge_count(&self, m: usize) -> bool {
        let pc = self.p as f64 * self.c;
        (2.0 * m as f64 - pc).abs() <= self.epsilon * pc
    }

    pub fn contains(&self, g: &Graph) -> bool {
        g.node_count() == self.p && self.contains_edge_count(g.edge_count())
    }

    fn entropy_mass(&self) -> f64 {
        pairs(self.p) * binary_entropy(self.c / self.p as f64).expect("0 < c/p < 1")
    }

    /// `(log₂(1−ε) + C·H, C·H·(1+ε))` with `C·H = C(p,2)·H_b(c/p)`; the lower
    /// end is `−∞` for `ε ≥ 1`.
    pub fn log2_cardinality_bounds(&self) -> (f64, f64) {
        let mass = self.entropy_mass();
        let lower = if self.epsilon < 1.0 { libm::log2(1.0 - self.epsilon) + mass } else { f64::NEG_INFINITY };
        (lower, mass * (1.0 + self.epsilon))
    }

    /// `(−C·H·(1+ε), −C·H)`: the claimed range of `log₂ P(G)` for members.
    pub fn log2_probability_bounds(&self) -> (f64, f64) {
        let mass = self.entropy_mass();
        (-mass * (1.0 + self.epsilon), -mass)
    }
}

/// `log₂ P(G)` under `G(p, c/p)` for a graph with `m` edges.
pub fn log2_graph_probability(p: usize, c: f64, m: usize) -> f64 {
    let q = c / p as f64;
    let m = m as f64;
    m * libm::log2(q) + (pairs(p) - m) * libm::log2(1.0 - q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsConfig {
    pub p: usize,
    pub c: f64,
    pub alpha: f64,
    /// Allowed edge edits.
    #[cfg_attr(feature = "serde", serde(default))]
    pub distortion: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_epsilon"))]
    pub epsilon: f64,
}

#[cfg(feature = "serde")]
fn default_epsilon() -> f64 {
    0.1
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundsReport {
    pub config: BoundsConfig,
    pub n_exact: f64,
    pub n_simplified: f64,
    pub n_distortion: Option<DistortionBound>,
    /// `log₂` bounds on the typical-set cardinality.
    pub typical_log2_cardinality: (f64, f64),
    pub atypical_probability_bound: f64,
    pub rate: f64,
}

pub fn evaluate(cfg: &BoundsConfig) -> Result<BoundsReport> {
    let fano = fano_lower_bound(cfg.p, cfg.c, cfg.alpha)?;
    let n_distortion = cfg
        .distortion
        .map(|d| fano_lower_bound_distortion(cfg.p, cfg.c, cfg.alpha, d))
        .transpose()?;
    Ok(BoundsReport {
        config: *cfg,
        n_exact: fano.exact,
        n_simplified: fano.simplified,
        n_distortion,
        typical_log2_cardinality: TypicalSet::new(cfg.p, cfg.c, cfg.epsilon)?.log2_cardinality_bounds(),
        atypical_probability_bound: atypical_probability_bound(cfg.p, cfg.c, cfg.epsilon)?,
        rate: rate_function(cfg.c, cfg.epsilon)?,
    })
}

/// Smallest integer sample count meeting a real-valued bound.
pub fn ceil_samples(bound: f64) -> u64 {
    libm::ceil(bound.max(0.0)) as u64
}
