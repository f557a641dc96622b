//! Gaussian loopy belief propagation, synchronous schedule.
//!
//! Messages live on directed edges `i → j` and carry a precision increment
//! `ΔJ_{i→j}` and a potential increment `Δh_{i→j}`:
//!
//! ```text
//! Ĵ_{i∖j} = J(i,i) + Σ_{k ∈ N(i)∖j} ΔJ_{k→i}      ΔJ_{i→j} = −J(j,i)² / Ĵ_{i∖j}
//! ĥ_{i∖j} = h_i    + Σ_{k ∈ N(i)∖j} Δh_{k→i}      Δh_{i→j} = −J(j,i) ĥ_{i∖j} / Ĵ_{i∖j}
//! ```
//!
//! The model is rescaled to unit diagonal before iterating and the beliefs
//! are mapped back afterwards.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::GaussianModel;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct LbpConfig {
    pub max_iters: usize,
    /// Stop once no message moves by more than this.
    pub tol: f64,
}

impl Default for LbpConfig {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum LbpStatus {
    Converged,
    MaxIterations,
    /// `Ĵ_{from∖to}` became nonpositive at this iteration.
    Breakdown { iteration: usize, from: usize, to: usize },
}

/// Messages on the normalized model, indexed like [`LbpState::edges`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LbpState {
    /// Directed edges `(i, j)` grouped by `i`, each group sorted by `j`.
    pub edges: Vec<(usize, usize)>,
    pub delta_j: Vec<f64>,
    pub delta_h: Vec<f64>,
    pub iteration: usize,
    pub max_change: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LbpResult {
    pub variances: Vec<f64>,
    pub means: Vec<f64>,
    pub status: LbpStatus,
    pub state: LbpState,
}

impl LbpResult {
    pub fn converged(&self) -> bool {
        self.status == LbpStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.state.iteration
    }
}

/// Directed edges in CSR order: `offset[i]..offset[i+1]` are the edges
/// leaving `i`, and `reverse[e]` is the opposite direction of `e`.
struct Layout {
    offset: Vec<usize>,
    target: Vec<usize>,
    reverse: Vec<usize>,
    weight: Vec<f64>,
}

impl Layout {
    fn new(m: &GaussianModel, scale: &[f64]) -> Self {
        let g = m.graph();
        let p = g.node_count();
        let mut offset = Vec::with_capacity(p + 1);
        let mut target = Vec::new();
        let mut weight = Vec::new();
        offset.push(0);
        for i in 0..p {
            for &j in g.neighbors(i) {
                target.push(j);
                weight.push(m.precision()[(i, j)] * (scale[i] * scale[j]));
            }
            offset.push(target.len());
        }
        let mut reverse = vec![0; target.len()];
        for i in 0..p {
            for e in offset[i]..offset[i + 1] {
                let j = target[e];
                let back = g.neighbors(j).binary_search(&i).expect("symmetric adjacency");
                reverse[e] = offset[j] + back;
            }
        }
        Self { offset, target, reverse, weight }
    }

    fn source(&self, e: usize) -> usize {
        self.offset.partition_point(|&o| o <= e) - 1
    }
}

enum Update {
    Message(f64, f64),
    Breakdown,
}

/// New message on `e = (i → j)` from the previous snapshot.
fn update(layout: &Layout, h: &[f64], dj: &[f64], dh: &[f64], i: usize, e: usize) -> Update {
    let skip = layout.reverse[e];
    let (mut jj, mut hh) = (1.0, h[i]);
    for f in layout.offset[i]..layout.offset[i + 1] {
        // Incoming message k → i is the reverse of outgoing i → k.
        let inc = layout.reverse[f];
        if inc != skip {
            jj += dj[inc];
            hh += dh[inc];
        }
    }
    if !(jj > 0.0) {
        return Update::Breakdown;
    }
    let w = layout.weight[e];
    Update::Message(-w * w / jj, -w * hh / jj)
}

/// Runs LBP on `m` with potential vector `h` (zero messages to start).
pub fn lbp_run(m: &GaussianModel, h: &[f64], cfg: &LbpConfig) -> Result<LbpResult> {
    let p = m.node_count();
    if h.len() != p {
        return Err(Error::InvalidArgument(format!("potential vector has length {}, expected {p}", h.len())));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let scale: Vec<f64> = m.precision().diagonal().into_iter().map(|d| 1.0 / libm::sqrt(d)).collect();
    let hn: Vec<f64> = h.iter().zip(&scale).map(|(x, s)| x * s).collect();
    let layout = Layout::new(m, &scale);
    let ne = layout.target.len();
    let sources: Vec<usize> = (0..ne).map(|e| layout.source(e)).collect();

    let (mut dj, mut dh) = (vec![0.0; ne], vec![0.0; ne]);
    let (mut nj, mut nh) = (vec![0.0; ne], vec![0.0; ne]);
    let mut status = LbpStatus::MaxIterations;
    let mut iteration = 0;
    let mut max_change = if ne == 0 { 0.0 } else { f64::INFINITY };

    if ne == 0 {
        status = LbpStatus::Converged;
    }
    while ne > 0 && iteration < cfg.max_iters {
        iteration += 1;
        let mut broken = None;
        for e in 0..ne {
            match update(&layout, &hn, &dj, &dh, sources[e], e) {
                Update::Message(a, b) => {
                    nj[e] = a;
                    nh[e] = b;
                }
                Update::Breakdown => {
                    broken = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = broken {
            status = LbpStatus::Breakdown { iteration, from: sources[e], to: layout.target[e] };
            break;
        }
        max_change = (0..ne).fold(0.0f64, |acc, e| acc.max((nj[e] - dj[e]).abs()).max((nh[e] - dh[e]).abs()));
        core::mem::swap(&mut dj, &mut nj);
        core::mem::swap(&mut dh, &mut nh);
        if max_change <= cfg.tol {
            status = LbpStatus::Converged;
            break;
        }
    }

    let mut variances = vec![f64::NAN; p];
    let mut means = vec![f64::NAN; p];
    for i in 0..p {
        let (mut jj, mut hh) = (1.0, hn[i]);
        for f in layout.offset[i]..layout.offset[i + 1] {
            jj += dj[layout.reverse[f]];
            hh += dh[layout.reverse[f]];
        }
        if jj > 0.0 {
            variances[i] = scale[i] * scale[i] / jj;
            means[i] = scale[i] * hh / jj;
        } else if !matches!(status, LbpStatus::Breakdown { .. }) {
            status = LbpStatus::Breakdown { iteration, from: i, to: i };
        }
    }
    let edges = (0..ne).map(|e| (sources[e], layout.target[e])).collect();
    Ok(LbpResult {
        variances,
        means,
        status,
        state: LbpState { edges, delta_j: dj, delta_h: dh, iteration, max_change },
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceError {
    pub per_node: Vec<f64>,
    pub max: f64,
}

/// `|Σ(i,i) − Σ_lbp(i,i)|` per node.
pub fn lbp_variance_error(m: &GaussianModel, r: &LbpResult) -> VarianceError {
    let per_node: Vec<f64> = m.covariance().diagonal().iter().zip(&r.variances).map(|(a, b)| (a - b).abs()).collect();
    let max = per_node.iter().copied().fold(0.0, f64::max);
    VarianceError { per_node, max }
}
