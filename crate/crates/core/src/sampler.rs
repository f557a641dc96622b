//! Reproducible Gaussian sampling and empirical covariance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::model::GaussianModel;
use crate::rng;

/// `n` draws of a `p`-dimensional vector, one per row, with their
/// (uncentered) empirical covariance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "SampleRepr", try_from = "SampleRepr")
)]
pub struct SampleSet {
    data: Matrix,
    seed: u64,
    model_id: u64,
    covariance: Matrix,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SampleRepr {
    data: Matrix,
    seed: u64,
    model_id: u64,
}

#[cfg(feature = "serde")]
impl From<SampleSet> for SampleRepr {
    fn from(s: SampleSet) -> Self {
        Self { data: s.data, seed: s.seed, model_id: s.model_id }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<SampleRepr> for SampleSet {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        SampleSet::from_data(r.data, r.seed, r.model_id)
    }
}

impl SampleSet {
    /// Wraps existing draws (rows are samples).
    pub fn from_data(data: Matrix, seed: u64, model_id: u64) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::InvalidArgument("a sample set needs at least one row".into()));
        }
        let covariance = empirical_covariance(&data, false);
        Ok(Self { data, seed, model_id, covariance })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn p(&self) -> usize {
        self.data.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// [`GaussianModel::fingerprint`] of the generating model.
    pub fn model_id(&self) -> u64 {
        self.model_id
    }

    /// `(1/n) XᵀX`.
    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }
}

/// Draws `n` i.i.d. rows from `N(0, Σ)` as `L z` with `Σ = L Lᵀ` and
/// `z` standard normal, using the sample stream of `seed`.
pub fn sample(m: &GaussianModel, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let p = m.node_count();
    let chol = Cholesky::new(m.covariance())?;
    let l = chol.factor();
    let mut rng = rng::stream(seed, rng::SAMPLE_STREAM);
    let mut data = Vec::with_capacity(n * p);
    let mut z = vec![0.0; p];
    for _ in 0..n {
        for zk in z.iter_mut() {
            *zk = StandardNormal.sample(&mut rng);
        }
        for a in 0..p {
            data.push(l.row(a)[..=a].iter().zip(&z).map(|(x, y)| x * y).sum());
        }
    }
    let data = Matrix::from_row_major(n, p, data)?;
    SampleSet::from_data(data, seed, m.fingerprint())
}

/// `(1/n) XᵀX`, or `(1/n) (X − x̄)ᵀ(X − x̄)` when `centered`.
///
/// The upper triangle is accumulated and mirrored, so the result is exactly
/// symmetric.
pub fn empirical_covariance(data: &Matrix, centered: bool) -> Matrix {
    let (n, p) = (data.rows(), data.cols());
    let mean: Vec<f64> = if centered {
        (0..p).map(|a| (0..n).map(|t| data[(t, a)]).sum::<f64>() / n as f64).collect()
    } else {
        vec![0.0; p]
    };
    let mut acc = Matrix::zeros(p, p);
    let mut x = vec![0.0; p];
    for t in 0..n {
        for (a, xa) in x.iter_mut().enumerate() {
            *xa = data[(t, a)] - mean[a];
        }
        for a in 0..p {
            let xa = x[a];
            for b in a..p {
                acc[(a, b)] += xa * x[b];
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    let mut out = acc.map(|v| v * inv_n);
    out.symmetrize_from_upper();
    out
}

/// Stacks two sample sets with the same dimension.
pub fn concat(a: &SampleSet, b: &SampleSet) -> Result<SampleSet> {
    if a.p() != b.p() {
        return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {}", a.p(), b.p())));
    }
    let mut data = a.data().as_slice().to_vec();
    data.extend_from_slice(b.data().as_slice());
    SampleSet::from_data(Matrix::from_row_major(a.n() + b.n(), a.p(), data)?, a.seed(), a.model_id())
}
