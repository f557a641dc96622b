//! Small dense linear algebra: row-major matrices, Cholesky, power iteration.
//!
//! Everything here is sized for models with a few hundred variables and
//! conditioning sets with a handful of members. No BLAS, no unsafe.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot floor for Cholesky: a pivot must exceed this times the
/// largest diagonal entry.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from a row-major buffer.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |a, b| self[(rows[a], cols[b])])
    }

    /// Copies the upper triangle into the lower one.
    pub(crate) fn symmetrize_from_upper(&mut self) {
        for i in 0..self.rows {
            for j in 0..i {
                self[(i, j)] = self[(j, i)];
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric matrix. Only the lower triangle is read.
    ///
    /// Fails with [`Error::NotPositiveDefinite`] when a pivot drops below
    /// [`PIVOT_TOLERANCE`] times the largest diagonal entry.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("Cholesky needs a square matrix".into()));
        }
        let n = a.rows();
        let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
        let floor = PIVOT_TOLERANCE * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let pivot = a[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
            if !(pivot > floor && pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { index: j, pivot });
            }
            let d = libm::sqrt(pivot);
            l[(j, j)] = d;
            for i in j + 1..n {
                let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &y[..i]);
            y[i] = (y[i] - s) / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Symmetric inverse `A⁻¹`, exactly symmetric by construction.
    pub fn inverse(&self) -> Matrix {
        let n = self.l.rows();
        // W = L⁻¹ (lower triangular), then A⁻¹ = Wᵀ W.
        let mut w = Matrix::zeros(n, n);
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in c..i {
                    s -= self.l[(i, k)] * w[(k, c)];
                }
                w[(i, c)] = s / self.l[(i, i)];
            }
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in j..n {
                    s += w[(k, i)] * w[(k, j)];
                }
                inv[(i, j)] = s;
            }
        }
        inv.symmetrize_from_upper();
        inv
    }

    /// Cheap condition number estimate `(max L_kk / min L_kk)²`.
    ///
    /// This is a lower bound on the 2-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let d = self.l.diagonal();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if d.is_empty() {
            1.0
        } else {
            (hi / lo) * (hi / lo)
        }
    }
}

/// Outcome of [`symmetric_spectral_norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIteration {
    pub norm: f64,
    pub iterations: usize,
}

/// Spectral norm of a symmetric matrix by power iteration on `A²`.
///
/// Iterating on the square sidesteps the `±λ` tie that stalls plain power
/// iteration on bipartite sparsity patterns. Stops once the residual
/// `‖A²v − μv‖` is at most `rel_tol · μ`. The all-ones start vector has a
/// positive component along every Perron vector, so for entrywise
/// nonnegative matrices the dominant eigenspace is always reached.
pub fn symmetric_spectral_norm(a: &Matrix, rel_tol: f64, max_iters: usize) -> Result<PowerIteration> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("spectral norm needs a square matrix".into()));
    }
    let n = a.rows();
    if n == 0 || a.max_abs() == 0.0 {
        return Ok(PowerIteration { norm: 0.0, iterations: 0 });
    }
    let mut v = vec![1.0 / libm::sqrt(n as f64); n];
    for it in 1..=max_iters {
        let w = a.matvec(&v);
        let u = a.matvec(&w);
        let mu = dot(&w, &w);
        if mu == 0.0 {
            // v fell into the null space; only possible for signed matrices.
            return Err(Error::NumericFailure("power iteration collapsed to zero".into()));
        }
        let residual = libm::sqrt(u.iter().zip(&v).map(|(x, y)| (x - mu * y) * (x - mu * y)).sum::<f64>());
        if residual <= rel_tol * mu {
            return Ok(PowerIteration { norm: libm::sqrt(mu), iterations: it });
        }
        let scale = norm2(&u);
        v = u.into_iter().map(|x| x / scale).collect();
    }
    Err(Error::NoConvergence { iterations: max_iters })
}

/// Reusable buffers for conditional covariance blocks `Σ(A|S)` with `|A| = 2`.
#[derive(Clone, Debug, Default)]
pub(crate) struct SchurWorkspace {
    ss: Vec<f64>,
    l: Vec<f64>,
    ys: [Vec<f64>; 2],
}

/// Result of a 2×2 Schur complement: the conditional covariance block of
/// `(i, j)` given `S`, plus the pivot-based condition estimate of `Σ(S,S)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PairSchur {
    pub ii: f64,
    pub ij: f64,
    pub jj: f64,
    pub condition: f64,
}

impl SchurWorkspace {
    /// `Σ(A,A) − Σ(A,S) Σ(S,S)⁻¹ Σ(S,A)` for `A = {i, j}`.
    ///
    /// Returns `None` when `Σ(S,S)` has a non-positive pivot.
    pub fn pair(&mut self, sigma: &Matrix, i: usize, j: usize, s: &[usize]) -> Option<PairSchur> {
        let k = s.len();
        if k == 0 {
            return Some(PairSchur { ii: sigma[(i, i)], ij: sigma[(i, j)], jj: sigma[(j, j)], condition: 1.0 });
        }
        self.ss.clear();
        for &a in s {
            for &b in s {
                self.ss.push(sigma[(a, b)]);
            }
        }
        // In-place Cholesky of Σ(S,S) into `l` (row-major, lower).
        self.l.clear();
        self.l.resize(k * k, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for c in 0..k {
            let mut pivot = self.ss[c * k + c];
            for t in 0..c {
                pivot -= self.l[c * k + t] * self.l[c * k + t];
            }
            if !(pivot > 0.0) {
                return None;
            }
            let d = libm::sqrt(pivot);
            self.l[c * k + c] = d;
            lo = lo.min(d);
            hi = hi.max(d);
            for r in c + 1..k {
                let mut v = self.ss[r * k + c];
                for t in 0..c {
                    v -= self.l[r * k + t] * self.l[c * k + t];
                }
                self.l[r * k + c] = v / d;
            }
        }
        // y_a = L⁻¹ Σ(S, a) for a ∈ {i, j}; the Schur update is y_aᵀ y_b.
        for (slot, &a) in [i, j].iter().enumerate() {
            let y = &mut self.ys[slot];
            y.clear();
            for r in 0..k {
                let mut v = sigma[(s[r], a)];
                for t in 0..r {
                    v -= self.l[r * k + t] * y[t];
                }
                y.push(v / self.l[r * k + r]);
            }
        }
        let (yi, yj) = (&self.ys[0], &self.ys[1]);
        Some(PairSchur {
            ii: sigma[(i, i)] - dot(yi, yi),
            ij: sigma[(i, j)] - dot(yi, yj),
            jj: sigma[(j, j)] - dot(yj, yj),
            condition: (hi / lo) * (hi / lo),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd3() -> Matrix {
        Matrix::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, -0.2], vec![0.5, -0.2, 2.0]]).unwrap()
    }

    #[test]
    fn cholesky_inverse_reconstructs_identity() {
        let a = spd3();
        let inv = Cholesky::new(&a).unwrap().inverse();
        assert!(a.matmul(&inv).max_abs_diff(&Matrix::identity(3)) < 1e-14);
        assert!(inv.is_symmetric());
    }

    #[test]
    fn cholesky_solve_matches_inverse() {
        let a = spd3();
        let ch = Cholesky::new(&a).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let y = ch.inverse().matvec(&[1.0, 2.0, 3.0]);
        for (u, v) in x.iter().zip(&y) {
            assert_relative_eq!(u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_and_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(Cholesky::new(&a), Err(Error::NotPositiveDefinite { index: 1, .. })));
        let s = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(Cholesky::new(&s).is_err());
    }

    #[test]
    fn spectral_norm_of_bipartite_pattern() {
        // Path on 3 nodes: eigenvalues ±√2 and 0.
        let a = Matrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let r = symmetric_spectral_norm(&a, 1e-12, 1000).unwrap();
        assert_relative_eq!(r.norm, core::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn spectral_norm_of_zero_is_zero() {
        assert_eq!(symmetric_spectral_norm(&Matrix::zeros(4, 4), 1e-10, 10).unwrap().norm, 0.0);
    }

    #[test]
    fn schur_pair_matches_explicit_formula() {
        let a = spd3();
        let mut ws = SchurWorkspace::default();
        let r = ws.pair(&a, 0, 1, &[2]).unwrap();
        assert_relative_eq!(r.ij, 1.0 - 0.5 * -0.2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.ii, 4.0 - 0.25 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.jj, 3.0 - 0.04 / 2.0, epsilon = 1e-15);
    }
}
