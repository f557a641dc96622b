#![allow(dead_code)]

use ggm_core::graph::{generate_er, Graph};
use ggm_core::{GaussianModel, Matrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Largest |eigenvalue| of a symmetric matrix via nalgebra's eigensolver.
pub fn dense_spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Model on a random ER graph with non-uniform edge weights and diagonal,
/// scaled (through the dense eigensolver) to the requested α.
pub fn random_weighted_model(seed: u64, p: usize, c: f64, alpha: f64) -> GaussianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut g = generate_er(p, c, seed).unwrap();
    if g.edge_count() == 0 {
        g = Graph::path(p);
    }
    let mut w = DMatrix::<f64>::zeros(p, p);
    for (a, b) in g.edges() {
        let mag = rng.random_range(0.2..1.0);
        let v = if rng.random_bool(0.5) { mag } else { -mag };
        w[(a, b)] = v;
        w[(b, a)] = v;
    }
    let norm = dense_spectral_norm(&w.abs());
    let r = w * (alpha / norm);
    let d: Vec<f64> = (0..p).map(|_| rng.random_range(1.0..3.0)).collect();
    let j = Matrix::from_fn(p, p, |a, b| {
        if a == b {
            d[a]
        } else {
            -r[(a, b)] * (d[a] * d[b]).sqrt()
        }
    });
    GaussianModel::new(g, j).unwrap()
}

/// `(J_{-S,-S})⁻¹` restricted to `(i, j)`: the conditional covariance read
/// off the marginal precision after deleting `S`.
pub fn marginal_precision_oracle(j: &Matrix, i: usize, k: usize, s: &[usize]) -> f64 {
    let p = j.rows();
    // Conditioning on S deletes S from the precision; the rest stays Gaussian
    // with precision J_{-S,-S}.
    let keep: Vec<usize> = (0..p).filter(|v| !s.contains(v)).collect();
    let sub = DMatrix::from_fn(keep.len(), keep.len(), |a, b| j[(keep[a], keep[b])]);
    let inv = sub.try_inverse().expect("principal submatrix of a PD matrix");
    let a = keep.iter().position(|&v| v == i).unwrap();
    let b = keep.iter().position(|&v| v == k).unwrap();
    inv[(a, b)]
}

/// All subsets of `items` with at most `k` members, shortlex order.
pub fn subsets_up_to(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (set, start) in &frontier {
            for t in *start..items.len() {
                let mut s = set.clone();
                s.push(items[t]);
                next.push((s, t + 1));
            }
        }
        out.extend(next.iter().map(|(s, _)| s.clone()));
        frontier = next;
    }
    out
}
