#![allow(dead_code)]

use std::collections::VecDeque;

use ggm::core::graph::Graph;
use ggm::core::{GaussianModel, Matrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn dense_spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Uniform random labelled tree from a Prüfer sequence.
pub fn random_tree(p: usize, seed: u64) -> Graph {
    if p < 2 {
        return Graph::empty(p);
    }
    let mut r = rng(seed);
    let code: Vec<usize> = (0..p - 2).map(|_| r.random_range(0..p)).collect();
    let mut degree = vec![1usize; p];
    for &v in &code {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(p - 1);
    for &v in &code {
        let leaf = (0..p).find(|&u| degree[u] == 1).unwrap();
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..p).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::from_edges(p, edges).unwrap()
}

/// Model on `g` with random signed edge weights and a random diagonal,
/// scaled through the dense eigensolver so that α is exactly `alpha`.
pub fn random_weighted_model(g: &Graph, seed: u64, alpha: f64, unit_diagonal: bool) -> GaussianModel {
    let p = g.node_count();
    let mut r = rng(seed ^ 0x5eed);
    let mut w = DMatrix::<f64>::zeros(p, p);
    for (a, b) in g.edges() {
        let mag = r.random_range(0.2..1.0);
        let v = if r.random_bool(0.5) { mag } else { -mag };
        w[(a, b)] = v;
        w[(b, a)] = v;
    }
    let norm = dense_spectral_norm(&w.abs());
    let scale = if norm > 0.0 { alpha / norm } else { 0.0 };
    let d: Vec<f64> = (0..p).map(|_| if unit_diagonal { 1.0 } else { r.random_range(1.0..3.0) }).collect();
    let j = Matrix::from_fn(p, p, |a, b| if a == b { d[a] } else { -w[(a, b)] * scale * (d[a] * d[b]).sqrt() });
    GaussianModel::new(g.clone(), j).unwrap()
}

/// Conditional covariance from the marginal precision: delete `S` from `J`
/// and invert.
pub fn marginal_precision_oracle(j: &Matrix, i: usize, k: usize, s: &[usize]) -> f64 {
    let keep: Vec<usize> = (0..j.rows()).filter(|v| !s.contains(v)).collect();
    let sub = DMatrix::from_fn(keep.len(), keep.len(), |a, b| j[(keep[a], keep[b])]);
    let inv = sub.try_inverse().expect("principal submatrix of a PD matrix");
    let a = keep.iter().position(|&v| v == i).unwrap();
    let b = keep.iter().position(|&v| v == k).unwrap();
    inv[(a, b)]
}

/// Subsets of `items` with exactly `k` members, lexicographic.
pub fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for t in start..items.len() {
            cur.push(items[t]);
            rec(items, k, t + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Subsets with at most `k` members, shortlex.
pub fn subsets_up_to(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    (0..=k.min(items.len())).flat_map(|size| subsets_of_size(items, size)).collect()
}

/// Whether removing `removed` disconnects `i` from `j`, walking only through
/// nodes accepted by `inside` (endpoints excepted).
pub fn connected_avoiding(g: &Graph, i: usize, j: usize, removed: &[usize], inside: &dyn Fn(usize) -> bool) -> bool {
    let mut seen = vec![false; g.node_count()];
    seen[i] = true;
    let mut q = VecDeque::from([i]);
    while let Some(u) = q.pop_front() {
        if u == j {
            return true;
        }
        if !inside(u) {
            continue;
        }
        for &w in g.neighbors(u) {
            if inside(w) && !seen[w] && !removed.contains(&w) {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    false
}

/// Exhaustive γ-local separator: the first set in shortlex order that cuts
/// `i` from `j` inside the radius-γ ball around `i`.
pub fn brute_force_separator(g: &Graph, i: usize, j: usize, gamma: usize) -> Vec<usize> {
    let p = g.node_count();
    let mut dist = vec![usize::MAX; p];
    dist[i] = 0;
    let mut q = VecDeque::from([i]);
    while let Some(u) = q.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX && dist[u] < gamma {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    let inside = |v: usize| dist[v] != usize::MAX;
    let candidates: Vec<usize> = (0..p).filter(|&v| v != i && v != j).collect();
    for size in 0..=candidates.len() {
        for s in subsets_of_size(&candidates, size) {
            if !connected_avoiding(g, i, j, &s, &inside) {
                return s;
            }
        }
    }
    unreachable!("removing every other node disconnects a non-edge")
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
