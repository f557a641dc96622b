//! Property tests for the model, estimator, sampler, graph and bounds invariants.

mod common;

use common::*;
use ggm_core::bounds::{
    atypical_probability_bound, fano_lower_bound, fano_lower_bound_distortion, log2_graph_probability, rate_function, TypicalSet,
};
use ggm_core::estimator::{cmit, min_conditional_statistic, EstimationInput, EstimatorConfig, Statistic, Threshold};
use ggm_core::graph::{edit_distance, generate_er, generate_regular, girth, local_separator, separation_profile, Graph};
use ggm_core::lbp::{lbp_run, LbpConfig};
use ggm_core::model::{conditional_covariance_exact, synthesize_model, truncated_walksum_covariance, SignPattern};
use ggm_core::sampler::{concat, empirical_covariance, sample};
use proptest::prelude::*;

fn sign_pattern() -> impl Strategy<Value = SignPattern> {
    prop_oneof![
        Just(SignPattern::Attractive),
        Just(SignPattern::Alternating),
        any::<u64>().prop_map(|seed| SignPattern::Random { seed }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditional_variance_is_capped(seed in 0u64..10_000, p in 3usize..=8, alpha in 0.05f64..0.95) {
        let m = random_weighted_model(seed, p, 2.5, alpha).normalized();
        let cap = 1.0 / (1.0 - m.alpha());
        let nodes: Vec<usize> = (0..p).collect();
        for s in subsets_up_to(&nodes, 5.min(p - 1)) {
            for i in (0..p).filter(|v| !s.contains(v)) {
                let v = conditional_covariance_exact(m.covariance(), i, i, &s).unwrap();
                prop_assert!(v <= cap + 1e-9, "Σ({i},{i}|{s:?}) = {v} > {cap}");
            }
        }
    }

    #[test]
    fn walk_sum_truncation_bound(seed in 0u64..10_000, p in 3usize..=12, alpha in 0.05f64..0.9) {
        let m = random_weighted_model(seed, p, 3.0, alpha).normalized();
        let r = m.partial_correlations();
        for k in 1..=30 {
            let err = truncated_walksum_covariance(&r, k).max_abs_diff(m.covariance());
            let bound = m.alpha().powi(k as i32 + 1) / (1.0 - m.alpha());
            prop_assert!(err <= bound + 1e-12, "K = {k}: {err} > {bound}");
        }
    }

    #[test]
    fn unnormalized_scaling(seed in 0u64..10_000, p in 3usize..=8) {
        let m = random_weighted_model(seed, p, 2.5, 0.6);
        let n = m.normalized();
        let d = m.precision().diagonal();
        let nodes: Vec<usize> = (0..p).collect();
        for s in subsets_up_to(&nodes, 2) {
            for i in (0..p).filter(|v| !s.contains(v)) {
                for j in (i + 1..p).filter(|v| !s.contains(v)) {
                    let general = conditional_covariance_exact(m.covariance(), i, j, &s).unwrap();
                    let scaled = conditional_covariance_exact(n.covariance(), i, j, &s).unwrap() / (d[i] * d[j]).sqrt();
                    prop_assert!((general - scaled).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn attractive_neighbors_stay_correlated(seed in 0u64..10_000, p in 3usize..=8, alpha in 0.1f64..0.9, diag in 1.0f64..3.0) {
        let g = generate_er(p, 3.0, seed).unwrap();
        prop_assume!(g.edge_count() > 0);
        let m = synthesize_model(&g, alpha, SignPattern::Attractive, diag).unwrap();
        let j = m.precision();
        let nodes: Vec<usize> = (0..p).collect();
        for (a, b) in g.edges() {
            let floor = j[(a, b)].abs() / (j[(a, a)] * j[(b, b)] - j[(a, b)] * j[(a, b)]);
            for s in subsets_up_to(&nodes, 3).into_iter().filter(|s| !s.contains(&a) && !s.contains(&b)) {
                let v = conditional_covariance_exact(m.covariance(), a, b, &s).unwrap().abs();
                prop_assert!(v >= floor - 1e-12, "({a},{b}|{s:?}): {v} < {floor}");
            }
        }
    }

    #[test]
    fn cycle_non_neighbor_decay(len in 5usize..=20, alpha in 0.1f64..0.9, gamma in 2usize..=5, signs in sign_pattern()) {
        let g = Graph::cycle(len).unwrap();
        let m = synthesize_model(&g, alpha, signs, 1.0).unwrap();
        let bound = alpha.powi(gamma as i32) * 2.0 * alpha / (1.0 - alpha) + 1e-9;
        for (&(i, j), s) in &separation_profile(&g, gamma).per_pair {
            let v = conditional_covariance_exact(m.covariance(), i, j, s).unwrap().abs();
            prop_assert!(v <= bound, "C{len} ({i},{j}|{s:?}): {v} > {bound}");
        }
    }

    #[test]
    fn cmit_is_permutation_equivariant(seed in 0u64..10_000, perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let p = 9;
        let g = generate_er(p, 2.5, seed).unwrap();
        prop_assume!(g.edge_count() > 0);
        let m = synthesize_model(&g, 0.5, SignPattern::Random { seed }, 1.0).unwrap();
        let mut perm: Vec<usize> = (0..p).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let gp = g.relabel(&perm).unwrap();
        let jp = ggm_core::Matrix::from_fn(p, p, |a, b| {
            let inv = |x: usize| perm.iter().position(|&y| y == x).unwrap();
            m.precision()[(inv(a), inv(b))]
        });
        let mp = ggm_core::GaussianModel::new(gp, jp).unwrap();
        let cfg = EstimatorConfig { eta: 2, threshold: Threshold::Fixed { xi: 0.05 }, ..Default::default() };
        let a = cmit(&EstimationInput::exact(&m), &cfg).unwrap().graph;
        let b = cmit(&EstimationInput::exact(&mp), &cfg).unwrap().graph;
        prop_assert_eq!(a.relabel(&perm).unwrap(), b);
    }

    #[test]
    fn threshold_and_eta_monotonicity(seed in 0u64..10_000, xi_lo in 0.0f64..0.2, bump in 0.0f64..0.2) {
        let m = random_weighted_model(seed, 8, 3.0, 0.6);
        let input = EstimationInput::exact(&m);
        let lo = cmit(&input, &EstimatorConfig { eta: 1, threshold: Threshold::Fixed { xi: xi_lo }, ..Default::default() }).unwrap();
        let hi = cmit(&input, &EstimatorConfig { eta: 1, threshold: Threshold::Fixed { xi: xi_lo + bump }, ..Default::default() }).unwrap();
        prop_assert!(hi.graph.edges().all(|(i, j)| lo.graph.has_edge(i, j)));
        for i in 0..8 {
            for j in i + 1..8 {
                let mut prev = f64::INFINITY;
                for eta in 0..=3 {
                    let v = min_conditional_statistic(&input, i, j, eta, Statistic::Covariance).unwrap().value;
                    prop_assert!(v <= prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn correlation_bounded(seed in 0u64..10_000, n in 5usize..40) {
        let m = random_weighted_model(seed, 7, 3.0, 0.8);
        let s = sample(&m, n, seed).unwrap();
        let nodes: Vec<usize> = (0..7).collect();
        for set in subsets_up_to(&nodes, 2) {
            for i in (0..7).filter(|v| !set.contains(v)) {
                for j in (i + 1..7).filter(|v| !set.contains(v)) {
                    if let Ok(r) = ggm_core::estimator::conditional_correlation(s.covariance(), i, j, &set) {
                        prop_assert!(r.abs() <= 1.0 + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn concatenated_covariance_is_weighted_average(seed in 0u64..10_000, n1 in 1usize..60, n2 in 1usize..60) {
        let m = random_weighted_model(seed, 5, 2.0, 0.5);
        let a = sample(&m, n1, seed).unwrap();
        let b = sample(&m, n2, seed + 1).unwrap();
        let ab = concat(&a, &b).unwrap();
        let w = |x: f64, y: f64| (n1 as f64 * x + n2 as f64 * y) / (n1 + n2) as f64;
        for i in 0..5 {
            for j in 0..5 {
                prop_assert!((ab.covariance()[(i, j)] - w(a.covariance()[(i, j)], b.covariance()[(i, j)])).abs() <= 1e-12);
            }
        }
        prop_assert!(empirical_covariance(ab.data(), true).is_symmetric());
        prop_assert!(ab.covariance().is_symmetric());
    }

    #[test]
    fn sampling_is_pure(seed in any::<u64>(), n in 1usize..30) {
        let m = random_weighted_model(seed % 1000, 6, 2.0, 0.5);
        prop_assert_eq!(sample(&m, n, seed).unwrap(), sample(&m, n, seed).unwrap());
    }

    #[test]
    fn edit_distance_is_a_metric(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
        let (a, b, c) = (generate_er(12, 3.0, s1).unwrap(), generate_er(12, 3.0, s2).unwrap(), generate_er(12, 3.0, s3).unwrap());
        let d = |x: &Graph, y: &Graph| edit_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &a), 0);
    }

    #[test]
    fn separator_really_separates(seed in 0u64..10_000, gamma in 0usize..6) {
        let g = generate_er(12, 3.0, seed).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                if i == j || g.has_edge(i, j) {
                    continue;
                }
                let s = local_separator(&g, i, j, gamma).unwrap();
                let ball = ggm_core::graph::ball(&g, i, gamma);
                prop_assert!(s.iter().all(|v| ball.contains(v)));
                let h = ggm_core::graph::gamma_subgraph(&g, i, gamma);
                let cut = Graph::from_edges(12, h.edges().filter(|&(u, v)| !s.contains(&u) && !s.contains(&v))).unwrap();
                prop_assert!(!ggm_core::graph::ball(&cut, i, 12).contains(&j));
            }
        }
    }

    #[test]
    fn girth_of_cycles(len in 3usize..30) {
        prop_assert_eq!(girth(&Graph::cycle(len).unwrap()), Some(len));
    }

    #[test]
    fn short_radius_below_girth_needs_one_separator(seed in 0u64..10_000, half in 2usize..=5, parts in 2usize..=3) {
        // Subdividing every edge of a cubic graph into `parts` edges multiplies its girth.
        let base = generate_regular(2 * half, 3, seed).unwrap();
        let mut edges = Vec::new();
        let mut next = base.node_count();
        for (u, v) in base.edges() {
            let mut prev = u;
            for _ in 1..parts {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, v));
        }
        let g = Graph::from_edges(next, edges).unwrap();
        let p = g.node_count();
        let gi = girth(&g).unwrap();
        // The γ-ball is an induced subgraph, so it is a tree iff 2γ + 1 < girth.
        let gamma = (gi - 2) / 2;
        prop_assume!(gamma >= 2);
        for i in 0..p {
            let dist = g.distances_within(i, gamma);
            for j in 0..p {
                if i != j && !g.has_edge(i, j) && dist[j] != usize::MAX {
                    prop_assert_eq!(local_separator(&g, i, j, gamma).unwrap().len(), 1);
                }
            }
        }
    }

    #[test]
    fn lbp_converges_within_budget(seed in 0u64..10_000, alpha in 0.1f64..0.9) {
        let m = random_weighted_model(seed, 12, 3.0, alpha);
        let tol: f64 = 1e-10;
        let budget = 10 * (tol.ln() / alpha.ln()).ceil() as usize;
        let h: Vec<f64> = (0..12).map(|k| ((k * 7 + seed as usize) % 5) as f64 - 2.0).collect();
        let r = lbp_run(&m, &h, &LbpConfig { max_iters: budget, tol }).unwrap();
        prop_assert!(r.converged(), "no convergence in {budget} iterations");
        let exact = m.covariance().matvec(&h);
        for (a, b) in r.means.iter().zip(&exact) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn fano_monotone_and_nonnegative(p in 10usize..2000, c in 0.5f64..5.0, alpha in 0.01f64..0.99, d in 0.0f64..20.0) {
        prop_assume!(c < p as f64);
        let b = fano_lower_bound(p, c, alpha).unwrap();
        prop_assert!(b.exact >= 0.0 && b.simplified >= 0.0);
        let b2 = fano_lower_bound(p, c, (alpha + 1.0) / 2.0).unwrap();
        prop_assert!(b2.exact < b.exact);
        let lo = fano_lower_bound_distortion(p, c, alpha, d).unwrap();
        let hi = fano_lower_bound_distortion(p, c, alpha, d + 1.0).unwrap();
        prop_assert!(hi.value <= lo.value);
        prop_assert!(lo.value <= b.exact);
    }

    #[test]
    fn exact_fano_dominates_for_small_degree(p in 10usize..5000, c in 0.1f64..2.0, alpha in 0.01f64..0.99) {
        let b = fano_lower_bound(p, c, alpha).unwrap();
        prop_assert!(b.exact >= b.simplified);
    }

    #[test]
    fn rate_function_increasing(c in 0.1f64..10.0, e in 0.0f64..5.0, dc in 0.01f64..1.0, de in 0.01f64..1.0) {
        let k = rate_function(c, e).unwrap();
        prop_assert!(rate_function(c + dc, e).unwrap() >= k);
        prop_assert!(rate_function(c, e + de).unwrap() > k);
    }
}

#[test]
fn exact_fano_falls_below_simplified_for_large_degree() {
    let b = fano_lower_bound(1024, 3.0, 0.5).unwrap();
    assert!(b.exact < b.simplified);
}

/// Enumerates all graphs on `p` nodes by edge mask.
fn all_edge_counts(p: usize) -> Vec<usize> {
    let pairs = p * (p - 1) / 2;
    (0u32..1 << pairs).map(|mask| mask.count_ones() as usize).collect()
}

#[test]
fn atypical_bound_holds_exhaustively_at_p4() {
    let (p, c, eps) = (4, 1.0, 1.0);
    let t = TypicalSet::new(p, c, eps).unwrap();
    let atypical: f64 = all_edge_counts(p)
        .into_iter()
        .filter(|&m| !t.contains_edge_count(m))
        .map(|m| log2_graph_probability(p, c, m).exp2())
        .sum();
    assert_eq!(all_edge_counts(p).len(), 64);
    assert!(atypical <= atypical_probability_bound(p, c, eps).unwrap());
}

#[test]
fn typical_cardinality_upper_bound_holds() {
    for p in [3usize, 4, 5] {
        for c in [0.5, 1.0, 1.5, 2.0] {
            for eps in [0.25, 0.5, 1.0] {
                let t = TypicalSet::new(p, c, eps).unwrap();
                let count = all_edge_counts(p).into_iter().filter(|&m| t.contains_edge_count(m)).count();
                let (_, upper) = t.log2_cardinality_bounds();
                assert!((count as f64).log2() <= upper + 1e-12 || count == 0, "p={p} c={c} ε={eps}: {count} members");
            }
        }
    }
}

#[test]
fn graph_probabilities_sum_to_one() {
    let total: f64 = all_edge_counts(5).into_iter().map(|m| log2_graph_probability(5, 1.5, m).exp2()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn sparse_er_separators_fit_in_two() {
    // γ = ⌊ln p / (4 ln c)⌋ at p = 200, c = 3.
    let (p, c) = (200usize, 3.0f64);
    let gamma = ((p as f64).ln() / (4.0 * c.ln())).floor() as usize;
    let seeds = 40u64;
    let good = (0..seeds).filter(|&s| separation_profile(&generate_er(p, c, s).unwrap(), gamma).eta <= 2).count();
    assert!(good as f64 >= 0.95 * seeds as f64, "{good}/{seeds}");
}

#[test]
fn odd_girth_cycle_fits_in_the_ball() {
    // γ = 2 < 5/2, yet the whole 5-cycle lies in B_2(0).
    assert_eq!(local_separator(&Graph::cycle(5).unwrap(), 0, 2, 2).unwrap(), vec![1, 3]);
    assert_eq!(local_separator(&Graph::cycle(6).unwrap(), 0, 2, 2).unwrap(), vec![1]);
}
