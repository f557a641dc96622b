use ggm::core::estimator::{EstimatorConfig, PairStatus, Threshold};
use ggm::core::graph::{Ensemble, EnsembleConfig, Graph};
use ggm::harness::{run_single_trial, run_trial, sweep, SweepResult, TrialConfig, SWEEP_CSV_HEADER};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn er_config(seed: u64) -> TrialConfig {
    TrialConfig {
        ensemble: EnsembleConfig { ensemble: Ensemble::ErdosRenyi { c: 2.0 }, p: 25, seed: 0 },
        graph: None,
        fixed_graph: false,
        trials: 6,
        seed,
        ..TrialConfig::for_graph(Graph::empty(25), 400)
    }
}

fn chain_grid(p: usize, alpha: f64, kappa: f64, ns: &[usize], trials: usize, seed: u64) -> Vec<TrialConfig> {
    ns.iter()
        .map(|&n| {
            let mut cfg = TrialConfig::for_graph(Graph::path(p), n);
            cfg.model.target_alpha = alpha;
            cfg.estimator = EstimatorConfig { eta: 1, threshold: Threshold::Scaled { kappa }, ..EstimatorConfig::default() };
            cfg.trials = trials;
            cfg.seed = seed;
            cfg
        })
        .collect()
}

#[test]
fn same_seed_same_bytes() {
    let grid: Vec<TrialConfig> = [200, 800].iter().map(|&n| TrialConfig { n, ..er_config(42) }).collect();
    let a = sweep(&grid, true).unwrap();
    let b = sweep(&grid, true).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = sweep(&[TrialConfig { n: 200, ..er_config(43) }], true).unwrap();
    assert_ne!(a.rows[0], c.rows[0]);
}

#[test]
fn deleting_a_grid_point_changes_one_row() {
    let grid: Vec<TrialConfig> = [100, 300, 900].iter().map(|&n| TrialConfig { n, ..er_config(5) }).collect();
    let full = sweep(&grid, false).unwrap();
    let part = sweep(&[grid[0].clone(), grid[2].clone()], false).unwrap();
    let strip = |r: &ggm::harness::SweepRow| ggm::harness::SweepRow { index: 0, ..r.clone() };
    assert_eq!(strip(&full.rows[0]), strip(&part.rows[0]));
    assert_eq!(strip(&full.rows[2]), strip(&part.rows[1]));
}

#[test]
fn csv_header_matches_golden_file() {
    let golden = include_str!("golden/sweep_header.csv");
    assert_eq!(golden.trim_end(), SWEEP_CSV_HEADER);
    let csv = sweep(&[er_config(1)], true).unwrap().to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), golden.trim_end());
    let columns = golden.trim_end().split(',').count();
    for line in lines {
        assert_eq!(line.split(',').count(), columns);
    }
}

#[test]
fn rows_carry_bounds_and_probabilities() {
    let res: SweepResult = sweep(&[er_config(2), TrialConfig { n: 50, ..er_config(2) }], true).unwrap();
    assert_eq!(res.rows.len(), 2);
    for r in &res.rows {
        assert!((0.0..=1.0).contains(&r.p_error));
        assert_eq!(r.c_or_delta, Some(2.0));
        assert!(r.n_fano_exact.unwrap() > 0.0 && r.n_fano_simplified.unwrap() > 0.0);
        assert!((r.alpha.unwrap() - 0.5).abs() < 1e-6);
    }
}

#[test]
fn exact_chain_with_oracle_threshold_has_zero_edit_distance() {
    let mut cfg = TrialConfig::for_graph(Graph::path(30), 0);
    cfg.exact = true;
    cfg.trials = 5;
    cfg.estimator = EstimatorConfig { eta: 1, threshold: Threshold::Oracle { gamma: None }, ..EstimatorConfig::default() };
    let recs = run_trial(&cfg).unwrap();
    assert_eq!(recs.len(), 5);
    assert!(recs.iter().all(|r| r.edit_distance == Some(0)));
}

#[test]
fn single_sample_falls_back_to_empty_set() {
    let mut cfg = TrialConfig::for_graph(Graph::path(6), 1);
    cfg.estimator = EstimatorConfig { eta: 1, threshold: Threshold::Fixed { xi: 0.0 }, ..EstimatorConfig::default() };
    let out = run_single_trial(&cfg, 0).unwrap();
    assert_eq!(out.record.error, None);
    let x = out.samples.unwrap();
    let est = out.estimate.unwrap();
    for r in &est.per_pair {
        assert_eq!(r.status, PairStatus::Ok);
        assert_eq!(r.skipped, 4, "every |S| = 1 set needs n > 1");
        assert!(r.argmin.is_empty());
        assert_eq!(r.value, x.covariance()[(r.i, r.j)].abs());
    }
}

#[test]
fn error_rate_non_increasing_in_n_on_chain() {
    let ns = [100, 400, 1600, 6400];
    let trials = 40;
    let rows = sweep(&chain_grid(20, 0.5, 3.0, &ns, trials, 77), false).unwrap().rows;
    let band = 2.0 / (trials as f64).sqrt();
    for w in rows.windows(2) {
        assert!(w[1].p_error <= w[0].p_error + band, "{} -> {}", w[0].p_error, w[1].p_error);
    }
    assert!(rows[0].p_error > rows[3].p_error);
}

#[test]
fn doubling_j_min_lowers_sample_need() {
    let ns: Vec<usize> = (0..9).map(|k| 100 << k).collect();
    let need = |alpha: f64, seed: u64| -> f64 {
        let res = sweep(&chain_grid(20, alpha, 3.0, &ns, 20, seed), false).unwrap();
        res.rows.iter().find(|r| r.p_error <= 0.1).map_or(f64::INFINITY, |r| r.n as f64)
    };
    let weak: Vec<f64> = (0..3).map(|k| need(0.3, 500 + k)).collect();
    let strong: Vec<f64> = (0..3).map(|k| need(0.6, 500 + k)).collect();
    assert!(median(strong.clone()) < median(weak.clone()), "weak {weak:?} strong {strong:?}");
}
