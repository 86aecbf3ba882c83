//! Seeded Monte Carlo checks of the sampler and functional.

use critlim::functional::{evaluate_F, TestFunction};
use critlim::montecarlo::{estimate_moments, run_experiment, ExperimentConfig};
use critlim::sampler::{build_grid, factorize, sample, Method, PathBatch, TimeGrid};
use critlim::KernelSpec;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn brownian_variance_at_one() {
    let spec = KernelSpec::fbm(0.5, 4).unwrap();
    let grid = TimeGrid::from_nodes(vec![1.0]).unwrap();
    let fact = factorize(&spec, &grid, Method::Cholesky).unwrap();
    let sq: Vec<f64> = (0..100_000).map(|r| sample(&fact, 1, r, 5).x[0][0].powi(2)).collect();
    let (m, se) = mean_se(&sq);
    assert!((m - 1.0).abs() <= 3.0 * se, "variance {m} +- {se}");
}

#[test]
fn copies_and_components_uncorrelated() {
    let spec = KernelSpec::subfbm(0.4, 5).unwrap();
    let grid = build_grid(1.0, 1.0, 2, 2).unwrap();
    let fact = factorize(&spec, &grid, Method::Cholesky).unwrap();
    let last = grid.len() - 1;
    let mut cross = Vec::new();
    let mut comp = Vec::new();
    for r in 0..50_000 {
        let b = sample(&fact, 2, r, 11);
        cross.push(b.x[0][last] * b.xt[0][last]);
        comp.push(b.x[0][last] * b.x[1][last]);
    }
    for xs in [&cross, &comp] {
        let (m, se) = mean_se(xs);
        assert!(m.abs() <= 4.0 * se, "{m} +- {se}");
    }
}

#[test]
fn swapping_copies_preserves_law() {
    let spec = KernelSpec::fbm(0.5, 4).unwrap();
    let f = TestFunction::gauss(1.0, 4).unwrap();
    let gu = build_grid(2.0, 1.0, 4, 24).unwrap();
    let gv = build_grid(2.0, 0.75, 4, 24).unwrap();
    let union = TimeGrid::union(&gu, &gv).unwrap();
    let fact = factorize(&spec, &union, Method::Cholesky).unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in 0..10_000 {
        let batch = sample(&fact, 4, r, 3);
        let swapped = PathBatch::from_paths(union.nodes().to_vec(), batch.xt.clone(), batch.x.clone()).unwrap();
        a.push(evaluate_F(&f, &batch, &gu, &gv).unwrap().value);
        b.push(evaluate_F(&f, &swapped, &gu, &gv).unwrap().value);
    }
    for m in 1..=2 {
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.powi(m) - y.powi(m)).collect();
        let (mean, se) = mean_se(&diff);
        assert!(mean.abs() <= 4.0 * se, "moment {m}: paired difference {mean} +- {se}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig {
        n_list: vec![2.0, 3.0],
        replicates: 40,
        m_log: 32,
        ..ExperimentConfig::desk_profile(17)
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&cfg).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.to_csv(), four.to_csv());
    assert_eq!(one.raw_csv(), four.raw_csv());
}

#[test]
fn jackknife_matches_moment_targets_for_limit_sample() {
    let law = critlim::limitlaw::LimitLawSpec::new(critlim::limitlaw::Order::Second, 0.6, 1.0, 0.01, 4).unwrap();
    let xs = critlim::limitlaw::sample_limit(&law, 20_000, 8).unwrap();
    let (means, ses) = estimate_moments(&xs, 4).unwrap();
    for m in [2u32, 4] {
        let target = law.moment(m).unwrap();
        let i = m as usize - 1;
        assert!((means[i] - target).abs() <= 4.0 * ses[i], "m={m}: {} vs {target}", means[i]);
    }
}
