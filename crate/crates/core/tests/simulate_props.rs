use fbmsup::simulate::{mc_sup_estimate, pwz_coupled_estimate, sample_fbm};
use fbmsup::{CouplingWeights, Problem, PwzConfig};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn grid_estimate_ignores_thread_count() {
    let p = Problem::new(0.35, 2.0, 0.4).unwrap();
    let one = in_pool(1, || mc_sup_estimate(&p, 128, 1500, 21).unwrap());
    let three = in_pool(3, || mc_sup_estimate(&p, 128, 1500, 21).unwrap());
    assert_eq!(one, three);
    assert_ne!(one, mc_sup_estimate(&p, 128, 1500, 22).unwrap());
}

#[test]
fn pwz_estimate_ignores_thread_count() {
    let c = CouplingWeights::new(1.0, -0.5).unwrap();
    let config = PwzConfig::new(1.0, 64, 300, 9);
    let one = in_pool(1, || pwz_coupled_estimate(0.4, 1.0, 0.2, c, &config).unwrap());
    let two = in_pool(2, || pwz_coupled_estimate(0.4, 1.0, 0.2, c, &config).unwrap());
    assert_eq!(one, two);
}

/// Empirical covariance of the sampled grid values against
/// `(s^2H + t^2H - |t-s|^2H) / 2`.
#[test]
fn sampled_paths_have_fbm_covariance() {
    let (n, h, t, paths) = (8usize, 0.3, 2.0, 20000u64);
    let mut sums = vec![vec![0.0; n + 1]; n + 1];
    for seed in 0..paths {
        let path = sample_fbm(n, h, t, seed).unwrap();
        let v = path.values();
        for i in 0..=n {
            for j in 0..=n {
                sums[i][j] += v[i] * v[j];
            }
        }
    }
    let step = t / n as f64;
    for i in 1..=n {
        for j in 1..=n {
            let (s, u) = (i as f64 * step, j as f64 * step);
            let exact = 0.5 * (s.powf(2.0 * h) + u.powf(2.0 * h) - (s - u).abs().powf(2.0 * h));
            let sample = sums[i][j] / paths as f64;
            // Sampling error of a product moment is about sqrt(2/paths) times the variance scale.
            assert!((sample - exact).abs() < 5.0 * (2.0 / paths as f64).sqrt() * t.powf(2.0 * h), "({i}, {j}): {sample} vs {exact}");
        }
    }
}

#[test]
fn grid_max_is_never_negative_and_ci_is_symmetric() {
    let p = Problem::new(0.6, 1.0, 3.0).unwrap();
    let est = mc_sup_estimate(&p, 64, 500, 1).unwrap();
    assert!(est.mean >= 0.0);
    assert!((est.ci95_hi - est.mean - (est.mean - est.ci95_lo)).abs() < 1e-12);
    assert!((est.ci95_hi - est.mean - 1.96 * est.stderr).abs() < 1e-12);
    assert_eq!((est.paths, est.grid_n, est.seed), (500, 64, 1));
}
