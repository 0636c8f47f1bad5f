//! Monte Carlo estimators: Davies-Harte sampling of fBm on a grid, the
//! grid-supremum estimator of the expected supremum, and a pathwise estimator
//! of the coupling bound built on the Paley-Wiener-Zygmund representation.
//!
//! Every estimator splits its paths over [`CHUNKS`] fixed chunks. Chunk `i`
//! draws from a ChaCha20 generator seeded with the user seed and switched to
//! stream `i`, and the per-chunk statistics are merged in chunk order, so the
//! result does not depend on how many threads ran the chunks.

mod davies_harte;
mod pwz;

pub use davies_harte::{sample_fbm, FbmSampler};
pub use pwz::{pwz_coupled_estimate, pwz_tail_sd_bound, PwzConfig};

use crate::closedform::{Horizon, Problem};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// Number of independent random streams every estimator is split into.
pub const CHUNKS: usize = 64;

/// `Cov(B_H(s), B_H(t)) = (s^2H + t^2H - |t - s|^2H) / 2`.
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Values of a path on the equidistant grid `k * step`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    step: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::domain("GridPath", format!("step must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(Error::domain("GridPath", format!("need at least 2 values, got {}", values.len())));
        }
        if values[0] != 0.0 {
            return Err(Error::domain("GridPath", format!("path must start at 0, got {}", values[0])));
        }
        Ok(GridPath { step, values })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// `max_k (values[k] - a k step)`, which is at least zero.
    pub fn drifted_max(&self, a: f64) -> f64 {
        drifted_max(&self.values, self.step, a)
    }
}

fn drifted_max(values: &[f64], step: f64, a: f64) -> f64 {
    values.iter().enumerate().fold(0.0, |m, (k, &v)| m.max(v - a * k as f64 * step))
}

/// Sample mean with its standard error and normal 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub paths: usize,
    pub grid_n: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_stats(stats: &Welford, grid_n: usize, seed: u64) -> Self {
        let stderr = stats.stderr();
        McEstimate {
            mean: stats.mean,
            stderr,
            ci95_lo: stats.mean - 1.96 * stderr,
            ci95_hi: stats.mean + 1.96 * stderr,
            paths: stats.n,
            grid_n,
            seed,
        }
    }
}

/// Running mean and centred sum of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub(crate) fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub(crate) fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `per_chunk(rng, count)` over the fixed chunks in parallel and returns
/// the results in chunk order. Chunk `i` gets `paths / CHUNKS` paths, plus one
/// if `i < paths % CHUNKS`.
pub(crate) fn run_chunks<A, F>(paths: usize, seed: u64, per_chunk: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha20Rng, usize) -> Result<A> + Sync,
{
    (0..CHUNKS)
        .into_par_iter()
        .map(|i| {
            let count = paths / CHUNKS + usize::from(i < paths % CHUNKS);
            per_chunk(&mut chunk_rng(seed, i), count)
        })
        .collect()
}

pub(crate) fn check_paths(what: &'static str, paths: usize) -> Result<()> {
    if paths < 2 {
        return Err(Error::domain(what, format!("need at least 2 paths, got {paths}")));
    }
    Ok(())
}

/// Grid estimate of `E max_k (B_H(kT/n) - a kT/n)`, which approaches the
/// expected supremum from below as `n` grows.
pub fn mc_sup_estimate(problem: &Problem, n: usize, paths: usize, seed: u64) -> Result<McEstimate> {
    check_paths("mc_sup_estimate", paths)?;
    let t = match problem.t() {
        Horizon::Finite(t) => t,
        Horizon::Infinite => {
            return Err(Error::unsupported("mc_sup_estimate", "the infinite horizon cannot be simulated"));
        }
    };
    let sampler = FbmSampler::new(n, problem.h(), t)?;
    let a = problem.a();
    let step = t / n as f64;
    let parts = run_chunks(paths, seed, |rng, count| {
        let mut stats = Welford::default();
        let mut scratch = sampler.scratch();
        let mut done = 0;
        while done < count {
            let (first, second) = sampler.sample_into(rng, &mut scratch);
            stats.push(drifted_max(first, step, a));
            done += 1;
            if done < count {
                stats.push(drifted_max(second, step, a));
                done += 1;
            }
        }
        Ok(stats)
    })?;
    let mut stats = Welford::default();
    parts.iter().for_each(|p| stats.merge(p));
    Ok(McEstimate::from_stats(&stats, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn covariance_examples() {
        assert!((fbm_covariance(2.0, 2.0, 0.3) - 2f64.powf(0.6)).abs() < 1e-15);
        assert!((fbm_covariance(0.3, 0.9, 0.5) - 0.3).abs() < 1e-15);
        assert_eq!(fbm_covariance(0.2, 0.7, 0.65), fbm_covariance(0.7, 0.2, 0.65));
    }

    #[test]
    fn grid_path_invariants() {
        assert!(GridPath::new(0.1, vec![0.0]).is_err());
        assert!(GridPath::new(0.1, vec![1.0, 2.0]).is_err());
        assert!(GridPath::new(0.0, vec![0.0, 2.0]).is_err());
        let p = GridPath::new(0.5, vec![0.0, 1.0, 0.2]).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.drifted_max(1.0), 0.5);
        assert_eq!(p.drifted_max(3.0), 0.0);
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..97).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut merged = Welford::default();
        for part in xs.chunks(10) {
            let mut w = Welford::default();
            part.iter().for_each(|&x| w.push(x));
            merged.merge(&w);
        }
        assert_eq!(merged.n, whole.n);
        assert!((merged.mean - whole.mean).abs() < 1e-14);
        assert!((merged.m2 - whole.m2).abs() < 1e-12);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((whole.mean - mean).abs() < 1e-14);
    }

    #[test]
    fn estimate_invariants() {
        let p = Problem::new(0.5, 1.0, 0.0).unwrap();
        assert!(mc_sup_estimate(&p, 64, 1, 1).is_err());
        assert!(mc_sup_estimate(&p, 100, 10, 1).is_err());
        let e = mc_sup_estimate(&p, 64, 130, 1).unwrap();
        assert_eq!(e.paths, 130);
        assert!(e.stderr >= 0.0);
        assert!((e.ci95_hi - e.mean - 1.96 * e.stderr).abs() < 1e-15);
        assert!((e.mean - e.ci95_lo - 1.96 * e.stderr).abs() < 1e-15);
        let inf = Problem::new(0.5, Horizon::Infinite, 1.0).unwrap();
        assert!(mc_sup_estimate(&inf, 64, 10, 1).is_err());
    }

    #[test]
    fn estimate_is_reproducible_across_thread_counts() {
        let p = Problem::new(0.3, 1.0, 0.5).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| mc_sup_estimate(&p, 128, 301, 42).unwrap());
        let b = three.install(|| mc_sup_estimate(&p, 128, 301, 42).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = mc_sup_estimate(&p, 128, 301, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    /// Spitzer's identity: `E max_{k<=n} S_k = Σ_k E[S_k^+] / k` for a
    /// Gaussian random walk with steps `N(-a Δ, Δ)`.
    fn random_walk_max_mean(t: f64, a: f64, n: usize) -> f64 {
        let dt = t / n as f64;
        (1..=n)
            .map(|k| {
                let (mu, sd) = (-a * k as f64 * dt, (k as f64 * dt).sqrt());
                let z = mu / sd;
                let pos = mu * 0.5 * crate::specfun::erfc(-z / 2f64.sqrt()) + sd * (-z * z / 2.0).exp() / (2.0 * PI).sqrt();
                pos / k as f64
            })
            .sum()
    }

    #[test]
    fn brownian_grid_maximum_matches_random_walk_identity() {
        for &(a, n) in &[(0.0, 64), (1.0, 128), (100.0, 1024)] {
            let p = Problem::new(0.5, 1.0, a).unwrap();
            let e = mc_sup_estimate(&p, n, 20_000, 11).unwrap();
            let exact = random_walk_max_mean(1.0, a, n);
            assert!((e.mean - exact).abs() < 3.0 * e.stderr, "a = {a}: {} vs {exact} ± {}", e.mean, e.stderr);
        }
    }

    #[test]
    fn strong_drift_grid_maximum_tends_to_closed_form() {
        // With a = 100 the supremum is attained around t ~ 1e-4, so only very
        // fine grids see it; the grid deficit shrinks like √(T/n).
        let exact = crate::closedform::brownian_sup_mean(1.0, 100.0).unwrap();
        assert!((exact - 0.005).abs() < 1e-12);
        let coarse = random_walk_max_mean(1.0, 100.0, 1 << 10);
        let fine = random_walk_max_mean(1.0, 100.0, 1 << 20);
        assert!(coarse < fine && fine < exact);
        let predicted = 0.5826 * (1.0 / (1u64 << 20) as f64).sqrt();
        assert!(((exact - fine) / predicted - 1.0).abs() < 0.1, "{} vs {predicted}", exact - fine);
    }

    #[test]
    fn nearly_linear_paths_at_h_close_to_one() {
        // For H -> 1 the path is t Z, whose maximum over [0, 1] is max(0, Z).
        let p = Problem::new(0.999, 1.0, 0.0).unwrap();
        let e = mc_sup_estimate(&p, 1024, 20_000, 5).unwrap();
        assert!((e.mean - 1.0 / (2.0 * PI).sqrt()).abs() < 0.01, "{}", e.mean);
    }
}
