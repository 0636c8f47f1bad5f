//! Exact sampling of fractional Gaussian noise by circulant embedding.

use super::{chunk_rng, GridPath};
use crate::closedform::Horizon;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Eigenvalues below `-NEGATIVE_EIGEN_TOL * max` are treated as a failure of
/// the embedding; smaller negatives are rounding and are clipped to zero.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Precomputed circulant embedding of the unit-step fGn autocovariance.
///
/// Each call to [`FbmSampler::sample_into`] produces two independent paths,
/// the real and imaginary parts of one complex transform.
pub struct FbmSampler {
    n: usize,
    scale: f64,
    /// `sqrt(λ_k / 2n)`.
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

/// Buffers reused across draws.
pub struct Scratch {
    work: Vec<Complex<f64>>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl FbmSampler {
    /// Sampler for fBm with Hurst index `h` on `n` equal cells of `[0, t]`.
    pub fn new(n: usize, h: f64, t: impl Into<Horizon>) -> Result<Self> {
        let t = match t.into() {
            Horizon::Finite(t) if t > 0.0 && t.is_finite() => t,
            other => return Err(Error::domain("sample_fbm", format!("need a finite positive horizon, got {other}"))),
        };
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::domain("sample_fbm", format!("H must lie in (0, 1), got {h}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::domain("sample_fbm", format!("n must be a power of two >= 2, got {n}")));
        }
        let m = 2 * n;
        let gamma = |k: usize| {
            let k = k as f64;
            let e = 2.0 * h;
            0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
        };
        let mut row: Vec<Complex<f64>> = (0..m).map(|j| Complex::new(gamma(j.min(m - j)), 0.0)).collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let mut sqrt_eigen = Vec::with_capacity(m);
        for (k, c) in row.iter().enumerate() {
            if c.re < -NEGATIVE_EIGEN_TOL * max {
                return Err(Error::numerical(
                    "sample_fbm",
                    format!("circulant eigenvalue {k} is {:e} (max {max:e}) for H = {h}, n = {n}", c.re),
                ));
            }
            sqrt_eigen.push((c.re.max(0.0) / m as f64).sqrt());
        }
        Ok(FbmSampler { n, scale: (t / n as f64).powf(h), sqrt_eigen, fft })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scratch(&self) -> Scratch {
        Scratch { work: vec![Complex::default(); 2 * self.n], first: vec![0.0; self.n + 1], second: vec![0.0; self.n + 1] }
    }

    /// Draws two independent paths `values[0..=n]`, both starting at zero.
    pub fn sample_into<'a, R: Rng>(&self, rng: &mut R, scratch: &'a mut Scratch) -> (&'a [f64], &'a [f64]) {
        for (w, &s) in scratch.work.iter_mut().zip(&self.sqrt_eigen) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *w = Complex::new(s * re, s * im);
        }
        self.fft.process(&mut scratch.work);
        let (mut x, mut y) = (0.0, 0.0);
        scratch.first[0] = 0.0;
        scratch.second[0] = 0.0;
        for k in 0..self.n {
            x += self.scale * scratch.work[k].re;
            y += self.scale * scratch.work[k].im;
            scratch.first[k + 1] = x;
            scratch.second[k + 1] = y;
        }
        (&scratch.first, &scratch.second)
    }
}

/// One fBm path on `n` equal cells of `[0, t]`, reproducible from `seed`.
pub fn sample_fbm(n: usize, h: f64, t: f64, seed: u64) -> Result<GridPath> {
    let sampler = FbmSampler::new(n, h, t)?;
    let mut scratch = sampler.scratch();
    let mut rng = chunk_rng(seed, 0);
    let (first, _) = sampler.sample_into(&mut rng, &mut scratch);
    GridPath::new(t / n as f64, first.to_vec())
}
