//! Pathwise estimator of the coupling bound `m_H^c(T, a)`.
//!
//! Each path samples the driving two-sided Brownian motion `B` on a grid over
//! `[-L, T + R]`: uniform on `[0, T]`, geometric on both sides, and refined by
//! bridge sampling around the maximum of `B(s) - a s` until the argmax is
//! pinned down to a cell of width `refine_to * T`. The PWZ functionals of `B`
//! at the argmax `τ` are then replaced by their conditional expectations
//! given the sampled values. Between nodes this is the linear interpolant, so
//! the singular kernels are integrated exactly against hat functions; beyond
//! `-L` and `T + R` the conditional mean is the last sampled value, whose
//! kernel integrals are explicit. The estimator is therefore unbiased for
//! `E[Z(τ)]` with `τ` the refined grid argmax, whatever `L`, `R` and the grid.

use super::{check_paths, run_chunks, McEstimate, Welford};
use crate::closedform::{v_h, CouplingWeights};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Growth factor of the cells on the geometric parts of the grid.
const GEOMETRIC_RATIO: f64 = 1.25;
/// Cells whose bridge exceeds the current maximum with at least this
/// probability are refined.
const EXCEEDANCE: f64 = 1e-10;
/// Sub-cells per refined cell.
const SPLIT: usize = 8;
/// Cells at least this many widths away from a kernel singularity use
/// Gauss-Legendre instead of the closed-form moments.
const FAR_CELLS: f64 = 4.0;

/// Grid, truncation and sample size of [`pwz_coupled_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwzConfig {
    /// Cells on `[0, T]`.
    pub grid_n: usize,
    /// `L`: the grid starts at `-L`.
    pub left_truncation: f64,
    /// `R`: the grid ends at `T + R`.
    pub right_truncation: f64,
    pub paths: usize,
    pub seed: u64,
    /// Smallest refined cell around the argmax, relative to `T`; `None`
    /// keeps the plain grid argmax.
    pub refine_to: Option<f64>,
}

impl PwzConfig {
    /// Defaults for horizon `t`: `L = R = 100 t`, refinement to `1e-10 t`.
    pub fn new(t: f64, grid_n: usize, paths: usize, seed: u64) -> Self {
        PwzConfig {
            grid_n,
            left_truncation: 100.0 * t,
            right_truncation: 100.0 * t,
            paths,
            seed,
            refine_to: Some(1e-10),
        }
    }

    pub fn validate(&self, t: f64) -> Result<()> {
        check_paths("pwz_coupled_estimate", self.paths)?;
        if self.grid_n < 2 || !self.grid_n.is_power_of_two() {
            return Err(Error::domain("PwzConfig", format!("grid_n must be a power of two >= 2, got {}", self.grid_n)));
        }
        for (name, v) in [("left", self.left_truncation), ("right", self.right_truncation)] {
            if !(v >= 10.0 * t) || !v.is_finite() {
                return Err(Error::domain("PwzConfig", format!("{name} truncation must be finite and at least 10 T = {}, got {v}", 10.0 * t)));
            }
        }
        if let Some(r) = self.refine_to {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::domain("PwzConfig", format!("refine_to must lie in (0, 1), got {r}")));
            }
        }
        Ok(())
    }
}

/// Upper bound on the standard deviation of the part of `X^c_H(τ)/√V` that
/// lies beyond the truncation points, for argmax `tau`. It is replaced by its
/// conditional mean, so it adds no bias; it measures how much of each path is
/// not simulated.
fn tail_sd(h: f64, tau: f64, c: CouplingWeights, sqrt_v: f64, left: f64, right_from_tau: f64) -> f64 {
    let q = h - 0.5;
    if q == 0.0 {
        return 0.0;
    }
    // |(τ+u)^q - u^q| <= |q| τ u^(q-1), squared and integrated from L.
    let side = |dist: f64| q.abs() * tau * dist.powf(q - 0.5) / (2.0 - 2.0 * h).sqrt();
    (c.c_plus().abs() * side(left) + c.c_minus().abs() * side(right_from_tau)) / sqrt_v
}

/// Worst case over `τ in [0, T]` of the truncated-tail standard deviation.
pub fn pwz_tail_sd_bound(h: f64, t: f64, c: CouplingWeights, config: &PwzConfig) -> Result<f64> {
    let v = v_h(h, c)?;
    Ok(tail_sd(h, t, c, v.sqrt(), config.left_truncation, config.right_truncation))
}

/// Monte Carlo estimate of `m_H^c(T, a) = E[X^c_H(τ)/√V^c_H - a τ]`, where `τ`
/// is the argmax of `B(s) - a s` on `[0, T]`.
///
/// Fails when the truncated tails account for more than 10% of the
/// per-path standard deviation; a larger `L` or `R` is then needed.
pub fn pwz_coupled_estimate(h: f64, t: f64, a: f64, c: CouplingWeights, config: &PwzConfig) -> Result<McEstimate> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain("pwz_coupled_estimate", format!("H must lie in (0, 1), got {h}")));
    }
    if !(t > 0.0) || !t.is_finite() || !a.is_finite() {
        return Err(Error::domain("pwz_coupled_estimate", format!("need finite T > 0 and finite a, got T = {t}, a = {a}")));
    }
    config.validate(t)?;
    let v = v_h(h, c)?;
    if v == 0.0 {
        return Err(Error::domain("pwz_coupled_estimate", "the weights give a degenerate process"));
    }
    let ctx = Context {
        h,
        t,
        a,
        c,
        sqrt_v: v.sqrt(),
        left_x: geometric_offsets(t / config.grid_n as f64, config.left_truncation),
        right_y: geometric_offsets(t / config.grid_n as f64, config.right_truncation),
        grid_n: config.grid_n,
        min_cell: config.refine_to.map(|r| r * t),
        left: config.left_truncation,
        right: config.right_truncation,
    };
    let parts = run_chunks(config.paths, config.seed, |rng, count| {
        let mut nodes = Nodes::default();
        let mut stats = Welford::default();
        let mut tail_sq = 0.0;
        for _ in 0..count {
            let k = ctx.sample(rng, &mut nodes);
            let tau = nodes.mid_t[k];
            stats.push(ctx.value(&nodes, k));
            tail_sq += tail_sd(h, tau, c, ctx.sqrt_v, ctx.left, t + ctx.right - tau).powi(2);
        }
        Ok((stats, tail_sq))
    })?;
    let mut stats = Welford::default();
    let mut tail_sq = 0.0;
    for (w, s) in &parts {
        stats.merge(w);
        tail_sq += s;
    }
    let tail_rms = (tail_sq / stats.n as f64).sqrt();
    let estimate = McEstimate::from_stats(&stats, config.grid_n, config.seed);
    let path_sd = estimate.stderr * (stats.n as f64).sqrt();
    if tail_rms > 0.1 * path_sd {
        return Err(Error::numerical(
            "pwz_coupled_estimate",
            format!(
                "truncated tails carry sd {tail_rms:.3e} against a per-path sd {path_sd:.3e}; increase L = {} or R = {}",
                ctx.left, ctx.right
            ),
        )
        .with_partial(estimate.mean));
    }
    Ok(estimate)
}

/// `0 = x_0 < x_1 < ... = len`, with first cell `first` and geometric growth.
fn geometric_offsets(first: f64, len: f64) -> Vec<f64> {
    let mut xs = vec![0.0];
    let mut cell = first;
    let mut x = 0.0;
    while x + cell < len {
        x += cell;
        xs.push(x);
        cell *= GEOMETRIC_RATIO;
    }
    // Merge a short final cell into its neighbour.
    if xs.len() > 1 && len - x < 0.5 * cell / GEOMETRIC_RATIO {
        xs.pop();
    }
    xs.push(len);
    xs
}

/// Sampled values of `B`: at `-left_x[i]`, at `mid_t[j]` in `[0, T]`, and at
/// `T + right_y[i]`.
#[derive(Debug, Default, Clone)]
struct Nodes {
    left_b: Vec<f64>,
    mid_t: Vec<f64>,
    mid_b: Vec<f64>,
    right_b: Vec<f64>,
    scratch_t: Vec<f64>,
    scratch_b: Vec<f64>,
}

struct Context {
    h: f64,
    t: f64,
    a: f64,
    c: CouplingWeights,
    sqrt_v: f64,
    left_x: Vec<f64>,
    right_y: Vec<f64>,
    grid_n: usize,
    min_cell: Option<f64>,
    left: f64,
    right: f64,
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Brownian walk through `offsets` starting from `start`.
fn walk<R: Rng>(rng: &mut R, offsets: &[f64], start: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(start);
    let mut b = start;
    for w in offsets.windows(2) {
        b += (w[1] - w[0]).sqrt() * normal(rng);
        out.push(b);
    }
}

/// First index maximizing `b - a t`.
fn argmax(ts: &[f64], bs: &[f64], a: f64) -> usize {
    let mut best = 0;
    for j in 1..ts.len() {
        if bs[j] - a * ts[j] > bs[best] - a * ts[best] {
            best = j;
        }
    }
    best
}

impl Context {
    /// Samples one path into `nodes` and returns the argmax index in `mid_t`.
    fn sample<R: Rng>(&self, rng: &mut R, nodes: &mut Nodes) -> usize {
        walk(rng, &self.left_x, 0.0, &mut nodes.left_b);
        let step = self.t / self.grid_n as f64;
        nodes.mid_t.clear();
        nodes.mid_b.clear();
        let mut b = 0.0;
        nodes.mid_t.push(0.0);
        nodes.mid_b.push(0.0);
        for j in 1..=self.grid_n {
            b += step.sqrt() * normal(rng);
            nodes.mid_t.push(if j == self.grid_n { self.t } else { j as f64 * step });
            nodes.mid_b.push(b);
        }
        if let Some(min_cell) = self.min_cell {
            self.refine(rng, nodes, min_cell);
        }
        walk(rng, &self.right_y, b, &mut nodes.right_b);
        argmax(&nodes.mid_t, &nodes.mid_b, self.a)
    }

    /// Splits cells whose Brownian bridge may exceed the current maximum of
    /// `B(s) - a s`, until no such cell is wider than `min_cell`.
    fn refine<R: Rng>(&self, rng: &mut R, nodes: &mut Nodes, min_cell: f64) {
        let a = self.a;
        loop {
            let (ts, bs) = (&nodes.mid_t, &nodes.mid_b);
            let k = argmax(ts, bs, a);
            let top = bs[k] - a * ts[k];
            let (new_t, new_b) = (&mut nodes.scratch_t, &mut nodes.scratch_b);
            new_t.clear();
            new_b.clear();
            let mut refined = false;
            for j in 0..ts.len() - 1 {
                new_t.push(ts[j]);
                new_b.push(bs[j]);
                let (s0, s1) = (ts[j], ts[j + 1]);
                let dt = s1 - s0;
                if dt <= min_cell {
                    continue;
                }
                let gap0 = top - (bs[j] - a * s0);
                let gap1 = top - (bs[j + 1] - a * s1);
                if (-2.0 * gap0 * gap1 / dt).exp() < EXCEEDANCE {
                    continue;
                }
                refined = true;
                let (mut sp, mut bp) = (s0, bs[j]);
                for i in 1..SPLIT {
                    let s = s0 + dt * i as f64 / SPLIT as f64;
                    let rest = s1 - sp;
                    let mean = bp + (s - sp) / rest * (bs[j + 1] - bp);
                    let var = (s - sp) * (s1 - s) / rest;
                    bp = mean + var.sqrt() * normal(rng);
                    sp = s;
                    new_t.push(sp);
                    new_b.push(bp);
                }
            }
            if !refined {
                return;
            }
            new_t.push(*ts.last().unwrap());
            new_b.push(*bs.last().unwrap());
            std::mem::swap(&mut nodes.mid_t, &mut nodes.scratch_t);
            std::mem::swap(&mut nodes.mid_b, &mut nodes.scratch_b);
        }
    }

    /// `Z = (c+ X+(τ) + c- X-(τ)) / √V - a τ` from the conditional means.
    fn value(&self, nodes: &Nodes, k: usize) -> f64 {
        let tau = nodes.mid_t[k];
        if tau == 0.0 {
            return 0.0;
        }
        let (xp, xm) = pwz_pair(self.h, self.t, &self.left_x, &self.right_y, nodes, k);
        (self.c.c_plus() * xp + self.c.c_minus() * xm) / self.sqrt_v - self.a * tau
    }
}

/// `(X+(τ), X-(τ))` with `B` replaced by its conditional mean given the nodes
/// and `τ = mid_t[k] > 0`.
fn pwz_pair(h: f64, t: f64, left_x: &[f64], right_y: &[f64], nodes: &Nodes, k: usize) -> (f64, f64) {
    let (ts, bs) = (&nodes.mid_t, &nodes.mid_b);
    let (tau, b_tau) = (ts[k], bs[k]);
    let q = h - 0.5;
    let lead = tau.powf(q) * b_tau;
    if q == 0.0 {
        return (lead, -lead);
    }
    let p = q - 1.0;

    // ∫_0^τ (τ-s)^p (B(τ) - B(s)) ds and ∫_0^τ s^p B(s) ds.
    let (mut a2, mut d2) = (0.0, 0.0);
    for j in 0..k {
        let (lo, hi) = hat_moments(p, tau - ts[j + 1], tau - ts[j]);
        // The value at u = 0 is B(τ) - B(τ) = 0.
        if j + 1 < k {
            a2 += (b_tau - bs[j + 1]) * lo;
        }
        a2 += (b_tau - bs[j]) * hi;
        let (lo, hi) = hat_moments(p, ts[j], ts[j + 1]);
        d2 += bs[j] * lo + bs[j + 1] * hi;
    }

    // ∫_{-∞}^0 [(τ-s)^p - (-s)^p] B(s) ds; B(0) = 0 removes the singular end.
    let (left_b, right_b) = (&nodes.left_b, &nodes.right_b);
    let mut a3 = 0.0;
    for i in 0..left_x.len() - 1 {
        let (x0, x1) = (left_x[i], left_x[i + 1]);
        let (lo, hi) = hat_moments(p, tau + x0, tau + x1);
        let (slo, shi) = hat_moments(p, x0, x1);
        a3 += left_b[i] * (lo - slo) + left_b[i + 1] * (hi - shi);
    }
    let big_l = *left_x.last().unwrap();
    // Beyond -L the conditional mean is B(-L).
    let a3_tail = -((tau + big_l).powf(q) - big_l.powf(q)) * left_b.last().unwrap();

    // ∫_τ^∞ [s^p - (s-τ)^p] (B(s) - B(τ)) ds over [τ, T], then [T, T + R].
    let mut d3 = 0.0;
    let mut cell = |s0: f64, s1: f64, v0: f64, v1: f64| {
        let (lo, hi) = hat_moments(p, s0, s1);
        let (slo, shi) = hat_moments(p, s0 - tau, s1 - tau);
        d3 += v0 * (lo - slo) + v1 * (hi - shi);
    };
    for j in k..ts.len() - 1 {
        cell(ts[j], ts[j + 1], bs[j] - b_tau, bs[j + 1] - b_tau);
    }
    for i in 0..right_y.len() - 1 {
        cell(t + right_y[i], t + right_y[i + 1], right_b[i] - b_tau, right_b[i + 1] - b_tau);
    }
    let end = t + *right_y.last().unwrap();
    let d3_tail = -(end.powf(q) - (end - tau).powf(q)) * (right_b.last().unwrap() - b_tau);

    let xp = lead - q * a2 + q * a3 + a3_tail;
    let xm = -lead + q * d2 + q * d3 + d3_tail;
    (xp, xm)
}

const GL_X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Moments of `u^e` against the two hat functions of the cell `[u0, u1]`:
/// `(∫ u^e (u1-u)/Δ du, ∫ u^e (u-u0)/Δ du)`.
///
/// When `u0 = 0` and `e <= -1` the first moment diverges; it is returned as
/// zero and the caller must ensure the function vanishes there.
fn hat_moments(e: f64, u0: f64, u1: f64) -> (f64, f64) {
    let d = u1 - u0;
    if u0 >= FAR_CELLS * d {
        let (mid, half) = (0.5 * (u0 + u1), 0.5 * d);
        let (mut lo, mut hi) = (0.0, 0.0);
        for (&x, &w) in GL_X.iter().zip(&GL_W) {
            for u in [mid - half * x, mid + half * x] {
                let f = w * half * u.powf(e);
                lo += f * (u1 - u);
                hi += f * (u - u0);
            }
        }
        return (lo / d, hi / d);
    }
    let i1 = (u1.powf(e + 2.0) - u0.powf(e + 2.0)) / (e + 2.0);
    if u0 == 0.0 && e <= -1.0 {
        return (0.0, i1 / d);
    }
    let i0 = (u1.powf(e + 1.0) - u0.powf(e + 1.0)) / (e + 1.0);
    ((u1 * i0 - i1) / d, (i1 - u0 * i0) / d)
}
