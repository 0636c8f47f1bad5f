//! Reduced-size run of every invariant the library promises, as a release
//! gate. The report is a plain-text table whose bytes depend only on the
//! options, so two runs can be diffed.

use crate::closedform::{
    bound_objective, brownian_sup_mean, c_h, i_h, joint_density, lower_bound, m_h_coupled, m_h_with_c_h,
    bessel_bridge_density, CouplingWeights, Horizon, Problem,
};
use crate::optimize::{maximize_over_rho, ScanConfig};
use crate::quad::{Integrator, Interval};
use crate::simulate::{mc_sup_estimate, pwz_coupled_estimate, McEstimate, PwzConfig};
use crate::specfun::{erf, gamma, kummer_1f1, lower_gamma, tricomi_u};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Knobs of [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Multiplies `C_H` wherever the battery evaluates `m_H`; anything other
    /// than 1 is a deliberate corruption that the battery must catch.
    pub c_h_factor: f64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { c_h_factor: 1.0 }
    }
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckOutcome>,
}

type Outcome = std::result::Result<String, String>;

impl Report {
    /// Records `outcome`: `Ok(detail)` passes, `Err(detail)` fails.
    pub fn record(&mut self, module: &'static str, name: &'static str, outcome: Outcome) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckOutcome { module, name, passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    /// Fixed-width table followed by a summary line.
    pub fn render(&self) -> String {
        let name_w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:<name_w$} {:<6} detail", "module", "check", "result");
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<12} {:<name_w$} {:<6} {}", c.module, c.name, verdict, c.detail);
        }
        let _ = writeln!(out, "{} checks, {} passed, {} failed", self.checks.len(), self.checks.len() - self.failures(), self.failures());
        out
    }
}

/// Runs the battery.
pub fn run(options: &SelftestOptions) -> Report {
    let mut r = Report::default();
    r.record("specfun", "U recurrences, 200 points", u_recurrences());
    r.record("specfun", "transformations, 200 points", transformations());
    r.record("specfun", "Beta-weighted 1F1 integral", key_integral());
    r.record("specfun", "lower gamma via 1F1, 5x5 grid", lower_gamma_grid());
    r.record("specfun", "1F1 integral representation", kummer_integral());
    r.record("closedform", "H = 1/2 reduces to Brownian", half_consistency(options));
    r.record("closedform", "coupling dominance, 200 draws", coupling_dominance(options));
    r.record("closedform", "lower bound dominates m_H", bound_dominance(options));
    r.record("closedform", "objective is the scaled m_H", objective_wiring(options));
    r.record("closedform", "U against Gaussian integral", u_integral());
    r.record("closedform", "first part of J vanishes", j_first_part());
    r.record("optimize", "never below rho = 1", optimizer_keeps_unit());
    r.record("optimize", "refinement keeps scan best", optimizer_refines());
    r.record("optimize", "deterministic", optimizer_deterministic());
    r.record("quad", "oracle: I_H from bridge density", quad_oracle_i_h());
    r.record("quad", "halving tol never hurts", quad_halving());
    r.record("simulate", "thread-count reproducibility", mc_reproducible());
    r.record("simulate", "grid max increases with n", mc_monotone_in_n());
    r.record("simulate", "bound beats MC for H < 1/2", bound_beats_mc());
    r.record("simulate", "PWZ stable across resolution", pwz_resolution());
    r
}

fn fail(e: crate::Error) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `Ok` when `worst <= tol`.
fn within(label: &str, worst: f64, tol: f64) -> Outcome {
    let msg = format!("{label} {worst:.2e} (tol {tol:.0e})");
    if worst <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn u_recurrences() -> Outcome {
    let mut g = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = g.random_range(0.0..1.5);
        let b = [-0.5, 0.5, 1.5][g.random_range(0..3)];
        let z = g.random_range(0.01..20.0);
        let u = |a: f64, b: f64| tricomi_u(a, b, z).map_err(fail);
        let t = [z * u(a, b + 1.0)?, (b - a) * u(a, b)?, u(a - 1.0, b)?];
        worst = worst.max((t[0] - t[1] - t[2]).abs() / t.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let t = [a * u(a + 1.0, b)?, u(a, b)?, u(a, b - 1.0)?];
        worst = worst.max((t[0] - t[1] + t[2]).abs() / t.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    within("max residual", worst, 1e-9)
}

fn transformations() -> Outcome {
    let mut g = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = g.random_range(0.05..2.0);
        let b = g.random_range(0.1..2.5);
        let z = g.random_range(-10.0..10.0);
        let k = kummer_1f1(a, b, z).map_err(fail)?;
        worst = worst.max(rel(k, z.exp() * kummer_1f1(b - a, b, -z).map_err(fail)?));
        let zp = z.abs() + 0.01;
        let bu = [-0.5, 0.5, 1.5][g.random_range(0..3)];
        let u = tricomi_u(a, bu, zp).map_err(fail)?;
        worst = worst.max(rel(u, zp.powf(1.0 - bu) * tricomi_u(1.0 + a - bu, 2.0 - bu, zp).map_err(fail)?));
        let alpha = g.random_range(0.05..3.0);
        let lhs = lower_gamma(alpha + 1.0, zp).map_err(fail)?;
        let t = [alpha * lower_gamma(alpha, zp).map_err(fail)?, zp.powf(alpha) * (-zp).exp()];
        worst = worst.max((lhs - t[0] + t[1]).abs() / lhs.abs().max(t[0].abs()).max(t[1].abs()));
        let x = z / 4.0;
        if x != 0.0 {
            let e = 2.0 * x * (-x * x).exp() / PI.sqrt() * kummer_1f1(1.0, 1.5, x * x).map_err(fail)?;
            worst = worst.max(rel(e, erf(x)));
        }
    }
    within("max residual", worst, 1e-9)
}

fn key_integral() -> Outcome {
    let (c, gm, a, u) = (2.2, 0.9, 0.5, 1.3);
    let f = |x: f64| x.powf(gm - 1.0) * (1.0 - x).powf(c - gm - 1.0) * kummer_1f1(a, gm, u * x).unwrap_or(f64::NAN);
    let lhs = Integrator::relative(1e-11).integrate(f, &Interval::new(0.0, 1.0).singular_lo(gm - 1.0)).map_err(fail)?.value;
    let rhs = gamma(gm) * gamma(c - gm) / gamma(c) * kummer_1f1(a, c, u).map_err(fail)?;
    within("rel error", rel(lhs, rhs), 1e-7)
}

fn lower_gamma_grid() -> Outcome {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.1, 0.5, 1.0, 2.5, 7.0] {
        for &z in &[0.01f64, 0.5, 2.0, 8.0, 20.0] {
            let k = z.powf(alpha) * (-z).exp() / alpha * kummer_1f1(1.0, alpha + 1.0, z).map_err(fail)?;
            worst = worst.max(rel(lower_gamma(alpha, z).map_err(fail)?, k));
        }
    }
    within("max rel error", worst, 1e-10)
}

/// Beta-weighted integral of `e^{zt}`, split at 1/2 so both endpoint
/// singularities sit at zero.
fn kummer_integral() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(a, b, z) in &[(0.3, 1.2, 2.5), (0.7, 2.0, -3.0), (1.0, 1.5, 1.0), (0.5, 0.8, 6.0)] {
        let (p, q) = (a - 1.0, b - a - 1.0);
        let quad = Integrator::relative(1e-12);
        let left = quad.integrate(|t: f64| (z * t).exp() * t.powf(p) * (1.0 - t).powf(q), &Interval::new(0.0, 0.5).singular_lo(p));
        let right = quad.integrate(|s: f64| (z * (1.0 - s)).exp() * (1.0 - s).powf(p) * s.powf(q), &Interval::new(0.0, 0.5).singular_lo(q));
        let integral = left.map_err(fail)?.value + right.map_err(fail)?.value;
        let v = gamma(b) / (gamma(a) * gamma(b - a)) * integral;
        worst = worst.max(rel(kummer_1f1(a, b, z).map_err(fail)?, v));
    }
    within("max rel error", worst, 1e-8)
}

fn m_h(options: &SelftestOptions, h: f64, t: Horizon, a: f64) -> std::result::Result<f64, String> {
    m_h_with_c_h(h, t, a, c_h(h).map_err(fail)? * options.c_h_factor).map_err(fail)
}

fn half_consistency(options: &SelftestOptions) -> Outcome {
    let mut cases: Vec<(Horizon, f64)> = Vec::new();
    for &t in &[0.5, 1.0, 10.0] {
        for &a in &[-1.0, 0.0, 1.0] {
            cases.push((Horizon::Finite(t), a));
        }
    }
    cases.push((Horizon::Infinite, 1.0));
    let mut worst: f64 = 0.0;
    for (t, a) in cases {
        worst = worst.max((m_h(options, 0.5, t, a)? - brownian_sup_mean(t, a).map_err(fail)?).abs());
    }
    within("max abs error", worst, 1e-10)
}

fn coupling_dominance(options: &SelftestOptions) -> Outcome {
    let mut g = rng(13);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let h = g.random_range(0.02..0.98);
        let t = Horizon::Finite(g.random_range(0.1..10.0));
        let a = g.random_range(-2.0..2.0);
        let c = CouplingWeights::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)).map_err(fail)?;
        worst = worst.max(m_h_coupled(h, t, a, c).map_err(fail)? - m_h(options, h, t, a)?);
    }
    within("max excess", worst, 1e-12)
}

fn bound_points() -> Vec<(f64, Horizon, f64)> {
    let mut points = Vec::new();
    for &h in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &t in &[0.5, 2.0] {
            for &a in &[-1.0, 0.0, 1.0] {
                points.push((h, Horizon::Finite(t), a));
            }
        }
        points.push((h, Horizon::Infinite, 1.0));
    }
    points
}

fn bound_dominance(options: &SelftestOptions) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (h, t, a) in bound_points() {
        worst = worst.max(m_h(options, h, t, a)? - lower_bound(h, t, a).map_err(fail)?.lower_bound);
    }
    within("max shortfall", worst, 1e-12)
}

fn objective_wiring(options: &SelftestOptions) -> Outcome {
    let (h, t, a) = (0.3, 1.0, 1.0);
    for &rho in &[0.5f64, 2.0] {
        let direct = rho.powf(-h) * m_h(options, h, Horizon::Finite(rho * t), rho.powf(h - 1.0) * a)?;
        let wired = bound_objective(h, t, a)(rho);
        if direct.to_bits() != wired.to_bits() {
            return Err(format!("rho = {rho}: {direct:e} vs {wired:e}"));
        }
    }
    Ok("bit-identical at rho = 0.5, 2".into())
}

fn u_integral() -> Outcome {
    let mut worst: f64 = 0.0;
    for &h in &[0.3, 0.7] {
        for &u in &[-1.0f64, 0.5, 2.0] {
            let f = |z: f64| {
                if z == 0.0 {
                    return PI.sqrt() / gamma(h) * (-u * u).exp();
                }
                tricomi_u(h - 0.5, 0.5, z * z).unwrap_or(f64::NAN) * (-(z + u) * (z + u)).exp()
            };
            let range = Interval::new(0.0, f64::INFINITY).with_breaks([1.0, 5.0]);
            let q = Integrator::relative(1e-10).integrate(f, &range).map_err(fail)?.value;
            let u2 = u * u;
            let closed = PI.sqrt() * (-u2).exp() / (2.0 * gamma(h + 0.5))
                + PI.sqrt() * u.abs().powf(1.0 - 2.0 * h) / 2.0
                    * (lower_gamma(h + 0.5, u2).map_err(fail)? / gamma(h + 0.5)
                        - u.signum() * lower_gamma(h, u2).map_err(fail)? / gamma(h));
            worst = worst.max(rel(q, closed));
        }
    }
    within("max rel error", worst, 1e-7)
}

/// `E τ^(H-1/2) (Y(τ) + aτ - τ/Y(τ))` at `(H, T, a) = (0.3, 1, 1)` by nested
/// quadrature over the joint density, with the `(T - t)^(-1/2)` edge moved to zero.
fn j_first_part() -> Outcome {
    let (h, big_t, a) = (0.3, 1.0, 1.0);
    let inner = Integrator::absolute(1e-11);
    let slice = |t: f64| -> f64 {
        let f = |y: f64| t.powf(h - 0.5) * (y + a * t - t / y) * joint_density(t, y, big_t, a).unwrap_or(f64::NAN);
        let range = Interval::new(0.0, f64::INFINITY).with_breaks([t.sqrt(), 5.0 * t.sqrt()]);
        inner.integrate(f, &range).map(|r| r.value).unwrap_or(f64::NAN)
    };
    let outer = Integrator::absolute(1e-9);
    let near = outer.integrate(slice, &Interval::new(0.0, 0.5).singular_lo(h - 1.0)).map_err(fail)?.value;
    let far = outer.integrate(|v| slice(big_t - v), &Interval::new(0.0, 0.5).singular_lo(-0.5)).map_err(fail)?.value;
    within("|value|", (near + far).abs(), 1e-7)
}

fn test_objectives() -> Vec<(&'static str, Box<dyn Fn(f64) -> f64>)> {
    vec![
        ("bound (0.3, 1, 1)", Box::new(bound_objective(0.3, 1.0, 1.0))),
        ("bound (0.8, 2, -1)", Box::new(bound_objective(0.8, 2.0, -1.0))),
        ("bound (0.2, 0.5, 3)", Box::new(bound_objective(0.2, 0.5, 3.0))),
        // Two bumps, the taller one narrow and away from rho = 1.
        (
            "bimodal",
            Box::new(|rho: f64| {
                let x = rho.ln();
                (-(x + 3.0).powi(2)).exp() + 1.5 * (-(x - 4.0).powi(2) / 0.05).exp()
            }),
        ),
    ]
}

fn optimizer_keeps_unit() -> Outcome {
    let config = ScanConfig::default();
    for (name, f) in test_objectives() {
        let (_, v) = maximize_over_rho(&f, &config).map_err(fail)?;
        let at_one = f(1.0);
        if v < at_one - 1e-12 * at_one.abs() {
            return Err(format!("{name}: {v:e} < f(1) = {at_one:e}"));
        }
    }
    Ok("4 objectives".into())
}

fn optimizer_refines() -> Outcome {
    let config = ScanConfig::default();
    let step = (config.log_rho_max - config.log_rho_min) / (config.coarse_points - 1) as f64;
    for (name, f) in test_objectives() {
        let scan_best = (0..config.coarse_points)
            .map(|i| f((config.log_rho_min + i as f64 * step).exp()))
            .chain(std::iter::once(f(1.0)))
            .fold(f64::NEG_INFINITY, f64::max);
        let (_, v) = maximize_over_rho(&f, &config).map_err(fail)?;
        if v < scan_best {
            return Err(format!("{name}: refined {v:e} < scan {scan_best:e}"));
        }
    }
    Ok("4 objectives".into())
}

fn optimizer_deterministic() -> Outcome {
    let config = ScanConfig::default();
    for (name, f) in test_objectives() {
        let (r1, v1) = maximize_over_rho(&f, &config).map_err(fail)?;
        let (r2, v2) = maximize_over_rho(&f, &config).map_err(fail)?;
        if r1.to_bits() != r2.to_bits() || v1.to_bits() != v2.to_bits() {
            return Err(format!("{name}: repeated runs differ"));
        }
    }
    Ok("4 objectives, bit-identical".into())
}

/// `I_H` rebuilt from the bridge density alone: the closed form is never
/// consulted by the quadrature, so agreement is evidence.
fn quad_oracle_i_h() -> Outcome {
    let (h, t, y) = (0.3, 1.0, 1.0);
    let inner = Integrator::relative(1e-11);
    let outer = |s: f64| {
        let w = (s * (t - s) / t).sqrt();
        let breaks = [y * s / t, y, y + 4.0 * w, (y - 4.0 * w).max(0.0), s.sqrt(), 8.0 * s.sqrt()];
        let range = Interval::new(0.0, f64::INFINITY).with_breaks(breaks);
        let mean = inner.integrate(|x| x * bessel_bridge_density(x, s, t, y).unwrap_or(f64::NAN), &range);
        s.powf(h - 1.5) * mean.map(|r| r.value).unwrap_or(f64::NAN)
    };
    let q = Integrator::relative(1e-9).integrate(outer, &Interval::new(0.0, t).singular_lo(h - 1.0)).map_err(fail)?.value;
    within("rel error", rel(i_h(h, t, y).map_err(fail)?, q), 1e-6)
}

fn quad_halving() -> Outcome {
    let cases: Vec<(Box<dyn Fn(f64) -> f64>, Interval, f64)> = vec![
        (Box::new(|x: f64| (-x * x).exp()), Interval::new(0.0, f64::INFINITY), PI.sqrt() / 2.0),
        (Box::new(|x: f64| x.powf(-0.7)), Interval::new(0.0, 1.0).singular_lo(-0.7), 1.0 / 0.3),
        (Box::new(|x: f64| x.sin()), Interval::new(0.0, PI), 2.0),
        (Box::new(|x: f64| 1.0 / (1.0 + 100.0 * (x - 0.3).powi(2))), Interval::new(0.0, 1.0), (7.0f64.atan() + 3.0f64.atan()) / 10.0),
    ];
    let mut checked = 0;
    for (i, (f, range, exact)) in cases.iter().enumerate() {
        let mut prev = f64::INFINITY;
        let mut tol = 1e-3;
        while tol > 1e-11 {
            let v = Integrator::absolute(tol).integrate(f, range).map_err(fail)?.value;
            let err = (v - exact).abs();
            // Rounding noise in the last few bits is not a regression.
            if err > prev + 8.0 * f64::EPSILON * exact.abs() {
                return Err(format!("case {i}: error rose from {prev:.2e} to {err:.2e} at tol {tol:.2e}"));
            }
            prev = err;
            tol /= 2.0;
            checked += 1;
        }
    }
    Ok(format!("{checked} tolerance steps"))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> std::result::Result<T, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    Ok(pool.install(f))
}

fn mc_reproducible() -> Outcome {
    let problem = Problem::new(0.3, 1.0, 0.5).map_err(fail)?;
    let one = with_threads(1, || mc_sup_estimate(&problem, 64, 2000, 5))?.map_err(fail)?;
    let three = with_threads(3, || mc_sup_estimate(&problem, 64, 2000, 5))?.map_err(fail)?;
    if one == three {
        Ok("1 and 3 threads bit-identical".into())
    } else {
        Err(format!("mean {:e} vs {:e}", one.mean, three.mean))
    }
}

fn combined(a: &McEstimate, b: &McEstimate) -> f64 {
    (a.stderr * a.stderr + b.stderr * b.stderr).sqrt()
}

fn mc_monotone_in_n() -> Outcome {
    let problem = Problem::new(0.3, 1.0, 0.0).map_err(fail)?;
    let coarse = mc_sup_estimate(&problem, 1 << 6, 2000, 21).map_err(fail)?;
    let fine = mc_sup_estimate(&problem, 1 << 10, 2000, 22).map_err(fail)?;
    let z = (fine.mean - coarse.mean) / combined(&fine, &coarse);
    let msg = format!("n = 64: {:.4}, n = 1024: {:.4}, z = {z:.2}", coarse.mean, fine.mean);
    if z >= -3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bound_beats_mc() -> Outcome {
    let mut margins = Vec::new();
    for (i, &h) in [0.1, 0.2, 0.3, 0.4].iter().enumerate() {
        let bound = lower_bound(h, 1.0, 0.0).map_err(fail)?.lower_bound;
        let mc = mc_sup_estimate(&Problem::new(h, 1.0, 0.0).map_err(fail)?, 1 << 8, 20_000, 30 + i as u64).map_err(fail)?;
        if bound < mc.ci95_hi {
            return Err(format!("H = {h}: bound {bound:.4} < ci95_hi {:.4}", mc.ci95_hi));
        }
        margins.push(bound - mc.ci95_hi);
    }
    let least = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("smallest margin {least:.4}"))
}

fn pwz_resolution() -> Outcome {
    let (h, t, a, c) = (0.3, 1.0, 0.0, CouplingWeights::ANTISYMMETRIC);
    let exact = m_h_coupled(h, t, a, c).map_err(fail)?;
    let mut coarse = PwzConfig::new(t, 32, 1000, 41);
    coarse.left_truncation = 10.0 * t;
    coarse.right_truncation = 10.0 * t;
    let fine = PwzConfig::new(t, 128, 1000, 42);
    let e1 = pwz_coupled_estimate(h, t, a, c, &coarse).map_err(fail)?;
    let e2 = pwz_coupled_estimate(h, t, a, c, &fine).map_err(fail)?;
    let ci = (e1.ci95_hi - e1.ci95_lo + e2.ci95_hi - e2.ci95_lo) / 2.0;
    let msg = format!("{:.4} vs {:.4}, exact {exact:.4}", e1.mean, e2.mean);
    if (e1.mean - e2.mean).abs() <= ci && (e2.mean - exact).abs() <= 3.0 * e2.stderr {
        Ok(msg)
    } else {
        Err(msg)
    }
}
