//! The ten release criteria, each at its stated tolerance and time limit.
//! Prints one line per criterion and exits non-zero if any fails.

use fbmsup::closedform::{
    bessel_bridge_density, brownian_argmax_mean, derivative_at_half, i_h, joint_density, lower_bound, m_h_coupled,
    small_h_asymptote,
};
use fbmsup::quad::{Integrator, Interval};
use fbmsup::simulate::mc_sup_estimate;
use fbmsup::specfun::{erf, gamma, kummer_1f1, lower_gamma, tricomi_u};
use fbmsup::{CouplingWeights, Horizon, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;
const GRID_BIAS: f64 = 0.5826;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn err(e: fbmsup::Error) -> String {
    e.to_string()
}

fn within(label: &str, worst: f64, tol: f64) -> Outcome {
    let msg = format!("{label} {worst:.3e} (tol {tol:.0e})");
    if worst <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn exactness_at_half() -> Outcome {
    let finite = lower_bound(0.5, 1.0, 0.0).map_err(err)?.lower_bound;
    let infinite = lower_bound(0.5, Horizon::Infinite, 1.0).map_err(err)?.lower_bound;
    let worst = (finite - (2.0 / PI).sqrt()).abs().max((infinite - 0.5).abs());
    within("max abs error", worst, 1e-12)
}

/// `∫_0^t s^(H-3/2) E[X_s] ds` with `X` the Bessel bridge, both integrals
/// done numerically from the bridge density.
fn i_h_oracle(h: f64, t: f64, y: f64) -> Result<f64, String> {
    let inner = Integrator::relative(1e-12);
    let slice = |s: f64| {
        let w = (s * (t - s) / t).sqrt();
        let breaks = [y * s / t, y, y + 4.0 * w, (y - 4.0 * w).max(0.0), s.sqrt(), 8.0 * s.sqrt()];
        let range = Interval::new(0.0, f64::INFINITY).with_breaks(breaks);
        let mean = inner.integrate(|x| x * bessel_bridge_density(x, s, t, y).unwrap_or(f64::NAN), &range);
        s.powf(h - 1.5) * mean.map(|r| r.value).unwrap_or(f64::NAN)
    };
    let q = Integrator::relative(1e-10).integrate(slice, &Interval::new(0.0, t).singular_lo(h - 1.0)).map_err(err)?;
    Ok(q.value)
}

fn i_h_against_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for &h in &[0.25, 0.4, 0.6, 0.75] {
        for &t in &[0.5, 1.0, 2.0] {
            for &y in &[0.3, 1.0, 2.0] {
                let closed = i_h(h, t, y).map_err(err)?;
                worst = worst.max(rel(i_h_oracle(h, t, y)?, closed));
            }
        }
    }
    within("36 points, max rel error", worst, 1e-6)
}

fn u_integral() -> Result<f64, String> {
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
            let q = Integrator::relative(1e-11).integrate(f, &range).map_err(err)?.value;
            let u2 = u * u;
            let closed = PI.sqrt() * (-u2).exp() / (2.0 * gamma(h + 0.5))
                + PI.sqrt() * u.abs().powf(1.0 - 2.0 * h) / 2.0
                    * (lower_gamma(h + 0.5, u2).map_err(err)? / gamma(h + 0.5)
                        - u.signum() * lower_gamma(h, u2).map_err(err)? / gamma(h));
            worst = worst.max(rel(q, closed));
        }
    }
    Ok(worst)
}

/// `∫∫ g(t, y) p(t, y) dy dt` over the joint density of `(argmax, max)` on
/// `[0, T]`, split at `T/2` so both edge singularities sit at zero.
fn density_integral(g: impl Fn(f64, f64) -> f64, big_t: f64, a: f64, near_beta: f64) -> Result<f64, String> {
    let inner = Integrator::absolute(1e-11);
    let slice = |t: f64| -> f64 {
        let f = |y: f64| g(t, y) * joint_density(t, y, big_t, a).unwrap_or(f64::NAN);
        let range = Interval::new(0.0, f64::INFINITY).with_breaks([t.sqrt(), 5.0 * t.sqrt()]);
        inner.integrate(f, &range).map(|r| r.value).unwrap_or(f64::NAN)
    };
    let outer = Integrator::absolute(1e-9);
    let half = big_t / 2.0;
    let near = outer.integrate(slice, &Interval::new(0.0, half).singular_lo(near_beta)).map_err(err)?.value;
    let far = outer.integrate(|v| slice(big_t - v), &Interval::new(0.0, half).singular_lo(-0.5)).map_err(err)?.value;
    Ok(near + far)
}

fn appendix_identities() -> Outcome {
    let u = u_integral().map_err(|e| format!("U-integral: {e}"))?;
    let (h, a) = (0.3, 1.0);
    let j1 = density_integral(|t, y| t.powf(h - 0.5) * (y + a * t - t / y), 1.0, a, h - 1.0)
        .map_err(|e| format!("J(1): {e}"))?
        .abs();
    let e_quad = density_integral(|t, _| t, 1.0, 1.0, 0.5).map_err(|e| format!("argmax mean: {e}"))?;
    let e = rel(e_quad, brownian_argmax_mean(1.0, 1.0).map_err(err)?);
    let detail = format!("U-integral rel {u:.2e}, J(1) abs {j1:.2e}, argmax mean rel {e:.2e} (tol 1e-7 each)");
    if u <= 1e-7 && j1 <= 1e-7 && e <= 1e-7 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn special_function_battery() -> Outcome {
    let mut g = ChaCha20Rng::seed_from_u64(4000);
    let mut worst = [0.0f64; 7];
    let scaled = |t: &[f64]| t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..1000 {
        let a = g.random_range(0.0..1.5);
        let b = [-0.5, 0.5, 1.5][g.random_range(0..3)];
        let z = g.random_range(0.01..20.0);
        let u = |a: f64, b: f64| tricomi_u(a, b, z).map_err(err);
        let t = [z * u(a, b + 1.0)?, (b - a) * u(a, b)?, u(a - 1.0, b)?];
        worst[0] = worst[0].max((t[0] - t[1] - t[2]).abs() / scaled(&t));
        let t = [a * u(a + 1.0, b)?, u(a, b)?, u(a, b - 1.0)?];
        worst[1] = worst[1].max((t[0] - t[1] + t[2]).abs() / scaled(&t));

        let (a, b, z) = (g.random_range(0.05..2.0), g.random_range(0.1..2.5), g.random_range(-10.0..10.0));
        let k = kummer_1f1(a, b, z).map_err(err)?;
        worst[2] = worst[2].max(rel(k, z.exp() * kummer_1f1(b - a, b, -z).map_err(err)?));

        let (a, b, z) = (g.random_range(0.05..2.0), [-0.5, 0.5, 1.5][g.random_range(0..3)], g.random_range(0.01..20.0));
        let lhs = tricomi_u(a, b, z).map_err(err)?;
        worst[3] = worst[3].max(rel(lhs, z.powf(1.0 - b) * tricomi_u(1.0 + a - b, 2.0 - b, z).map_err(err)?));

        let (alpha, z) = (g.random_range(0.05..5.0), g.random_range(0.01..30.0));
        let lhs = lower_gamma(alpha + 1.0, z).map_err(err)?;
        let t = [lhs, alpha * lower_gamma(alpha, z).map_err(err)?, z.powf(alpha) * (-z).exp()];
        worst[4] = worst[4].max((t[0] - t[1] + t[2]).abs() / scaled(&t));

        let k = z.powf(alpha) * (-z).exp() / alpha * kummer_1f1(1.0, alpha + 1.0, z).map_err(err)?;
        worst[5] = worst[5].max(rel(lower_gamma(alpha, z).map_err(err)?, k));

        let x: f64 = g.random_range(-4.0..4.0);
        if x != 0.0 {
            let e = 2.0 * x * (-x * x).exp() / PI.sqrt() * kummer_1f1(1.0, 1.5, x * x).map_err(err)?;
            worst[6] = worst[6].max(rel(e, erf(x)));
        }
    }
    let max = worst.iter().fold(0.0f64, |m, &w| m.max(w));
    let names = ["U rec 1", "U rec 2", "Kummer", "Tricomi", "gamma rec", "lower gamma", "erf"];
    let parts: Vec<String> = names.iter().zip(worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    within(&format!("1000 points each [{}], max", parts.join(", ")), max, 1e-9)
}

fn grid_bias_reproduction() -> Outcome {
    let p = Problem::new(0.5, 1.0, 0.0).map_err(err)?;
    let est = mc_sup_estimate(&p, 1024, 20000, 5000).map_err(err)?;
    let target = (2.0 / PI).sqrt() - GRID_BIAS / 1024f64.sqrt();
    let z = (est.mean - target) / est.stderr;
    let detail = format!("mean {:.5} ± {:.5}, target {target:.5}, z = {z:.2}", est.mean, est.stderr);
    if z.abs() <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn headline_ordering() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, &h) in [0.1, 0.2, 0.3, 0.4].iter().enumerate() {
        let bound = lower_bound(h, 1.0, 0.0).map_err(err)?.lower_bound;
        let est = mc_sup_estimate(&Problem::new(h, 1.0, 0.0).map_err(err)?, 4096, 4000, 6000 + i as u64).map_err(err)?;
        ok &= bound >= est.ci95_hi;
        parts.push(format!("H={h}: bound {bound:.5} vs ci95_hi {:.5}", est.ci95_hi));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fbmsup(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fbmsup")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn csv_rows(text: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    lines
        .map(|l| header.iter().zip(l.split(',')).map(|(k, v)| (k.to_string(), v.to_string())).collect())
        .collect()
}

fn field(row: &[(String, String)], key: &str) -> Result<f64, String> {
    let v = row.iter().find(|(k, _)| k == key).ok_or(format!("no column {key}"))?;
    v.1.parse().map_err(|_| format!("{key} = {:?} is not a number", v.1))
}

fn relative_error_at_half() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("case1.csv");
    let n = 4096usize;
    fbmsup(&[
        "figure", "--case", "1", "--panel", "right", "--h-steps", "3", "--n", &n.to_string(), "--paths", "20000",
        "--seed", "7000", "--out", csv.to_str().unwrap(),
    ])?;
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let rows = csv_rows(&text);
    let row = rows.iter().find(|r| field(r, "H") == Ok(0.5)).ok_or("no H = 0.5 row")?;
    let (rel_err, mean, se, bound) = (field(row, "rel_err")?, field(row, "mc_mean")?, field(row, "mc_stderr")?, field(row, "bound")?);
    let predicted = GRID_BIAS / ((n as f64).sqrt() * (2.0 / PI).sqrt());
    let rel_se = bound * se / (mean * mean);
    let z = (rel_err - predicted) / rel_se;
    let detail = format!("rel_err {:.3}% vs predicted {:.3}%, stderr {:.3}%, z = {z:.2}", 100.0 * rel_err, 100.0 * predicted, 100.0 * rel_se);
    if z.abs() <= 3.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn coupling_oracle() -> Outcome {
    let configs = [("0.5", "0", "1", "0"), ("0.3", "0", "1", "-1"), ("0.7", "1", "1", "0")];
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, (h, a, cp, cm)) in configs.iter().enumerate() {
        let seed = (8000 + i).to_string();
        let out = fbmsup(&[
            "coupling", "--H", h, "--T", "1", "--a", a, "--cplus", cp, "--cminus", cm, "--grid", "4096", "--paths",
            "10000", "--seed", &seed,
        ])?;
        let rows = csv_rows(&out);
        let row = rows.first().ok_or("no output row")?;
        let (z, se) = (field(row, "z_score")?, field(row, "pwz_stderr")?);
        ok &= z.abs() <= 3.0 && se <= 0.01;
        parts.push(format!("({h}, a={a}, c=({cp},{cm})): z = {z:.2}, stderr {se:.4}"));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn derivative_formula() -> Outcome {
    let d_inf = derivative_at_half(Horizon::Infinite, 1.0).map_err(err)?;
    let exact = (d_inf + EULER_MASCHERONI + 2f64.ln()).abs();
    let step = 1e-4;
    let f = |h: f64| m_h_coupled(h, 1.0, 1.0, CouplingWeights::MANDELBROT_VAN_NESS).map_err(err);
    let fd = (f(0.5 + step)? - f(0.5 - step)?) / (2.0 * step);
    let gap = (derivative_at_half(1.0, 1.0).map_err(err)? - fd).abs();
    let detail = format!("infinite horizon error {exact:.2e} (tol 1e-6), finite-difference gap {gap:.2e} (tol 1e-3)");
    if exact <= 1e-6 && gap <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn small_h() -> Outcome {
    let ratio = |h: f64| -> Result<f64, String> {
        Ok(lower_bound(h, 1.0, 0.0).map_err(err)?.lower_bound / small_h_asymptote(h).map_err(err)?)
    };
    let (r2, r3, r4) = (ratio(1e-2)?, ratio(1e-3)?, ratio(1e-4)?);
    let detail = format!("ratio {r2:.5} at 1e-2, {r3:.5} at 1e-3, {r4:.5} at 1e-4");
    if (0.95..=1.05).contains(&r3) && (r4 - 1.0).abs() < (r2 - 1.0).abs() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("exactness at H = 1/2", Duration::from_secs(1), exactness_at_half),
        ("I_H against quadrature oracle", Duration::from_secs(60), i_h_against_oracle),
        ("integral identities", Duration::from_secs(60), appendix_identities),
        ("special-function battery", Duration::from_secs(10), special_function_battery),
        ("grid bias reproduction", Duration::from_secs(120), grid_bias_reproduction),
        ("bound above MC for H < 1/2", Duration::from_secs(600), headline_ordering),
        ("relative error at H = 1/2", Duration::from_secs(120), relative_error_at_half),
        ("PWZ coupling oracle", Duration::from_secs(600), coupling_oracle),
        ("derivative at H = 1/2", Duration::from_secs(10), derivative_formula),
        ("small-H asymptote", Duration::from_secs(1), small_h),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(d) => (elapsed <= *limit, d),
            Err(d) => (false, d),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2} s, limit {} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
