//! Derivative-free maximization over a scale parameter `ρ > 0`.
//!
//! A log-uniform scan locates the best region (ρ = 1 is always sampled), then a
//! golden-section search refines it between the neighbouring scan points.

use crate::error::{Error, Result};

/// Scan bracket and resolution, in natural-log units of `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub log_rho_min: f64,
    pub log_rho_max: f64,
    /// Number of scan points; 201 over 40 log-units is a hedge against a
    /// second, narrow peak and can be raised.
    pub coarse_points: usize,
    /// Width of the final bracket in `ln ρ`, i.e. its relative width in `ρ`.
    pub rel_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { log_rho_min: -20.0, log_rho_max: 20.0, coarse_points: 201, rel_tol: 1e-10 }
    }
}

/// Log-units added to a bracket edge when the scan peaks there.
pub const EDGE_EXTENSION: f64 = 10.0;

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.log_rho_min < self.log_rho_max) || !self.log_rho_min.is_finite() || !self.log_rho_max.is_finite() {
            return Err(Error::domain(
                "ScanConfig",
                format!("need log_rho_min < log_rho_max, got [{}, {}]", self.log_rho_min, self.log_rho_max),
            ));
        }
        if self.coarse_points < 11 {
            return Err(Error::domain("ScanConfig", format!("coarse_points must be at least 11, got {}", self.coarse_points)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("ScanConfig", format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Maximizes `objective` over `ρ > 0`; returns `(ρ*, value)`.
///
/// Ties are resolved towards `ρ = 1` and then towards smaller `ρ`, so a
/// constant objective returns `(1, objective(1))`.
pub fn maximize_over_rho<F: Fn(f64) -> f64>(objective: F, config: &ScanConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let eval = |x: f64| -> Result<f64> {
        let v = objective(x.exp());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numerical("maximize_over_rho", format!("objective is not finite at rho = {}", x.exp())))
        }
    };

    let step = (config.log_rho_max - config.log_rho_min) / (config.coarse_points - 1) as f64;
    let mut xs: Vec<f64> = (0..config.coarse_points).map(|i| config.log_rho_min + i as f64 * step).collect();
    if config.log_rho_min < 0.0 && config.log_rho_max > 0.0 && !xs.contains(&0.0) {
        let pos = xs.partition_point(|&x| x < 0.0);
        xs.insert(pos, 0.0);
    }
    let mut fs = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;

    let mut best = best_index(&xs, &fs);
    // One extension on the side where the scan peaked.
    if best == 0 || best == xs.len() - 1 {
        let n_extra = (EDGE_EXTENSION / step).ceil() as usize;
        if best == 0 {
            let lo = xs[0];
            let mut ext: Vec<f64> = (1..=n_extra).rev().map(|i| lo - i as f64 * step).collect();
            let mut fe = ext.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
            ext.append(&mut xs);
            fe.append(&mut fs);
            xs = ext;
            fs = fe;
        } else {
            let hi = xs[xs.len() - 1];
            for i in 1..=n_extra {
                let x = hi + i as f64 * step;
                xs.push(x);
                fs.push(eval(x)?);
            }
        }
        best = best_index(&xs, &fs);
        if best == 0 || best == xs.len() - 1 {
            return Err(Error::numerical(
                "maximize_over_rho",
                format!(
                    "maximum on the edge of the extended bracket: objective({:e}) = {}",
                    xs[best].exp(),
                    fs[best]
                ),
            )
            .with_partial(fs[best]));
        }
    }

    let (x_best, f_best) = (xs[best], fs[best]);
    let (x_ref, f_ref) = golden_section(&eval, xs[best - 1], xs[best + 1], config.rel_tol)?;
    if f_ref > f_best {
        Ok((x_ref.exp(), f_ref))
    } else {
        Ok((x_best.exp(), f_best))
    }
}

fn best_index(xs: &[f64], fs: &[f64]) -> usize {
    let mut best = xs.iter().position(|&x| x == 0.0).unwrap_or(0);
    for (i, &f) in fs.iter().enumerate() {
        if f > fs[best] {
            best = i;
        }
    }
    best
}

fn golden_section<E: Fn(f64) -> Result<f64>>(eval: &E, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
