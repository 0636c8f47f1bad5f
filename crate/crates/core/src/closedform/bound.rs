//! Normalizers, `J_H`, the coupling bounds and the optimized lower bound.

use super::{brownian_argmax_mean, check_h, check_horizon, BoundReport, CouplingWeights, Horizon};
use crate::error::{Error, Result};
use crate::optimize::{maximize_over_rho, ScanConfig};
use crate::specfun::{gamma, lower_gamma, lower_gamma_dalpha, lower_gamma_scaled, ln_gamma, EULER_GAMMA};
use std::f64::consts::PI;

/// `(cos, sin)` of `π(H + 1/2)/2`, written so the cosine is exactly zero at `H = 1/2`.
fn half_angle(h: f64) -> (f64, f64) {
    let phi = PI * (0.5 - h) / 2.0;
    (phi.sin(), phi.cos())
}

/// `C_H`, the square root of `Γ(H + 1/2) Γ(2 - 2H) / (2H Γ(3/2 - H))`.
pub fn c_h(h: f64) -> Result<f64> {
    check_h(h)?;
    Ok((gamma(0.5 + h) * gamma(2.0 - 2.0 * h) / (2.0 * h * gamma(1.5 - h))).sqrt())
}

/// `V_H^c = Var X_H^c(1)`.
pub fn v_h(h: f64, c: CouplingWeights) -> Result<f64> {
    let ch = c_h(h)?;
    let (cos, sin) = half_angle(h);
    let s = (c.c_plus() + c.c_minus()) * cos;
    let d = (c.c_plus() - c.c_minus()) * sin;
    Ok(ch * ch * (s * s + d * d))
}

/// `J_H(T, a) = E X_H^+(τ)` at the argmax `τ` of the drifted driving motion.
///
/// For finite `T` this is evaluated as `T^H γ*(H, a²T/2) / (√(2π)(H + 1/2))`
/// with `γ*(α, x) = x^-α γ(α, x)`, which equals the `|a|^-2H γ(H, a²T/2)` form
/// and stays accurate as `a → 0`.
pub fn j_h(h: f64, t: impl Into<Horizon>, a: f64) -> Result<f64> {
    let t = t.into();
    check_h(h)?;
    check_horizon(t, a)?;
    let norm = (2.0 * PI).sqrt() * (h + 0.5);
    match t {
        Horizon::Infinite => Ok((h * 2f64.ln() + ln_gamma(h) - 2.0 * h * a.ln()).exp() / norm),
        Horizon::Finite(t) if a == 0.0 => Ok(t.powf(h) / (norm * h)),
        Horizon::Finite(t) => Ok(t.powf(h) * lower_gamma_scaled(h, a * a * t / 2.0)? / norm),
    }
}

/// `m_H^c(T, a)`: the drifted coupled fBm evaluated at the argmax of the driving
/// drifted Brownian motion, in expectation.
pub fn m_h_coupled(h: f64, t: impl Into<Horizon>, a: f64, c: CouplingWeights) -> Result<f64> {
    let t = t.into();
    let v = v_h(h, c)?;
    if v == 0.0 {
        return Err(Error::domain(
            "m_h_coupled",
            format!("weights ({}, {}) give a degenerate process at H = {h}", c.c_plus(), c.c_minus()),
        ));
    }
    let j = j_h(h, t, a)?;
    Ok((c.c_plus() - c.c_minus()) / v.sqrt() * j - drift_term(t, a)?)
}

/// `m_H(T, a)`, the coupling bound maximized over the weights.
pub fn m_h(h: f64, t: impl Into<Horizon>, a: f64) -> Result<f64> {
    m_h_with_c_h(h, t, a, c_h(h)?)
}

/// `m_H(T, a)` with the normalizer `C_H` supplied by the caller.
pub fn m_h_with_c_h(h: f64, t: impl Into<Horizon>, a: f64, c_h_value: f64) -> Result<f64> {
    let t = t.into();
    let j = j_h(h, t, a)?;
    let (_, sin) = half_angle(h);
    Ok(j / (c_h_value * sin) - drift_term(t, a)?)
}

/// `a E τ`, zero without drift.
fn drift_term(t: Horizon, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a * brownian_argmax_mean(t, a)?)
}

/// The map `ρ ↦ ρ^-H m_H(ρT, ρ^(H-1) a)` whose supremum is the lower bound;
/// failed evaluations map to NaN.
pub fn bound_objective(h: f64, t: impl Into<Horizon>, a: f64) -> impl Fn(f64) -> f64 {
    let t = t.into();
    move |rho: f64| match m_h(h, t.scaled(rho), rho.powf(h - 1.0) * a) {
        Ok(m) => rho.powf(-h) * m,
        Err(_) => f64::NAN,
    }
}

pub fn lower_bound(h: f64, t: impl Into<Horizon>, a: f64) -> Result<BoundReport> {
    lower_bound_with(h, t, a, &ScanConfig::default())
}

/// The lower bound `sup_ρ ρ^-H m_H(ρT, ρ^(H-1) a)`.
///
/// Without drift the objective does not depend on `ρ`; on the infinite horizon
/// the supremum is explicit and is cross-checked against the numerical search
/// whenever the maximizer lies well inside the search bracket.
pub fn lower_bound_with(h: f64, t: impl Into<Horizon>, a: f64, scan: &ScanConfig) -> Result<BoundReport> {
    let t = t.into();
    let m_value = m_h(h, t, a)?;
    if a == 0.0 {
        return Ok(BoundReport { m_value, rho_star: 1.0, lower_bound: m_value, closed_form_used: true, optimizer_value: None });
    }
    if t.is_infinite() {
        let (value, ln_rho) = infinite_horizon_bound(h, a)?;
        let rho_star = ln_rho.exp();
        let mut optimizer_value = None;
        if ln_rho.abs() < 0.75 * scan.log_rho_max.min(-scan.log_rho_min) {
            let (_, v) = maximize_over_rho(bound_objective(h, t, a), scan)?;
            if (v - value).abs() > 1e-8 * value.abs() {
                return Err(Error::numerical(
                    "lower_bound",
                    format!("optimizer value {v} disagrees with the explicit bound {value} at (H, a) = ({h}, {a})"),
                )
                .with_partial(value));
            }
            optimizer_value = Some(v);
        }
        return Ok(BoundReport { m_value, rho_star, lower_bound: value, closed_form_used: true, optimizer_value });
    }
    let (rho_star, value) = maximize_over_rho(bound_objective(h, t, a), scan).map_err(|e| match e {
        Error::Numerical { detail, partial, .. } => Error::Numerical {
            what: "lower_bound",
            detail: format!("{detail} for (H, T, a) = ({h}, {t}, {a})"),
            partial,
        },
        other => other,
    })?;
    Ok(BoundReport { m_value, rho_star, lower_bound: value.max(m_value), closed_form_used: false, optimizer_value: None })
}

/// Explicit supremum on the infinite horizon and the log of its maximizer.
fn infinite_horizon_bound(h: f64, a: f64) -> Result<(f64, f64)> {
    let ch = c_h(h)?;
    let (_, sin) = half_angle(h);
    // w* = (2^(H+1) a^(1-2H) H Γ(H) / (√(2π) C_H (H+1/2) sin))^(1/(1-H)), with w = ρ^(1-2H).
    let ln_inner = (h + 1.0) * 2f64.ln() + (1.0 - 2.0 * h) * a.ln() + h.ln() + ln_gamma(h)
        - 0.5 * (2.0 * PI).ln()
        - ch.ln()
        - (h + 0.5).ln()
        - sin.ln();
    let ln_w = ln_inner / (1.0 - h);
    let value = (1.0 - h) / (2.0 * a * h) * ln_w.exp();
    let ln_rho = if h == 0.5 { 0.0 } else { ln_w / (1.0 - 2.0 * h) };
    Ok((value, ln_rho))
}

/// `∂/∂H` of the expected supremum at `H = 1/2`.
pub fn derivative_at_half(t: impl Into<Horizon>, a: f64) -> Result<f64> {
    let t = t.into();
    check_horizon(t, a)?;
    if a == 0.0 {
        return Err(Error::unsupported("derivative_at_half", "no closed form is available for a = 0"));
    }
    let (g, dg) = match t {
        Horizon::Infinite => (PI.sqrt(), -PI.sqrt() * (EULER_GAMMA + 2.0 * 2f64.ln())),
        Horizon::Finite(t) => {
            let x = a * a * t / 2.0;
            (lower_gamma(0.5, x)?, lower_gamma_dalpha(0.5, x)?)
        }
    };
    Ok(((2.0 / (a * a)).ln() * g + dg) / (PI.sqrt() * a.abs()))
}

/// `2/√(πH)`, the leading behaviour of the bound at `T = 1`, `a = 0` as `H → 0`.
pub fn small_h_asymptote(h: f64) -> Result<f64> {
    check_h(h)?;
    Ok(2.0 / (PI * h).sqrt())
}
