//! Joint density of the supremum of drifted Brownian motion and its location,
//! the Bessel-bridge density of the path seen back from the maximum, and the
//! functional `I_H` built on it.

use super::{check_h, check_horizon, Horizon};
use crate::error::{Error, Result};
use crate::specfun::{erfc, gamma, kummer_1f1, tricomi_u};
use std::f64::consts::PI;

/// One evaluation of the joint density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDensityPoint {
    pub t: f64,
    pub y: f64,
    pub value: f64,
}

/// Density of `(argmax, max)` of `B(s) - a s` on `[0, T]` at `(t, y)`.
/// Points outside the support give zero.
pub fn joint_density(t: f64, y: f64, horizon: impl Into<Horizon>, a: f64) -> Result<f64> {
    let horizon = horizon.into();
    check_horizon(horizon, a)?;
    if !(t > 0.0 && y > 0.0) || t >= horizon.value() || !y.is_finite() {
        return Ok(0.0);
    }
    let core = y.ln() - (y + t * a).powi(2) / (2.0 * t) - 1.5 * t.ln();
    let ln_p = match horizon {
        Horizon::Infinite => core + (2f64.sqrt() * a).ln() - 0.5 * PI.ln(),
        Horizon::Finite(big_t) => {
            let rest = big_t - t;
            core - PI.ln() - 0.5 * rest.ln() + ln_end_factor(a * (rest / 2.0).sqrt())
        }
    };
    Ok(ln_p.exp())
}

pub fn joint_density_point(t: f64, y: f64, horizon: impl Into<Horizon>, a: f64) -> Result<JointDensityPoint> {
    Ok(JointDensityPoint { t, y, value: joint_density(t, y, horizon, a)? })
}

/// `ln(e^{-w²} + √π w erfc(-w))`.
fn ln_end_factor(w: f64) -> f64 {
    if w >= -2.0 {
        return ((-w * w).exp() + PI.sqrt() * w * erfc(-w)).ln();
    }
    // For v = -w > 2: e^{-v²}(1 - √π v erfcx(v)) = e^{-v²} r/(v + r), where
    // √π erfcx(v) = 1/(v + r) and r is the tail of the continued fraction.
    let v = -w;
    let mut r = 0.0;
    for k in (1..=120).rev() {
        r = (k as f64 / 2.0) / (v + r);
    }
    -v * v + (r / (v + r)).ln()
}

/// Density at `x` of `Y(t) - Y(t - s)` given that the drifted motion `Y` peaks
/// at time `t` with height `y`: a three-dimensional Bessel bridge from `(0, 0)`
/// to `(t, y)`. Zero outside `0 < s < t`, `x > 0`.
pub fn bessel_bridge_density(x: f64, s: f64, t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0 && y > 0.0) || !t.is_finite() || !y.is_finite() {
        return Err(Error::domain("bessel_bridge_density", format!("needs t, y > 0, got t = {t}, y = {y}")));
    }
    if !(s > 0.0 && s < t && x > 0.0) || !x.is_finite() {
        return Ok(0.0);
    }
    let r = t - s;
    let ln_g = x.ln() - 1.5 * s.ln() - x * x / (2.0 * s) - y.ln() + 1.5 * t.ln() + y * y / (2.0 * t)
        - 0.5 * (2.0 * PI * r).ln()
        - (y - x).powi(2) / (2.0 * r)
        + (-(-2.0 * x * y / r).exp_m1()).ln();
    Ok(ln_g.exp())
}

/// `I_H(t, y)`, the conditional expectation of `∫_0^t (t-s)^(H-3/2) (Y(t) - Y(s)) ds`
/// given that the drifted motion peaks at time `t` with height `y`.
pub fn i_h(h: f64, t: f64, y: f64) -> Result<f64> {
    check_h(h)?;
    if h == 0.5 {
        return Err(Error::unsupported("i_h", "the closed form needs H != 1/2"));
    }
    if !(t > 0.0 && y > 0.0) || !t.is_finite() || !y.is_finite() {
        return Err(Error::domain("i_h", format!("needs t, y > 0, got t = {t}, y = {y}")));
    }
    let z = y * y / (2.0 * t);
    let bracket = one_minus_scaled_u(h, z)?;
    Ok(t.powf(h + 0.5) / (y * (h - 0.5) * (h + 0.5)) * bracket + t.powf(h - 0.5) * y / (h + 0.5))
}

/// `1 - Γ(H)/√π U(H - 1/2, 1/2, z)`.
///
/// Near `z = 0` both terms tend to one; there the series
/// `Γ(H)/√π U = M(H-1/2, 1/2, z) - 2 Γ(H)/Γ(H-1/2) √z M(H, 3/2, z)` is used with
/// the leading one of the first Kummer series removed analytically.
fn one_minus_scaled_u(h: f64, z: f64) -> Result<f64> {
    if z >= 1.0 {
        return Ok(1.0 - gamma(h) / PI.sqrt() * tricomi_u(h - 0.5, 0.5, z)?);
    }
    let alpha = h - 0.5;
    let mut term = 1.0;
    let mut tail = 0.0;
    for n in 0..500 {
        let nf = n as f64;
        term *= (alpha + nf) * z / ((0.5 + nf) * (nf + 1.0));
        tail += term;
        if term.abs() <= 1e-17 * tail.abs() {
            break;
        }
    }
    let second = 2.0 * gamma(h) / gamma(h - 0.5) * z.sqrt() * kummer_1f1(h, 1.5, z)?;
    Ok(-tail + second)
}
