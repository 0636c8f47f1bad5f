//! Expected supremum and expected argmax of drifted Brownian motion.

use super::{check_horizon, Horizon};
use crate::error::Result;
use crate::specfun::{erf, erfc};
use std::f64::consts::{FRAC_2_SQRT_PI, PI};

// Below this |u| the power series are used; both are entire in u.
const SERIES_MAX_U: f64 = 0.5;

/// `E sup_{t <= T} (B(t) - a t)`.
pub fn brownian_sup_mean(t: impl Into<Horizon>, a: f64) -> Result<f64> {
    let t = t.into();
    check_horizon(t, a)?;
    let t = match t {
        Horizon::Infinite => return Ok(0.5 / a),
        Horizon::Finite(t) => t,
    };
    if a == 0.0 {
        return Ok((2.0 * t / PI).sqrt());
    }
    let u = a * (t / 2.0).sqrt();
    if u.abs() < SERIES_MAX_U {
        return Ok((t / 2.0).sqrt() * (-u + FRAC_2_SQRT_PI * sup_series(u)));
    }
    let e = (-u * u).exp() / PI.sqrt();
    if u > 0.0 {
        Ok((1.0 - (1.0 + 2.0 * u * u) * erfc(u) + 2.0 * u * e) / (2.0 * a))
    } else {
        // Every term has the same sign once a < 0 is factored out.
        let v = -u;
        Ok((2.0 * v * v + (1.0 + 2.0 * v * v) * erf(v) + 2.0 * v * e) / (-2.0 * a))
    }
}

/// `E argmax_{t <= T} (B(t) - a t)`.
pub fn brownian_argmax_mean(t: impl Into<Horizon>, a: f64) -> Result<f64> {
    let t = t.into();
    check_horizon(t, a)?;
    let t = match t {
        Horizon::Infinite => return Ok(0.5 / (a * a)),
        Horizon::Finite(t) => t,
    };
    if a == 0.0 {
        return Ok(t / 2.0);
    }
    let u = a * (t / 2.0).sqrt();
    if u.abs() < SERIES_MAX_U {
        return Ok(t / 2.0 + t * FRAC_2_SQRT_PI * argmax_series(u));
    }
    let e = FRAC_2_SQRT_PI * u * (-u * u).exp();
    let u2 = u * u;
    if u > 0.0 {
        Ok(t / (4.0 * u2) * (1.0 - (1.0 - 2.0 * u2) * erfc(u) - e))
    } else {
        Ok(t / (4.0 * u2) * (2.0 * u2 + (1.0 - 2.0 * u2) * erf(u) - e))
    }
}

/// `Σ_{n>=0} (-1)^(n+1) u^(2n) / (n! (4n²-1))`.
fn sup_series(u: f64) -> f64 {
    let u2 = u * u;
    let mut power = 1.0;
    let mut sum = 1.0;
    for n in 1..60 {
        let nf = n as f64;
        power *= -u2 / nf;
        let term = -power / (4.0 * nf * nf - 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `Σ_{n>=1} (-1)^n u^(2n-1) / ((n-1)! (4n²-1))`.
fn argmax_series(u: f64) -> f64 {
    let u2 = u * u;
    let mut power = -u;
    let mut sum = power / 3.0;
    for n in 2..60 {
        let nf = n as f64;
        power *= -u2 / (nf - 1.0);
        let term = power / (4.0 * nf * nf - 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{Integrator, Interval};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Direct evaluation of the textbook expressions, valid away from a = 0.
    fn sup_direct(t: f64, a: f64) -> f64 {
        let u = a * (t / 2.0).sqrt();
        (-a * a * t + (1.0 + a * a * t) * erf(u) + (2.0 * t / PI).sqrt() * a * (-a * a * t / 2.0).exp()) / (2.0 * a)
    }

    fn argmax_direct(t: f64, a: f64) -> f64 {
        let u = a * (t / 2.0).sqrt();
        (a * a * t + (1.0 - a * a * t) * erf(u) - (2.0 * t / PI).sqrt() * a * (-a * a * t / 2.0).exp()) / (2.0 * a * a)
    }

    #[test]
    fn special_values() {
        assert!((brownian_sup_mean(1.0, 0.0).unwrap() - 0.797_884_560_8).abs() < 1e-10);
        assert_eq!(brownian_sup_mean(Horizon::Infinite, 1.0).unwrap(), 0.5);
        assert_eq!(brownian_argmax_mean(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(brownian_argmax_mean(Horizon::Infinite, 1.0).unwrap(), 0.5);
        assert!(brownian_sup_mean(Horizon::Infinite, 0.0).is_err());
    }

    #[test]
    fn tiny_drift_is_continuous() {
        assert!((brownian_sup_mean(1.0, 1e-12).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-9);
        assert!((brownian_argmax_mean(1.0, 1e-12).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn branches_agree_with_direct_formula() {
        for &t in &[0.3, 1.0, 4.0] {
            for &a in &[-3.0, -1.1, -0.6, 0.6, 0.9, 2.5] {
                assert!(rel(brownian_sup_mean(t, a).unwrap(), sup_direct(t, a)) < 1e-13, "({t},{a})");
                assert!(rel(brownian_argmax_mean(t, a).unwrap(), argmax_direct(t, a)) < 1e-12, "({t},{a})");
            }
        }
        // Either side of the series switch.
        for &u in &[0.499_999, 0.500_001, -0.499_999, -0.500_001] {
            let a = u * 2f64.sqrt();
            assert!(rel(brownian_sup_mean(1.0, a).unwrap(), sup_direct(1.0, a)) < 1e-13);
            assert!(rel(brownian_argmax_mean(1.0, a).unwrap(), argmax_direct(1.0, a)) < 1e-12);
        }
    }

    #[test]
    fn appendix_form_of_argmax_mean() {
        // (T/2)(1 + (1/(2u²) - 1) erf(u) - e^{-u²}/(√π u))
        let (t, a): (f64, f64) = (2.0, 0.8);
        let u: f64 = a * (t / 2.0).sqrt();
        let v = t / 2.0 * (1.0 + (0.5 / (u * u) - 1.0) * erf(u) - (-u * u).exp() / (PI.sqrt() * u));
        assert!(rel(brownian_argmax_mean(t, a).unwrap(), v) < 1e-13);
    }

    #[test]
    fn large_drift_limits() {
        // For T a² large the finite horizon behaves like the infinite one.
        let a = 40.0;
        assert!(rel(brownian_sup_mean(1.0, a).unwrap(), 0.5 / a) < 1e-12);
        assert!(rel(brownian_argmax_mean(1.0, a).unwrap(), 0.5 / (a * a)) < 1e-12);
        // Strong negative drift: the maximum sits at T.
        let m = brownian_sup_mean(1.0, -40.0).unwrap();
        assert!(rel(m, 40.0) < 1e-3);
    }

    #[test]
    fn argmax_mean_matches_marginal_density() {
        // Density of the argmax on [0, T].
        let (t, a) = (1.0f64, 1.0f64);
        // Written in r = T - s so the inverse square root sits at r = 0.
        let f = |r: f64| {
            let s = t - r;
            let l = (-a * a * s / 2.0).exp() / (PI * s).sqrt() - a / 2f64.sqrt() * erfc(a * s.sqrt() / 2f64.sqrt());
            let rr = (-a * a * r / 2.0).exp() / (PI * r).sqrt() + a / 2f64.sqrt() * erfc(-a * r.sqrt() / 2f64.sqrt());
            s * l * rr
        };
        let q = Integrator::absolute(1e-12)
            .integrate(f, &Interval::new(0.0, t).singular_lo(-0.5))
            .unwrap()
            .value;
        assert!(rel(brownian_argmax_mean(t, a).unwrap(), q) < 1e-7);
    }
}
