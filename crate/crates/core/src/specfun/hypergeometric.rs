//! Kummer's `1F1(a; b; z)` and Tricomi's `U(a, b, z)` for real arguments.

use super::{gamma, ln_gamma, rgamma, CompensatedSum, SpecTol};
use crate::error::{Error, Result};
use crate::quad::{Integrator, Interval};

/// Above this argument `U` is always evaluated from its integral
/// representation; below it the two-`1F1` combination is used unless its
/// cancellation is too severe for the requested accuracy.
pub const TRICOMI_SERIES_MAX_Z: f64 = 25.0;

// Relative accuracy assumed for the gamma-function prefactors.
const PREFACTOR_EPS: f64 = 1e-15;

pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    kummer_1f1_with(a, b, z, &SpecTol::default())
}

/// Kummer's function by its power series; negative arguments go through
/// `1F1(a; b; z) = e^z 1F1(b - a; b; -z)` so that the series has no sign changes
/// driven by `z`.
pub fn kummer_1f1_with(a: f64, b: f64, z: f64, tol: &SpecTol) -> Result<f64> {
    if b <= 0.0 && b == b.round() {
        return Err(Error::domain("kummer_1f1", format!("b = {b} is a non-positive integer")));
    }
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::domain("kummer_1f1", format!("non-finite argument ({a}, {b}, {z})")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z < 0.0 {
        let m = kummer_series(b - a, b, -z, tol).map_err(|e| tag(e, a, b, z))?;
        return Ok(z.exp() * m);
    }
    kummer_series(a, b, z, tol).map_err(|e| tag(e, a, b, z))
}

fn tag(e: Error, a: f64, b: f64, z: f64) -> Error {
    match e {
        Error::Numerical { what, detail, partial } => {
            Error::Numerical { what, detail: format!("{detail} at (a, b, z) = ({a}, {b}, {z})"), partial }
        }
        other => other,
    }
}

fn kummer_series(a: f64, b: f64, z: f64, tol: &SpecTol) -> Result<f64> {
    let mut sum = CompensatedSum::default();
    let mut term = 1.0;
    sum.add(term);
    let mut small_run = 0;
    for n in 0..tol.max_terms {
        let nf = n as f64;
        term *= (a + nf) * z / ((b + nf) * (nf + 1.0));
        if term == 0.0 {
            return Ok(sum.value());
        }
        sum.add(term);
        let s = sum.value();
        if !s.is_finite() {
            return Err(Error::numerical("kummer_1f1", "series overflowed"));
        }
        if term.abs() <= tol.rel_tol * s.abs() {
            small_run += 1;
            if small_run == 3 {
                return Ok(s);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::numerical("kummer_1f1", format!("no convergence within {} terms", tol.max_terms))
        .with_partial(sum.value()))
}

pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    tricomi_u_with(a, b, z, &SpecTol::default())
}

/// Tricomi's confluent hypergeometric function for `z > 0` and non-integer `b`.
///
/// For `z <= TRICOMI_SERIES_MAX_Z` it uses
/// `U = Γ(1-b)/Γ(a+1-b) M(a,b,z) + Γ(b-1)/Γ(a) z^(1-b) M(a+1-b,2-b,z)`
/// whenever the two terms do not cancel beyond the accuracy target; otherwise
/// it integrates `U = z^-a / Γ(a) ∫ e^-s s^(a-1) (1 + s/z)^(b-a-1) ds`, first
/// moving to a positive first parameter with
/// `U(a,b,z) = z^(1-b) U(1+a-b, 2-b, z)` or the contiguous relation
/// `U(a,b,z) = z U(a+1,b+1,z) + (a+1-b) U(a+1,b,z)`.
pub fn tricomi_u_with(a: f64, b: f64, z: f64, tol: &SpecTol) -> Result<f64> {
    if b == b.round() {
        return Err(Error::unsupported("tricomi_u", format!("integer b = {b}")));
    }
    if !(z > 0.0) || !z.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("tricomi_u", format!("requires finite z > 0, got (a, b, z) = ({a}, {b}, {z})")));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    if z <= TRICOMI_SERIES_MAX_Z {
        if let Some(v) = tricomi_series(a, b, z, tol)? {
            return Ok(v);
        }
    }
    tricomi_integral_any_a(a, b, z, tol, 0)
}

/// The two-`1F1` form; `None` when cancellation would spoil the result.
fn tricomi_series(a: f64, b: f64, z: f64, tol: &SpecTol) -> Result<Option<f64>> {
    // Tighter inner tolerance so the series truncation stays below the target.
    let inner = SpecTol { rel_tol: tol.rel_tol * 1e-3, max_terms: tol.max_terms };
    let t1 = match gamma(1.0 - b) * rgamma(a + 1.0 - b) {
        c if c == 0.0 => 0.0,
        c => c * kummer_1f1_with(a, b, z, &inner)?,
    };
    let t2 = match gamma(b - 1.0) * rgamma(a) {
        c if c == 0.0 => 0.0,
        c => c * z.powf(1.0 - b) * kummer_1f1_with(a + 1.0 - b, 2.0 - b, z, &inner)?,
    };
    let u = t1 + t2;
    let scale = t1.abs() + t2.abs();
    if u == 0.0 || !u.is_finite() {
        return Ok(None);
    }
    let condition = scale / u.abs();
    if condition * PREFACTOR_EPS * 16.0 > tol.rel_tol {
        return Ok(None);
    }
    Ok(Some(u))
}

fn tricomi_integral_any_a(a: f64, b: f64, z: f64, tol: &SpecTol, depth: u32) -> Result<f64> {
    if a == 0.0 {
        return Ok(1.0);
    }
    if a > 0.0 {
        return tricomi_integral(a, b, z, tol);
    }
    let a_t = 1.0 + a - b;
    if a_t > 0.0 {
        return Ok(z.powf(1.0 - b) * tricomi_integral(a_t, 2.0 - b, z, tol)?);
    }
    if depth > 64 {
        return Err(Error::numerical("tricomi_u", format!("recursion too deep at (a, b, z) = ({a}, {b}, {z})")));
    }
    let up1 = tricomi_integral_any_a(a + 1.0, b + 1.0, z, tol, depth + 1)?;
    let up2 = tricomi_integral_any_a(a + 1.0, b, z, tol, depth + 1)?;
    Ok(z * up1 + (a + 1.0 - b) * up2)
}

fn tricomi_integral(a: f64, b: f64, z: f64, tol: &SpecTol) -> Result<f64> {
    debug_assert!(a > 0.0);
    let c = b - a - 1.0;
    let integ = Integrator::relative((tol.rel_tol * 1e-2).max(1e-14));
    if a >= 1.0 {
        let r = integ
            .integrate(|s| (-s + (a - 1.0) * s.ln() + c * (s / z).ln_1p()).exp(), &Interval::new(0.0, f64::INFINITY))
            .map_err(|e| tag(e, a, b, z))?;
        return Ok((-a * z.ln() - ln_gamma(a)).exp() * r.value);
    }
    // Subtract the endpoint value on [0, 1] so the 1/a piece is exact; the
    // s^(a-1) substitution underflows for tiny a.
    // ∫ = ∫_0^1 s^(a-1) (f - 1) + 1/a + ∫_1^∞ s^(a-1) f, f = e^-s (1 + s/z)^c.
    let near = integ
        .integrate(|s| s.powf(a - 1.0) * (-s + c * (s / z).ln_1p()).exp_m1(), &Interval::new(0.0, 1.0).singular_lo(a))
        .map_err(|e| tag(e, a, b, z))?;
    let far = integ
        .integrate(|s| (-s + (a - 1.0) * s.ln() + c * (s / z).ln_1p()).exp(), &Interval::new(1.0, f64::INFINITY))
        .map_err(|e| tag(e, a, b, z))?;
    // z^-a / Γ(a) · ∫ = z^-a / Γ(a+1) · (1 + a (near + far)).
    Ok((-a * z.ln() - ln_gamma(a + 1.0)).exp() * (1.0 + a * (near.value + far.value)))
}
