//! Scalar special functions: confluent hypergeometric functions, incomplete
//! gamma functions (and the derivative of the lower one in its order), the
//! error function and the gamma function.
//!
//! Gamma, log-gamma and the error functions are taken from `libm`; the rest
//! is implemented here.

mod hypergeometric;
mod incgamma;

pub use hypergeometric::{kummer_1f1, kummer_1f1_with, tricomi_u, tricomi_u_with, TRICOMI_SERIES_MAX_Z};
pub use incgamma::{
    lower_gamma, lower_gamma_dalpha, lower_gamma_scaled, lower_gamma_with, upper_gamma, upper_gamma_with,
};

use crate::error::{Error, Result};

/// Accuracy controls for the series and continued-fraction evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecTol {
    /// Relative accuracy target.
    pub rel_tol: f64,
    /// Cap on the number of series terms or continued-fraction steps.
    pub max_terms: usize,
}

impl Default for SpecTol {
    fn default() -> Self {
        SpecTol { rel_tol: 1e-10, max_terms: 10_000 }
    }
}

impl SpecTol {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::domain("SpecTol", format!("rel_tol must be positive, got {rel_tol}")));
        }
        if max_terms < 100 {
            return Err(Error::domain("SpecTol", format!("max_terms must be at least 100, got {max_terms}")));
        }
        Ok(SpecTol { rel_tol, max_terms })
    }
}

/// Gamma function, including negative non-integer arguments.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural logarithm of `|Γ(x)|` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1 / Γ(x)`, which is zero at the poles `x = 0, -1, -2, ...`.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

pub fn erf(z: f64) -> f64 {
    libm::erf(z)
}

pub fn erfc(z: f64) -> f64 {
    libm::erfc(z)
}

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
