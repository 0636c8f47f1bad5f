//! Closed-form quantities: Brownian baselines, the LFBM normalizers, the
//! functional `J_H`, the coupling bounds `m_H^c` and `m_H`, the optimized lower
//! bound, the derivative at `H = 1/2`, the small-`H` asymptote, and the
//! densities used to verify them.

mod bound;
mod brownian;
mod density;

pub use bound::{
    bound_objective, c_h, derivative_at_half, j_h, lower_bound, lower_bound_with, m_h, m_h_coupled, m_h_with_c_h,
    small_h_asymptote, v_h,
};
pub use brownian::{brownian_argmax_mean, brownian_sup_mean};
pub use density::{bessel_bridge_density, i_h, joint_density, joint_density_point, JointDensityPoint};

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Time horizon: a finite positive length or the infinite horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn is_infinite(self) -> bool {
        matches!(self, Horizon::Infinite)
    }

    /// The length as a float, `f64::INFINITY` for the infinite horizon.
    pub fn value(self) -> f64 {
        match self {
            Horizon::Finite(t) => t,
            Horizon::Infinite => f64::INFINITY,
        }
    }

    pub(crate) fn scaled(self, rho: f64) -> Horizon {
        match self {
            Horizon::Finite(t) => Horizon::Finite(t * rho),
            Horizon::Infinite => Horizon::Infinite,
        }
    }
}

impl From<f64> for Horizon {
    fn from(t: f64) -> Self {
        if t == f64::INFINITY {
            Horizon::Infinite
        } else {
            Horizon::Finite(t)
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") {
            return Ok(Horizon::Infinite);
        }
        let t: f64 = s.parse().map_err(|_| Error::domain("Horizon", format!("cannot parse horizon {s:?}")))?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain("Horizon", format!("horizon must be positive, got {s:?}")));
        }
        Ok(Horizon::Finite(t))
    }
}

/// One expected-supremum instance `(H, T, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    h: f64,
    t: Horizon,
    a: f64,
}

impl Problem {
    pub fn new(h: f64, t: impl Into<Horizon>, a: f64) -> Result<Self> {
        let t = t.into();
        check_h(h)?;
        check_horizon(t, a)?;
        Ok(Problem { h, t, a })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn t(&self) -> Horizon {
        self.t
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lower_bound(&self) -> Result<BoundReport> {
        lower_bound(self.h, self.t, self.a)
    }
}

/// The pair `(c+, c-)` selecting one coupling of fBms across `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingWeights {
    c_plus: f64,
    c_minus: f64,
}

impl CouplingWeights {
    /// The coupling that maximizes the bound.
    pub const ANTISYMMETRIC: CouplingWeights = CouplingWeights { c_plus: 1.0, c_minus: -1.0 };
    /// The Mandelbrot-van Ness field.
    pub const MANDELBROT_VAN_NESS: CouplingWeights = CouplingWeights { c_plus: 1.0, c_minus: 0.0 };

    pub fn new(c_plus: f64, c_minus: f64) -> Result<Self> {
        if !c_plus.is_finite() || !c_minus.is_finite() {
            return Err(Error::domain("CouplingWeights", format!("weights must be finite, got ({c_plus}, {c_minus})")));
        }
        if c_plus == 0.0 && c_minus == 0.0 {
            return Err(Error::domain("CouplingWeights", "weights (0, 0) do not define a process"));
        }
        Ok(CouplingWeights { c_plus, c_minus })
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }
}

/// Result of [`lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `m_H(T, a)`, the unscaled coupling bound.
    pub m_value: f64,
    /// Maximizing self-similarity scale.
    pub rho_star: f64,
    /// The optimized bound.
    pub lower_bound: f64,
    /// Set when an explicit formula replaced the numerical search.
    pub closed_form_used: bool,
    /// Numerical optimum found when cross-checking an explicit formula.
    pub optimizer_value: Option<f64>,
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain("Hurst index", format!("H must lie in (0, 1), got {h}")));
    }
    Ok(())
}

pub(crate) fn check_horizon(t: Horizon, a: f64) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::domain("drift", format!("a must be finite, got {a}")));
    }
    match t {
        Horizon::Finite(t) if !(t > 0.0) || !t.is_finite() => {
            Err(Error::domain("horizon", format!("T must be positive and finite or infinite, got {t}")))
        }
        Horizon::Infinite if !(a > 0.0) => {
            Err(Error::domain("horizon", format!("the infinite horizon needs a > 0, got a = {a}")))
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_parsing_and_display() {
        assert_eq!("inf".parse::<Horizon>().unwrap(), Horizon::Infinite);
        assert_eq!("2.5".parse::<Horizon>().unwrap(), Horizon::Finite(2.5));
        assert!("0".parse::<Horizon>().is_err());
        assert!("-1".parse::<Horizon>().is_err());
        assert!("abc".parse::<Horizon>().is_err());
        assert_eq!(Horizon::Infinite.to_string(), "inf");
        assert_eq!(Horizon::from(f64::INFINITY), Horizon::Infinite);
    }

    #[test]
    fn problem_validation() {
        assert!(Problem::new(0.3, 1.0, -2.0).is_ok());
        assert!(Problem::new(0.3, Horizon::Infinite, 1.0).is_ok());
        assert!(Problem::new(0.3, Horizon::Infinite, 0.0).is_err());
        assert!(Problem::new(0.3, Horizon::Infinite, -1.0).is_err());
        assert!(Problem::new(0.0, 1.0, 0.0).is_err());
        assert!(Problem::new(1.0, 1.0, 0.0).is_err());
        assert!(Problem::new(0.5, 0.0, 0.0).is_err());
        assert!(Problem::new(0.5, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn coupling_weights_reject_origin() {
        assert!(CouplingWeights::new(0.0, 0.0).is_err());
        assert!(CouplingWeights::new(0.0, 2.0).is_ok());
    }
}
