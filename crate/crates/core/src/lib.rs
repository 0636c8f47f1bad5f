//! Lower bound for the expected supremum of drifted fractional Brownian
//! motion obtained by evaluating a coupled fBm at the argmax time of its
//! driving Brownian motion, together with the numerical machinery used to
//! check it: special functions, adaptive quadrature, a one-dimensional
//! optimizer and Monte Carlo simulators.
//!
//! The expected supremum is
//! `M_H(T, a) = E sup_{t in [0, T]} (B_H(t) - a t)`; see [`closedform::lower_bound`]
//! for the bound and [`simulate`] for the estimators it is compared against.

pub mod closedform;
pub mod error;
pub mod optimize;
pub mod quad;
pub mod selftest;
pub mod simulate;
pub mod specfun;

pub use closedform::{BoundReport, CouplingWeights, Horizon, Problem};
pub use error::{Error, Result};
pub use simulate::{GridPath, McEstimate, PwzConfig};
