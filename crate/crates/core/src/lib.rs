//! Confidence intervals centered at estimators that are intentionally biased
//! to reduce mean squared error.
//!
//! The setting is a pair of estimators of a scalar `theta`:
//!
//! - `theta1_hat ~ N(theta, s1^2)`, unbiased;
//! - `theta2_hat ~ N(theta + b2, s2^2)` with `b2^2 + s2^2 <= s1^2`.
//!
//! The crate provides the analytic coverage probabilities of intervals built
//! from these ([`coverage`]), calibrated critical values and the
//! length-minimizing convex combination ([`calibrate`]), the interval
//! constructors themselves ([`intervals`]), and a Monte Carlo and pairs
//! bootstrap harness that checks the analytic results by simulation
//! ([`montecarlo`]). [`io`] holds the text formats shared with the CLI.
//!
//! ```
//! use biasci::calibrate::calibrated_z;
//!
//! let cal = calibrated_z(1.0, 0.5, 0.95).unwrap();
//! assert!((cal.z_tilde - 1.6885).abs() < 1e-3);
//! ```

pub mod calibrate;
pub mod coverage;
mod error;
pub mod intervals;
pub mod io;
pub mod montecarlo;
pub mod normal;
pub mod optimize;

pub use error::{Error, Result};
