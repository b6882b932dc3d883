//! Gaussian EPR-steering toolkit for two-mode squeezed states.
//!
//! The crate works entirely at the covariance-matrix level. States are
//! described in shot-noise units (vacuum quadrature variance = 1) by the
//! standard form
//!
//! ```text
//!     | alpha*I   gamma*Z |
//!     | gamma*Z   beta*I  |      I = diag(1, 1), Z = diag(1, -1)
//! ```
//!
//! over the quadrature order `(X_A, P_A, X_B, P_B)`.
//!
//! Modules:
//! - [`gaussian`]: covariance types, determinants, symplectic spectrum, physicality.
//! - [`steering`]: the Gaussian steering quantifiers and regime classification.
//! - [`schemes`]: the ideal TMSS and the three noise/loss manipulation schemes.
//! - [`boundary`]: analytic boundaries, bisection cross-checks, sweeps and region maps.
//! - [`homodyne`]: Monte-Carlo homodyne records, covariance estimation, bootstrap errors.
//! - [`cli`]: the `steering-lab` command-line front end.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod homodyne;
pub mod output;
pub mod schemes;
pub mod steering;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, GeneralCM, StandardFormCM, SymplecticSpectrum};
pub use schemes::{Scheme, SchemeParams};
pub use steering::{Direction, Regime, SteeringResult, Tolerances};
