//! Concentration bounds for quadratic forms `ξᵀAξ` of independent centred
//! random variables.
//!
//! The crate evaluates three tail bounds (Gaussian chaos, Hanson-Wright
//! with an explicit constant, and the sharper bound under the Bernstein
//! moment condition), certifies that condition for concrete coordinate
//! laws, and checks the bounds against Monte Carlo estimates and exact
//! enumeration.
//!
//! ```
//! use quadconc_core::{bounds, linalg, BoundInputs, SigmaDiag, SquareMatrix};
//!
//! let a = SquareMatrix::identity(4).unwrap();
//! let norms = linalg::scaled_norm_stats(&a, &SigmaDiag::ones(4), linalg::OP_NORM_TOL).unwrap();
//! let inputs = BoundInputs::new(norms, 1.0, 1.0).unwrap();
//! let p = bounds::bernstein_tail(&inputs, 10.0);
//! assert!((p - 0.9617).abs() < 1e-4);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod bounds;
pub mod distributions;
pub mod error;
pub mod fmt;
pub mod grid;
pub mod linalg;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;

pub use bernstein::{BernsteinCertificate, MgfCheckReport, MgfInequality, MinimalK};
pub use bounds::{BoundInputs, BoundKind, ChernoffRegime, ChernoffSolution};
pub use distributions::{DistributionSpec, MomentMethod, MomentTable};
pub use error::{Error, Result};
pub use linalg::{NormStats, SigmaDiag, SquareMatrix};
pub use montecarlo::{KChoice, QuantileEstimate, SimConfig, TailEstimate};
pub use rng::RandomStream;
