//! Monte-Carlo likelihood-ratio (MC-LR) estimation of failure probabilities,
//! their gradients with respect to input-distribution parameters, and the
//! Fisher information of model inputs and outputs.
//!
//! The crate also certifies the information bounds on probability sensitivity
//!
//! ```text
//! ‖∂P_f/∂b‖² ≤ tr(F_y) ≤ tr(F_x)        |ΔP_f|² ≤ Δbᵀ F Δb = 2ΔH
//! ```
//!
//! numerically, both on Monte-Carlo case studies ([`models`]) and on small
//! discrete families that can be enumerated exactly ([`bounds::discrete_simplex_oracle`]).
//!
//! Layout:
//!
//! - [`distributions`]: Normal/Lognormal inputs, seeded sampling, score functions, analytic FIMs.
//! - [`mclr`]: probability, gradient, output density, output FIM and KL estimators.
//! - [`bounds`]: inequality checks and brute-force oracles.
//! - [`models`]: identity, oscillator and cantilever-beam forward maps.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod distributions;
mod error;
pub mod linalg;
pub mod mclr;
pub mod models;
pub mod reduce;
pub mod rng;

pub use bounds::{BoundContext, BoundReport};
pub use distributions::{Family, InputModel, MarginalSpec, ParamVector, ScoredSampleBatch};
pub use error::{Error, Result};
pub use linalg::{FisherMatrix, SampleMatrix};
pub use mclr::{Direction, FailureSpec, ForwardMap, Performance, SensitivityResult};
