//! Simulation and verification laboratory for exponential martingales of
//! local martingales with nonnegative jumps.
//!
//! The crate evaluates the Doléans-Dade exponential, optional and
//! predictable quadratic variations, a Novikov-type criterion functional on
//! the blend `α[M] + (1-α)<M>`, five supporting real-analysis inequalities,
//! and reproduces the Poisson first-passage counterexample showing that the
//! constant 1/2 in the criterion cannot be improved.
//!
//! | Module                    | Contents                                            |
//! |---------------------------|-----------------------------------------------------|
//! | [`model`]                 | `ModelSpec`, `SamplePath`, pathwise evaluation      |
//! | [`generators`]            | seeded, exactly reproducible path generation        |
//! | [`calculus`]              | `[M]`, `<M>`, the stochastic exponential, SDE check |
//! | [`inequalities`]          | margin checkers and adversarial scans               |
//! | [`criteria`]              | criterion functional, martingale test, Laplace oracle, counterexample |
//! | [`mc`]                    | deterministic parallel Monte Carlo plumbing         |
//! | [`report`]                | JSON/CSV report helpers                             |
//!
//! Everything is deterministic given a seed: replications draw from
//! counter-based RNG streams and all reductions run in a fixed order, so
//! results are bit-identical for any thread count.

// Validation deliberately writes `!(a < b)` so NaN parameters fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod criteria;
pub mod error;
pub mod generators;
pub mod inequalities;
pub mod mc;
pub mod model;
pub mod report;

pub use calculus::{
    log_stochastic_exponential, quadratic_variation, sde_residual_check, stochastic_exponential,
    VariationReport,
};
pub use error::{Error, Result};
pub use generators::{gen_path, gen_path_with_step, RngStream};
pub use mc::McEstimate;
pub use model::{Horizon, JumpEvent, JumpLaw, ModelSpec, SamplePath};
pub use report::{Report, ReportValue};
