//! Order conditions, exact positivity certificates and a reference
//! integrator for commutator-free exponential schemes.
//!
//! A scheme advances `u' = A(t) u` by
//! `u_{n+1} = e^{τ B_J} ⋯ e^{τ B_1} u_n` with `B_j = Σ_k a_{jk} A(t_n + c_k τ)`.
//! For parabolic problems every exponential must move forward in time,
//! `b_j = Σ_k a_{jk} > 0`. The [`certify`] module shows, weight vector by
//! weight vector and in exact arithmetic, that such schemes cannot reach
//! order five.
#![no_std]
// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod certify;
pub mod conditions;
pub mod engine;
pub mod linalg;
pub mod scalar;
pub mod scheme;
pub mod search;
pub mod taylor;

pub use conditions::{order_achieved, quadric_residuals, residuals_order5, ResidualVector};
pub use scalar::{Rational, Scalar};
pub use scheme::{derive_coefficients, validate_scheme, DerivedCoefficients, Scheme, ValidationReport};
