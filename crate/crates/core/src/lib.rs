//! Certified brackets for spectral norms of symmetric tensors and
//! homogeneous polynomials.
//!
//! The spectral norm of a real symmetric `d`-tensor equals the maximum of
//! the absolute value of the induced homogeneous polynomial on the unit
//! sphere, which is NP-hard to compute for `d ≥ 3`. This crate computes
//! certified *upper* bounds from several convergent sequences and a
//! heuristic *lower* bound, and assembles them into a verified bracket
//! `[lower, upper]`:
//!
//! - the power sequence `‖f^k‖_HS^{1/k}` ([`bounds::rho1_bounds`]),
//! - the gradient-map iterate sequence `‖F∘…∘F‖_HS^{(p-1)/(p^k-1)}`
//!   ([`bounds::rho2_bounds`]),
//! - a quadratic-form bound for 3-tensors ([`bounds::matrix_bound_d3`]),
//! - a sum-of-squares sphere bound for symmetric `d ≥ 3` tensors
//!   ([`bounds::tau_tilde_bound`]),
//! - Collatz–Wielandt quotients of the entrywise absolute tensor
//!   ([`bounds::collatz_wielandt_bound`]),
//! - multistart power-method lower bounds ([`oracle`]).
//!
//! Polynomials are sparse maps from exponent multi-indices to monomial
//! coefficients ([`poly::HomoPoly`]); tensors are dense row-major arrays
//! ([`tensor::DenseTensor`]). The two representations are linked by
//! [`tensor::poly_to_tensor`] / [`tensor::tensor_to_poly`].

pub mod bounds;
mod error;
pub mod oracle;
pub mod poly;
mod serialize;
pub mod tensor;
mod util;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on stored terms per polynomial during products and
/// compositions. Exceeding it is reported as [`Error::TermBudgetExceeded`]
/// rather than silently pruning coefficients.
pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;
