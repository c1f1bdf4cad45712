//! Exact differential-polynomial algebra.
//!
//! Polynomials with rational coefficients in the jets `∂^k a_j`, `∂^k w_i`
//! of the free and W-fields, and in the fiber coordinates `u_m` of the big
//! cell. The total derivative `∂` raises jet order; `u_m` are independent
//! of `z` and only admit ordinary partials.

mod jet;
mod poly;
mod text;

use thiserror::Error;

pub use jet::{Family, JetVar, JET_ORDER_GUARD};
pub use poly::{DiffPoly, Exponents, JetAssignment, Monomial};
pub use text::JsonTerm;


#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffAlgError {
    #[error("total derivative is undefined on coordinate variable {0}")]
    CoordinateInDerivative(JetVar),
    #[error("no value assigned to {0}")]
    MissingAssignment(JetVar),
    #[error("jet order would exceed the guard of {guard}")]
    JetOrderExceeded { guard: u32 },
    #[error("invalid variable: {0}")]
    InvalidVariable(String),
    #[error("parse error: {0}")]
    Parse(String),
}
