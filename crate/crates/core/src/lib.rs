//! Forward and inverse Dirichlet spectral problems for `−y″ + v(x) y` on [0, 1].
//!
//! * [`potential`]: grid functions, raw Fourier coefficients, Lᵖ norms.
//! * [`forward`]: Cauchy solutions, the characteristic function, eigenvalues and
//!   norming/normalizing constants.
//! * [`darboux`]: explicit transforms that move one eigenvalue or one norming constant.
//! * [`inverse`]: fixed-point reconstruction of potentials, the head/tail pipeline
//!   and conversion between normalizing and norming constants.
//! * [`validate`]: admissibility and consistency diagnostics.
//! * [`io`]: CSV and JSON file formats.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darboux;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod io;
pub mod potential;
pub mod validate;

pub use error::{Error, Result};
pub use potential::{GridFunction, TrigSeries};
