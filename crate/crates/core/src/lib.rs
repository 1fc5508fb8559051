//! Universal bounds, closed forms and numerical oracles for the spectral
//! exit-time shape functional
//!
//! ```text
//! G_{p,d}(D) = λ₁(D)^p · sup_x E_x[τ_D^p]
//! ```
//!
//! where λ₁ is the principal Dirichlet eigenvalue of −Δ on D and τ_D the
//! exit time of Brownian motion (generator ½Δ) started at x.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod domains;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod simulate;

pub use error::{Error, Result};
