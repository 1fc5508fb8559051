//! Special functions, quadrature, root finding and minimization.

mod bessel;
mod func;
mod gamma;
mod quad;
mod roots;

pub use bessel::{bessel_j0, first_bessel_zero};
pub use func::RealFn1D;
pub use gamma::{
    ln_upper_incomplete_gamma, log_gamma, scaled_upper_incomplete_gamma, upper_incomplete_gamma,
};
pub(crate) use gamma::{ln_gamma_pos, normal_sf};
pub use quad::{integrate, QuadratureResult, Upper};
pub use roots::{find_root, minimize_1d, Minimum};

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// j₀, computed once.
pub fn j0_zero() -> f64 {
    static J0: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *J0.get_or_init(first_bessel_zero)
}
