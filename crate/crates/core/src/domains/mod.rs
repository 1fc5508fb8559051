//! Canonical domains: geometry, text format and exact values.

mod exact;
mod spec;

pub use exact::{
    ball_torsion_polynomials, box_moment_quadrature, box_survival, lambda1_exact, mean_exit, moment_at,
    moment_exit_center, rectangle_display, rectangle_mean_exit_series, sech_series, shape_functional,
    square_center_mean_exit, survival_interval, survival_interval_at, torsion_moment, ExactKind, ExactValue,
    SERIES_CAP, SERIES_TOL,
};
pub use spec::{parse_halfspaces, parse_spec, parse_spec_with, DomainSpec, Face, Polytope, SPEC_GRAMMAR};
