//! Reproduction suites and report rendering.

mod report;
mod sweeps;

pub use report::{fmt_num, render, Cell, OutputFormat, Table, SCHEMA};
pub use sweeps::{
    bound_table, bounds_to_table, canonical_specs, default_ellipse_grid, default_rectangle_grid, default_triangles,
    ellipse_check, floor_check, moment_inequality_check, ordering_chain, ordering_rows, rectangle_sweep,
    rows_to_table, survival_check, symmetrization_check, triangle_sweep, OrderingChain, SweepRow, Verdict,
    BOUND_COLUMNS, DISPLAY_SERIES_CAP, RECTANGLE_FORM_TOL, SWEEP_COLUMNS,
};
