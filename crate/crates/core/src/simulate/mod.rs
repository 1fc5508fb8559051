//! Monte Carlo exit times and finite-difference solvers.

mod fd;
mod mc;

pub use fd::{fd_lambda1, fd_sup_mean_exit, fd_torsion_hierarchy, FdEigen, FdSup, Grid2D};
pub use mc::{
    coupled_exit_times, default_step, estimate_moment, estimate_moments, estimate_survival, estimate_sup_moment,
    interior_grid, sample_exit_time, sample_exit_times, sample_rng, MomentEstimate, SupMomentEstimate,
    SurvivalEstimate, MAX_STEPS,
};
