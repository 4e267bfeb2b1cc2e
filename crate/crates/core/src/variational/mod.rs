//! Variational solvers for `div u = f` on periodic grids.

mod fft;
mod hierarchy;
mod minimize;
pub mod prox;
mod spectral;
mod two_step;

pub use hierarchy::{
    estimate_eta, hierarchical_p1, hierarchical_p2, HierarchyConfig, HierarchyMode, HierarchyTrace,
    LevelRecord,
};
pub use minimize::{
    minimize_flambda, objective, residual_tv, SolverReport, VariationalConfig, CHECK_WINDOW,
    VANISHING_RESIDUAL,
};
pub use spectral::{helmholtz_solve, helmholtz_solve_with, HelmholtzOptions, HelmholtzSymbol};
pub use two_step::{two_step, two_step_with, TwoStepReport};
