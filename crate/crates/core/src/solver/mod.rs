//! Axisymmetric finite-element discretisation of the weighted problem on a
//! truncated quarter plane, the inf-sup descent and its diagnostics.

pub mod diagnostics;
pub mod fem;
pub mod field;
pub mod functional;
pub mod grid;
pub mod mountain_pass;

pub use diagnostics::{
    gaussian_rayleigh_quotient, hardy_check, hardy_check_exact, nonexistence_certificate,
    pohozaev_report, rayleigh_min, rayleigh_min_on, HardyCheck, NonexistenceCertificate,
    PohozaevReport, PohozaevResiduals, RayleighMin, Verdict,
};
pub use fem::Discretization;
pub use field::{read_checkpoint, write_checkpoint, AxisymField};
pub use functional::{
    functional_gradient, functional_value, gradient, sup_fiber, totals, truncated_value,
    Nonlinearity, Totals,
};
pub use grid::Grid;
pub use mountain_pass::{
    descend, initial_direction, mountain_pass_solve, two_grid_solve, SolveResult, SolveStatus,
    SolverConfig, TwoGridReport,
};
