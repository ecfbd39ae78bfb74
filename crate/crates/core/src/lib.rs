//! Quadratic common Lyapunov functions for families of Hurwitz matrices.
//!
//! Given matrices `A₁ … A_N` (or an entrywise interval box of them) and a
//! fixed `Q ≻ 0`, the solver looks for a symmetric `P` with
//! `PAᵢ + AᵢᵀP + Q ⪯ 0` for every member. Constraints are handled one at a
//! time: whenever the selected constraint is violated, `P` takes a gradient
//! step on a convex penalty of that constraint. Finite families are visited
//! round-robin; interval families are sampled at random.
//!
//! ```
//! use lyapgrad_core::{run, FiniteFamily, ProblemSpec, SolverConfig, Status};
//! use nalgebra::dmatrix;
//!
//! let family = FiniteFamily::new(vec![
//!     dmatrix![-1.0, 1.0; 0.0, -1.0],
//!     dmatrix![-1.0, 0.0; 1.0, -1.0],
//! ]).unwrap();
//! let spec = ProblemSpec::with_identity_q(family).unwrap();
//! let outcome = run(&spec, SolverConfig::default()).unwrap();
//! assert_eq!(outcome.status, Status::Solved);
//! ```

pub mod cli;
pub mod error;
pub mod families;
pub mod functionals;
pub mod solver;
pub mod symcone;
pub mod verify;

pub use error::{Error, Result};
pub use families::{
    enumerate_vertices, generate_triangular_interval, hurwitz_check, inner_ball_bound, sample_member, Family,
    FiniteFamily, IntervalFamily, ProblemSpec, TriangularIntervalParams,
};
pub use functionals::{f_eval, f_grad, v_eval, v_grad, FunctionalChoice, GradientReport};
pub use solver::{
    correction_step, degenerate_perturbation, descent_check, run, scheduler_next, step_size, InitialGuess, MemberId,
    Scheduler, Solver, SolverConfig, SolverOutcome, SolverState, Status, TraceRecord, Variant,
};
pub use symcone::{
    frobenius_norm, inner_product, nsd_part, psd_projection, sigma_max, sym_eigendecompose, EigenDecomposition,
    SymmetricMatrix,
};
pub use verify::{residual, verify_finite, verify_interval_via_vertices, Certificate, Residual};
