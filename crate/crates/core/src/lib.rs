//! Boosted DC algorithm (BDCA) and classical DCA for quadratic programs over
//! polyhedra.
//!
//! The objective `φ(x) = ½⟨Qx,x⟩ + ⟨q,x⟩` is split as `g − h` with
//! `g(x) = σ/2‖x‖² + ⟨q,x⟩` and `h(x) = ½⟨(σI − Q)x,x⟩`, so every DCA
//! subproblem is a Euclidean projection onto the feasible set. BDCA adds a
//! backtracking line search along `d_k = y_k − x_k` whenever that direction is
//! feasible at the DCA point `y_k`.
//!
//! ```
//! use bdca::{ConstraintSet, QuadraticDcProblem, SolverConfig, SymmetricMatrix, run_bdca};
//!
//! let q = SymmetricMatrix::diagonal(&[1.0, -1.0]);
//! let box2 = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
//! let p = QuadraticDcProblem::build(q, vec![0.3, 0.2], box2, 0.05).unwrap();
//! let res = run_bdca(&p, &[0.0, 0.0], &SolverConfig::default()).unwrap();
//! assert!(res.kkt_residual() < 1e-6);
//! ```

pub mod applications;
pub mod error;
pub mod experiment;
pub mod feasible;
pub mod io;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod par;
pub mod solver;

pub use applications::{
    cycle_adjacency, horn_family, random_orthant_ball_start, random_tr_instance, solve_tr,
    test_copositivity, CopositivityVerdict, TrInstance, VerdictTag,
};
pub use error::{Error, Result};
pub use feasible::{ActiveSet, ConstraintId, ConstraintSet};
pub use kkt::{kkt_residual, KktReport};
pub use model::{
    estimate_lambda_max, QuadraticDcProblem, SolverConfig, SpectralEstimate, StepRule,
    SymmetricMatrix,
};
pub use solver::{
    adaptive_trial_step, dca_step, line_search, run_bdca, run_dca, solve, Algorithm,
    IterationRecord, SolveResult, Status, StepSizeState,
};
