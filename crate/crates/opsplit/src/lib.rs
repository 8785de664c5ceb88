//! Operator-splitting time integration on periodic grids.
//!
//! The crate composes three layers:
//!
//! - [`rational`]: rational approximations `r(z) ≈ e^z` and their evaluation on
//!   matrices through a partial-fraction expansion into shifted resolvent solves.
//! - [`spatial`]: the sampling/interpolation pair between periodic functions on
//!   `[0, 1)` and grid vectors, plus finite-difference generators.
//! - [`splitting`]: sequential, Strang and weighted compositions of two stage
//!   propagators, and the plain unsplit step.
//!
//! [`oracle`] holds the reference propagators (dense matrix exponential, Fourier
//! diagonalisation, closed-form PDE solutions) and [`analysis`] the experiment
//! harness measuring convergence, consistency and stability.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and threading
//! live in the `opsplit-std` companion crate.

#![no_std]

extern crate alloc;


pub mod analysis;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod rational;
pub mod spatial;
pub mod splitting;
pub mod tolerances;

pub use analysis::{
    chernoff_consistency, convergence_study, order_estimate, stability_scan, trotter_kato_check,
    AnalysisError, ConsistencyReport, ConvergenceReport, Harness, ProblemSpec, Reference, Serial,
    StabilityReport, StabilityTargets, TrotterKatoReport,
};
pub use linalg::Matrix;
pub use oracle::{exact_solution, expm, expm_fourier, ExactSolution, OracleError, ProblemTag};
pub use rational::{PartialFraction, RationalError, RationalFunction};
pub use spatial::{
    build_operator, make_grid_space, ContinuousFunction, DiscreteOperator, GridSpace, GridVector,
    OperatorKind, ProjectionPair, SpatialError, Stencil,
};
pub use splitting::{
    evolve, exact_split, step, SplitError, SplitProblem, SplitScheme, StageScheme, Variant,
};

/// Complex scalar used by the resolvent evaluations.
pub type C64 = num_complex::Complex<f64>;
