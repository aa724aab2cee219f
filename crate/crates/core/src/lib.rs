//! Macroscopic node-model toolkit.
//!
//! Given a junction with incoming demands, outgoing supplies and turning
//! ratios, this crate computes flows with three allocation rules
//! ([`solvers`]), checks the holding-free condition ([`hfs`]), decides
//! Pareto optimality under strict coordinatewise dominance ([`pareto`]) and
//! describes the feasible polytope ([`geometry`]).
//!
//! All routines are generic over [`Scalar`]: exact [`Rational`] arithmetic is
//! the canonical mode, `f64` the approximate one. The crate is `no_std` and
//! only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod geometry;
pub mod hfs;
pub mod lp;
pub mod model;
pub mod pareto;
pub mod scalar;
pub mod solvers;

pub use geometry::{
    enumerate_vertices, intercept_form, line_halfspace_hit, merging_line, GeometryError, Intercept,
    Marker, ParametricLine, Polytope, Scene, Trace,
};
pub use hfs::{hfs_residual, is_hfs, HfsReport};
pub use model::{
    demo_problem, Diagnostic, FlowVector, HalfSpace, IncomingLink, ModelError, NodeProblem,
    OutgoingLink, Severity, SlackVector,
};
pub use pareto::{
    classify_frontier, dominates, is_pareto_optimal, oracle_is_pareto_optimal, DominanceProbe,
    FrontierSample, GridStep, ParetoError,
};
pub use scalar::{Rational, Scalar, Tolerance};
pub use solvers::{
    enumerate_flowmax_optima, solve_flowmax, solve_greedy, solve_inm, total_flow, MergingWeights,
    Permutation, SolveError, SolverResult,
};
