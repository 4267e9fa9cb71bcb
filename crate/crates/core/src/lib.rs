//! Fractional variational problems with Caputo derivatives and free end-points.
//!
//! The crate minimizes functionals of the form
//!
//! ```text
//! J(y) = ∫_a^b L(x, y(x), ᶜD_{a+}^α y(x), ᶜD_{b-}^β y(x), y(a), y(b)) dx
//! ```
//!
//! where either end value may be fixed or free, by discretizing on a uniform grid
//! and minimizing over the node values. Candidates are then checked against the
//! fractional Euler–Lagrange equation and the natural boundary conditions that
//! carry the `∫ ∂₅L` / `∫ ∂₆L` terms coming from the end-point dependence of `L`.
//!
//! * [`operators`]: fractional integrals and derivatives as dense matrices.
//! * [`problem`]: Lagrangians, boundary specifications, the discrete functional.
//! * [`solver`]: the direct method and grid-refinement studies.
//! * [`residuals`]: optimality-condition residuals and a sampled convexity probe.
//! * [`cli`]: configuration, report files and exit codes of the `fracvar` binary.

pub mod cli;
pub mod error;
pub mod operators;
pub mod problem;
pub mod residuals;
pub mod solver;

pub use error::{Error, Result};
pub use operators::{
    gamma, FractionalOrder, Grid, OperatorKind, OperatorMatrix, SampledFunction, Side, SingularEnds,
};
pub use problem::{
    builtin_problem, eval_functional, fd_partial, Boundary, BoundarySpec, Lagrangian, Problem,
};
pub use residuals::{ResidualOptions, ResidualReport};
pub use solver::{discrete_gradient, solve_direct, Method, SolveOptions, SolveReport};
