//! Discrete fractional integrals and derivatives on uniform grids.
//!
//! | operator | scheme | order 1 |
//! |----------|--------|---------|
//! | left/right Riemann–Liouville integral | product trapezoid | cumulative trapezoid |
//! | left/right Caputo derivative | L1 | ±d/dx, summation-by-parts differences |
//! | left/right Riemann–Liouville derivative | Caputo + end-point term | same as Caputo |
//!
//! Right-sided operators are defined through reflection `x ↦ a + b - x`, so
//! `right_op(f)` equals `left_op(f.reflected()).reflected()` exactly.

mod gamma;
mod grid;
mod ibp;
mod matrix;
mod sampled;

pub use gamma::gamma;
pub use grid::Grid;
pub use ibp::{ibp_residual_caputo, ibp_residual_rlfi};
pub use matrix::{OperatorKind, OperatorMatrix};
pub use sampled::{SampledFunction, SingularEnds};

use crate::error::{Error, Result};

/// Order of a fractional operator, `0 < value <= 1`.
///
/// The value 1 selects the classical counterpart of every operator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const CLASSICAL: FractionalOrder = FractionalOrder(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::Order(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `1 - value`, or `None` when that is zero (the identity operator).
    pub fn complement(self) -> Option<FractionalOrder> {
        if self.is_classical() {
            None
        } else {
            Some(FractionalOrder(1.0 - self.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn operator_matrix(kind: OperatorKind, alpha: FractionalOrder, grid: Grid) -> OperatorMatrix {
    OperatorMatrix::new(kind, alpha, grid)
}

fn apply(kind: OperatorKind, f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    OperatorMatrix::new(kind, alpha, *f.grid())
        .apply(f)
        .expect("matrix is built on the input's grid")
}

/// `(1/Γ(α)) ∫_a^x (x - t)^(α-1) f(t) dt`; value at `a` is zero.
pub fn left_rlfi(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::LeftRlfi, f, alpha)
}

/// `(1/Γ(α)) ∫_x^b (t - x)^(α-1) f(t) dt`; value at `b` is zero.
pub fn right_rlfi(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::RightRlfi, f, alpha)
}

pub fn left_cfd(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::LeftCfd, f, alpha)
}

pub fn right_cfd(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::RightCfd, f, alpha)
}

/// Left Riemann–Liouville derivative. Node 0 is flagged singular when `f(a) != 0`.
pub fn left_rlfd(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::LeftRlfd, f, alpha)
}

/// Right Riemann–Liouville derivative. Node `n` is flagged singular when `f(b) != 0`.
pub fn right_rlfd(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    apply(OperatorKind::RightRlfd, f, alpha)
}

/// Left fractional integral of order `1 - alpha`; the identity when `alpha = 1`.
pub fn left_rlfi_complement(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    match alpha.complement() {
        Some(c) => left_rlfi(f, c),
        None => f.clone(),
    }
}

/// Right fractional integral of order `1 - alpha`; the identity when `alpha = 1`.
pub fn right_rlfi_complement(f: &SampledFunction, alpha: FractionalOrder) -> SampledFunction {
    match alpha.complement() {
        Some(c) => right_rlfi(f, c),
        None => f.clone(),
    }
}
