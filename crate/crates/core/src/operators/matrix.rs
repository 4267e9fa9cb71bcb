//! Dense matrix realizations of the six fractional operators.
//!
//! Every operator is assembled for the left (history from `a`) variant; right
//! variants are the index reflection `R[k][j] = L[n-k][n-j]`.
//!
//! Application splits the input into its value at the anchor node (node 0 for left
//! operators, node `n` for right ones) plus increments relative to it. Increments go
//! through the dense entries; the anchor value goes through the operator's closed-form
//! response to constants. This is the same linear map as the plain product with the
//! entries, but it makes Caputo operators annihilate constants exactly and reproduces
//! `c (x - a)^α / Γ(α + 1)` for the fractional integral of a constant.

use nalgebra::DMatrix;

use super::gamma::{gamma, recip_gamma};
use super::{FractionalOrder, Grid, SampledFunction, SingularEnds};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Left Riemann–Liouville integral, history from `a`.
    LeftRlfi,
    /// Right Riemann–Liouville integral, future up to `b`.
    RightRlfi,
    LeftRlfd,
    RightRlfd,
    /// Left Caputo derivative.
    LeftCfd,
    /// Right Caputo derivative.
    RightCfd,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::LeftRlfi,
        OperatorKind::RightRlfi,
        OperatorKind::LeftRlfd,
        OperatorKind::RightRlfd,
        OperatorKind::LeftCfd,
        OperatorKind::RightCfd,
    ];

    pub fn is_left(self) -> bool {
        matches!(
            self,
            OperatorKind::LeftRlfi | OperatorKind::LeftRlfd | OperatorKind::LeftCfd
        )
    }

    /// The left-sided operator whose reflection gives this one.
    fn left_counterpart(self) -> OperatorKind {
        match self {
            OperatorKind::RightRlfi => OperatorKind::LeftRlfi,
            OperatorKind::RightRlfd => OperatorKind::LeftRlfd,
            OperatorKind::RightCfd => OperatorKind::LeftCfd,
            k => k,
        }
    }
}

/// Γ at an argument known to be positive.
fn gamma_of(x: f64) -> f64 {
    gamma(x).expect("gamma argument is positive for orders in (0, 1]")
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    kind: OperatorKind,
    order: FractionalOrder,
    grid: Grid,
    /// Row-major `(n + 1) x (n + 1)`.
    entries: Vec<f64>,
    constant_response: Vec<f64>,
}

impl OperatorMatrix {
    pub fn new(kind: OperatorKind, order: FractionalOrder, grid: Grid) -> Self {
        let left = kind.left_counterpart();
        let (entries, response) = match left {
            OperatorKind::LeftRlfi => left_rlfi_weights(order, &grid),
            OperatorKind::LeftCfd => left_cfd_weights(order, &grid),
            OperatorKind::LeftRlfd => left_rlfd_weights(order, &grid),
            _ => unreachable!("left_counterpart returns a left kind"),
        };
        let (entries, constant_response) = if kind.is_left() {
            (entries, response)
        } else {
            let m = grid.len();
            let mut reflected = vec![0.0; m * m];
            for k in 0..m {
                for j in 0..m {
                    reflected[k * m + j] = entries[(m - 1 - k) * m + (m - 1 - j)];
                }
            }
            let mut r = response;
            r.reverse();
            (reflected, r)
        };
        Self {
            kind,
            order,
            grid,
            entries,
            constant_response,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.dim();
        &self.entries[row * m..(row + 1) * m]
    }

    /// Exact response of each row to the constant function 1.
    pub fn constant_response(&self) -> &[f64] {
        &self.constant_response
    }

    /// Node of the input whose value is routed through the constant response.
    fn anchor(&self) -> usize {
        if self.kind.is_left() {
            0
        } else {
            self.grid.n()
        }
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(f.grid())?;
        let (values, singular) = self.apply_slice(f.values());
        Ok(SampledFunction::from_raw(self.grid, values, singular))
    }

    /// Applies the operator to raw node values of the right length.
    pub(crate) fn apply_slice(&self, f: &[f64]) -> (Vec<f64>, SingularEnds) {
        let m = self.dim();
        debug_assert_eq!(f.len(), m);
        let anchor = self.anchor();
        let base = f[anchor];
        let increments: Vec<f64> = f.iter().map(|v| v - base).collect();
        // summation runs outward from the anchor so that a right operator and its
        // left reflection add identical terms in identical order
        let order: Vec<usize> = if anchor == 0 {
            (1..m).collect()
        } else {
            (0..m - 1).rev().collect()
        };
        let mut singular = SingularEnds::NONE;
        let out = (0..m)
            .map(|k| {
                let row = self.row(k);
                let mut s = 0.0;
                for &j in &order {
                    s += row[j] * increments[j];
                }
                if base != 0.0 {
                    let r = self.constant_response[k];
                    if !r.is_finite() {
                        if k == 0 {
                            singular.left = true;
                        } else {
                            singular.right = true;
                        }
                    }
                    s += r * base;
                }
                s
            })
            .collect();
        (out, singular)
    }

    /// `Mᵀ v` with the plain dense entries.
    pub fn transpose_apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        assert_eq!(v.len(), m, "transpose_apply length mismatch");
        let mut out = vec![0.0; m];
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 {
                continue;
            }
            for (o, e) in out.iter_mut().zip(self.row(k)) {
                *o += e * vk;
            }
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_row_slice(m, m, &self.entries)
    }
}

/// Product-trapezoid weights: the piecewise-linear interpolant of `f` integrated
/// exactly against `(x_k - t)^(α-1) / Γ(α)`. At α = 1 these are cumulative
/// trapezoid weights.
fn left_rlfi_weights(order: FractionalOrder, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let alpha = order.value();
    let m = grid.len();
    let h = grid.h();
    let scale = h.powf(alpha) / gamma_of(alpha + 2.0);
    let pow_a1: Vec<f64> = (0..=m).map(|i| (i as f64).powf(alpha + 1.0)).collect();
    // interior weight depends only on the distance d = k - j >= 1
    let inner: Vec<f64> = (0..m)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                pow_a1[d + 1] - 2.0 * pow_a1[d] + pow_a1[d - 1]
            }
        })
        .collect();
    let mut w = vec![0.0; m * m];
    for k in 1..m {
        let kf = k as f64;
        w[k * m] = scale * (pow_a1[k - 1] - (kf - 1.0 - alpha) * kf.powf(alpha));
        for j in 1..k {
            w[k * m + j] = scale * inner[k - j];
        }
        w[k * m + k] = scale;
    }
    let g1 = gamma_of(alpha + 1.0);
    let response = (0..m).map(|k| (k as f64 * h).powf(alpha) / g1).collect();
    (w, response)
}

/// L1 weights for α < 1, and a summation-by-parts first derivative at α = 1
/// (central differences inside, one-sided first-order closures at the two ends).
fn left_cfd_weights(order: FractionalOrder, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let m = grid.len();
    let n = grid.n();
    let h = grid.h();
    let mut w = vec![0.0; m * m];
    if order.is_classical() {
        w[0] = -1.0 / h;
        w[1] = 1.0 / h;
        for k in 1..n {
            w[k * m + k - 1] = -0.5 / h;
            w[k * m + k + 1] = 0.5 / h;
        }
        w[n * m + n - 1] = -1.0 / h;
        w[n * m + n] = 1.0 / h;
    } else {
        let alpha = order.value();
        let c = h.powf(-alpha) / gamma_of(2.0 - alpha);
        let pw: Vec<f64> = (0..=m).map(|i| (i as f64).powf(1.0 - alpha)).collect();
        let b: Vec<f64> = (0..m).map(|i| pw[i + 1] - pw[i]).collect();
        for k in 1..m {
            w[k * m] = -c * b[k - 1];
            for j in 1..k {
                w[k * m + j] = c * (b[k - j] - b[k - j - 1]);
            }
            w[k * m + k] = c * b[0];
        }
    }
    (w, vec![0.0; m])
}

/// Caputo weights plus the boundary term `f(a) (x - a)^(-α) / Γ(1 - α)` in column 0.
fn left_rlfd_weights(order: FractionalOrder, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let (mut w, _) = left_cfd_weights(order, grid);
    let m = grid.len();
    let alpha = order.value();
    let r = recip_gamma(1.0 - alpha);
    let response: Vec<f64> = if order.is_classical() {
        vec![0.0; m]
    } else {
        (0..m)
            .map(|k| {
                if k == 0 {
                    f64::INFINITY
                } else {
                    (k as f64 * grid.h()).powf(-alpha) * r
                }
            })
            .collect()
    };
    for k in 0..m {
        w[k * m] += response[k];
    }
    (w, response)
}
