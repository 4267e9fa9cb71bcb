//! Residuals of the fractional Euler–Lagrange equation and the natural boundary
//! conditions, plus a sampled check of the sufficiency inequality
//! `J(y₀ + h) ≥ J(y₀)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{
    left_rlfd, left_rlfi_complement, right_rlfd, right_rlfi_complement, SampledFunction,
    SingularEnds,
};
use crate::problem::{Boundary, Point, Problem};

/// Which interior nodes enter the Euler–Lagrange norm.
///
/// A node `i` is admissible when it is more than `edge_nodes` nodes away from
/// both ends and at least `edge_fraction · (b - a)` away from both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    pub edge_nodes: usize,
    pub edge_fraction: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            edge_nodes: 2,
            edge_fraction: 0.1,
        }
    }
}

impl ResidualOptions {
    /// Inclusive index range of admissible nodes on a grid with `n` intervals.
    /// Falls back to `1..=n-1` when the trimming leaves nothing.
    pub fn admissible(&self, n: usize) -> (usize, usize) {
        let by_fraction = (self.edge_fraction.max(0.0) * n as f64 - 1e-9)
            .ceil()
            .max(0.0) as usize;
        let lo = (self.edge_nodes + 1).max(by_fraction);
        if n >= 2 * lo {
            (lo, n - lo)
        } else {
            (1, n - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Node-wise Euler–Lagrange residual; both end nodes flagged singular.
    pub el_pointwise: SampledFunction,
    pub el_norm: f64,
    pub nbc_left: Option<f64>,
    pub nbc_right: Option<f64>,
}

struct Slots {
    d2: Vec<f64>,
    d3: SampledFunction,
    d4: SampledFunction,
    d5: Vec<f64>,
    d6: Vec<f64>,
}

fn slots(p: &Problem, y: &SampledFunction) -> Result<Slots> {
    p.grid().check_same(y.grid())?;
    let y = p.project(y.values())?;
    let points: Vec<Point> = p.points(&y);
    let grid = *p.grid();
    let col = |i| p.partial_column(&points, i);
    Ok(Slots {
        d2: col(2)?,
        d3: SampledFunction::new(grid, col(3)?)?,
        d4: SampledFunction::new(grid, col(4)?)?,
        d5: col(5)?,
        d6: col(6)?,
    })
}

/// `∂₂L + D_{b-}^α ∂₃L + D_{a+}^β ∂₄L` at every node, Riemann–Liouville
/// derivatives applied to the node sequences of the partials.
pub fn euler_lagrange_residual(p: &Problem, y: &SampledFunction) -> Result<SampledFunction> {
    let s = slots(p, y)?;
    Ok(el_from_slots(p, &s))
}

fn el_from_slots(p: &Problem, s: &Slots) -> SampledFunction {
    let right = right_rlfd(&s.d3, p.alpha());
    let left = left_rlfd(&s.d4, p.beta());
    let values =
        s.d2.iter()
            .zip(right.values())
            .zip(left.values())
            .map(|((a, b), c)| a + b + c)
            .collect();
    SampledFunction::from_raw(*p.grid(), values, SingularEnds::BOTH)
}

fn left_bracket(p: &Problem, s: &Slots) -> f64 {
    right_rlfi_complement(&s.d3, p.alpha()).first() - left_rlfi_complement(&s.d4, p.beta()).first()
}

fn right_bracket(p: &Problem, s: &Slots) -> f64 {
    left_rlfi_complement(&s.d4, p.beta()).last() - right_rlfi_complement(&s.d3, p.alpha()).last()
}

fn require_free(side: &str, b: Boundary) -> Result<()> {
    match b {
        Boundary::Free => Ok(()),
        Boundary::Fixed(_) => Err(Error::Usage(format!(
            "natural boundary condition requested at the fixed {side} end"
        ))),
    }
}

/// `|∫ ∂₅L − [I_{b-}^{1−α} ∂₃L − I_{a+}^{1−β} ∂₄L](a)|`.
pub fn natural_bc_left_residual(p: &Problem, y: &SampledFunction) -> Result<f64> {
    require_free("left", p.boundary().left)?;
    let s = slots(p, y)?;
    Ok((p.grid().integrate(&s.d5)? - left_bracket(p, &s)).abs())
}

/// `|∫ ∂₆L − [I_{a+}^{1−β} ∂₄L − I_{b-}^{1−α} ∂₃L](b)|`.
pub fn natural_bc_right_residual(p: &Problem, y: &SampledFunction) -> Result<f64> {
    require_free("right", p.boundary().right)?;
    let s = slots(p, y)?;
    Ok((p.grid().integrate(&s.d6)? - right_bracket(p, &s)).abs())
}

fn report_from_slots(
    p: &Problem,
    s: &Slots,
    opts: &ResidualOptions,
    end_terms: (f64, f64),
) -> ResidualReport {
    let el = el_from_slots(p, s);
    let (lo, hi) = opts.admissible(p.grid().n());
    let el_norm = el.max_abs_between(lo, hi);
    let bc = p.boundary();
    ResidualReport {
        el_pointwise: el,
        el_norm,
        nbc_left: bc
            .left
            .is_free()
            .then(|| (end_terms.0 - left_bracket(p, s)).abs()),
        nbc_right: bc
            .right
            .is_free()
            .then(|| (end_terms.1 - right_bracket(p, s)).abs()),
    }
}

pub fn residual_report(
    p: &Problem,
    y: &SampledFunction,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    let s = slots(p, y)?;
    let terms = (p.grid().integrate(&s.d5)?, p.grid().integrate(&s.d6)?);
    Ok(report_from_slots(p, &s, opts, terms))
}

/// Residuals for Lagrangians that do not depend on `y(a)`, `y(b)`: the natural
/// conditions reduce to the bracket terms alone.
pub fn verify_against_corollary_agrawal(
    p: &Problem,
    y: &SampledFunction,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    let s = slots(p, y)?;
    for (k, col) in [(5, &s.d5), (6, &s.d6)] {
        if let Some(i) = col.iter().position(|&v| v != 0.0) {
            return Err(Error::Precondition(format!(
                "∂{k}L = {} at node {i}; the Lagrangian depends on an end value",
                col[i]
            )));
        }
    }
    Ok(report_from_slots(p, &s, opts, (0.0, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityProbe {
    pub all_nonneg: bool,
    /// Smallest `J(y₀ + h) − J(y₀)` seen; `+∞` when no trial ran.
    pub min_gap: f64,
    pub tolerance: f64,
}

/// Samples `J(y₀ + h) − J(y₀)` over random cubic perturbations in
/// `s = (x − a)/(b − a)` with `max |h| = magnitude`. Perturbations vanish at
/// fixed ends.
pub fn convexity_probe(
    p: &Problem,
    y0: &SampledFunction,
    trials: usize,
    magnitude: f64,
    seed: u64,
) -> Result<ConvexityProbe> {
    p.grid().check_same(y0.grid())?;
    if !(magnitude.is_finite() && magnitude > 0.0) {
        return Err(Error::Usage(format!(
            "magnitude must be positive, got {magnitude}"
        )));
    }
    let y0 = p.project(y0.values())?;
    let j0 = p.functional_unchecked(&y0)?;
    let tolerance = 1e-9 * j0.abs().max(1.0);
    let grid = *p.grid();
    let bc = p.boundary();
    let shape: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let s = (x - grid.a()) / grid.length();
            let mut w = 1.0;
            if !bc.left.is_free() {
                w *= s;
            }
            if !bc.right.is_free() {
                w *= 1.0 - s;
            }
            w
        })
        .collect();
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_gap = f64::INFINITY;
    let mut done = 0;
    while done < trials {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let mut h: Vec<f64> = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                shape[i] * (c[0] + s * (c[1] + s * (c[2] + s * c[3])))
            })
            .collect();
        let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            continue;
        }
        for v in &mut h {
            *v *= magnitude / peak;
        }
        if !bc.left.is_free() {
            h[0] = 0.0;
        }
        if !bc.right.is_free() {
            h[n] = 0.0;
        }
        let y: Vec<f64> = y0.iter().zip(&h).map(|(a, b)| a + b).collect();
        let gap = p.functional_unchecked(&y)? - j0;
        min_gap = min_gap.min(gap);
        done += 1;
    }
    Ok(ConvexityProbe {
        all_nonneg: min_gap >= -tolerance,
        min_gap,
        tolerance,
    })
}
