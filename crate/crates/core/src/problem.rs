//! Variational problems: the Lagrangian, end-point conditions and the discrete
//! functional.
//!
//! A Lagrangian is evaluated at a point `(x, y, z, t, u, v)` where `z` is the left
//! Caputo derivative of order α, `t` the right Caputo derivative of order β, and
//! `u = y(a)`, `v = y(b)`. Partial derivatives are numbered 1..=6 in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::operators::{FractionalOrder, Grid, OperatorKind, OperatorMatrix, SampledFunction};

/// `(x, y, z, t, u, v)`.
pub type Point = [f64; 6];

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Named real parameters of a registry problem.
pub type Params = BTreeMap<String, f64>;

/// Tolerance above which a fixed end value in the input is reported rather than
/// silently projected.
pub const FIXED_VALUE_TOLERANCE: f64 = 1e-12;

#[derive(Clone)]
pub struct Lagrangian {
    eval: ScalarFn,
    partials: [Option<ScalarFn>; 6],
    smoothness_declared: bool,
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let analytic: Vec<usize> = (1..=6)
            .filter(|&i| self.partials[i - 1].is_some())
            .collect();
        f.debug_struct("Lagrangian")
            .field("analytic_partials", &analytic)
            .field("smoothness_declared", &self.smoothness_declared)
            .finish()
    }
}

fn check_index(i: usize) -> Result<()> {
    if (1..=6).contains(&i) {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "partial index must be in 1..=6, got {i}"
        )))
    }
}

impl Lagrangian {
    pub fn new(eval: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            partials: Default::default(),
            smoothness_declared: false,
        }
    }

    /// Attaches the analytic partial with respect to argument `i` (1-based).
    ///
    /// # Panics
    /// If `i` is not in `1..=6`.
    pub fn with_partial(
        mut self,
        i: usize,
        partial: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(
            (1..=6).contains(&i),
            "partial index must be in 1..=6, got {i}"
        );
        self.partials[i - 1] = Some(Arc::new(partial));
        self
    }

    pub fn declare_smooth(mut self) -> Self {
        self.smoothness_declared = true;
        self
    }

    pub fn smoothness_declared(&self) -> bool {
        self.smoothness_declared
    }

    pub fn eval(&self, p: &Point) -> f64 {
        (self.eval)(p)
    }

    pub fn has_analytic_partial(&self, i: usize) -> bool {
        (1..=6).contains(&i) && self.partials[i - 1].is_some()
    }

    /// ∂ᵢL at `p`: the analytic partial when attached, otherwise a central difference.
    pub fn partial(&self, i: usize, p: &Point) -> Result<f64> {
        check_index(i)?;
        match &self.partials[i - 1] {
            Some(d) => {
                let v = d(p);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation {
                        node: None,
                        what: format!("analytic partial {i} is not finite at {p:?}"),
                    })
                }
            }
            None => self.central_difference(i, p),
        }
    }

    /// Central difference in argument `i` with step `cbrt(ε) · max(1, |pᵢ|)`.
    pub fn central_difference(&self, i: usize, p: &Point) -> Result<f64> {
        check_index(i)?;
        let k = i - 1;
        let step = f64::EPSILON.cbrt() * p[k].abs().max(1.0);
        let mut hi = *p;
        let mut lo = *p;
        hi[k] += step;
        lo[k] -= step;
        let (fh, fl) = (self.eval(&hi), self.eval(&lo));
        if !fh.is_finite() || !fl.is_finite() {
            return Err(Error::Evaluation {
                node: None,
                what: format!("non-finite value while differencing argument {i} at {p:?}"),
            });
        }
        Ok((fh - fl) / (hi[k] - lo[k]))
    }
}

/// ∂ᵢL at `point`; analytic when provided, central difference otherwise.
pub fn fd_partial(lag: &Lagrangian, i: usize, point: &Point) -> Result<f64> {
    lag.partial(i, point)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Fixed(f64),
    Free,
}

impl Boundary {
    pub fn is_free(self) -> bool {
        matches!(self, Boundary::Free)
    }

    pub fn fixed_value(self) -> Option<f64> {
        match self {
            Boundary::Fixed(v) => Some(v),
            Boundary::Free => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub left: Boundary,
    pub right: Boundary,
}

impl BoundarySpec {
    pub const FREE: BoundarySpec = BoundarySpec {
        left: Boundary::Free,
        right: Boundary::Free,
    };

    pub fn fixed(ya: f64, yb: f64) -> Self {
        Self {
            left: Boundary::Fixed(ya),
            right: Boundary::Fixed(yb),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    lagrangian: Lagrangian,
    alpha: FractionalOrder,
    beta: FractionalOrder,
    boundary: BoundarySpec,
    grid: Grid,
    caputo: OnceLock<Arc<(OperatorMatrix, OperatorMatrix)>>,
}

impl Problem {
    pub fn new(
        lagrangian: Lagrangian,
        alpha: FractionalOrder,
        beta: FractionalOrder,
        boundary: BoundarySpec,
        grid: Grid,
    ) -> Result<Self> {
        for (side, b) in [("left", boundary.left), ("right", boundary.right)] {
            if let Boundary::Fixed(v) = b {
                if !v.is_finite() {
                    return Err(Error::Config(format!(
                        "{side} fixed value must be finite, got {v}"
                    )));
                }
            }
        }
        Ok(Self {
            lagrangian,
            alpha,
            beta,
            boundary,
            grid,
            caputo: OnceLock::new(),
        })
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn beta(&self) -> FractionalOrder {
        self.beta
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn with_boundary(&self, boundary: BoundarySpec) -> Result<Self> {
        Self::new(
            self.lagrangian.clone(),
            self.alpha,
            self.beta,
            boundary,
            self.grid,
        )
    }

    pub fn with_grid(&self, grid: Grid) -> Self {
        Self {
            grid,
            caputo: OnceLock::new(),
            ..self.clone()
        }
    }

    fn caputo(&self) -> &(OperatorMatrix, OperatorMatrix) {
        self.caputo.get_or_init(|| {
            Arc::new((
                OperatorMatrix::new(OperatorKind::LeftCfd, self.alpha, self.grid),
                OperatorMatrix::new(OperatorKind::RightCfd, self.beta, self.grid),
            ))
        })
    }

    /// Left Caputo matrix of order α on the problem grid.
    pub fn left_caputo(&self) -> &OperatorMatrix {
        &self.caputo().0
    }

    /// Right Caputo matrix of order β on the problem grid.
    pub fn right_caputo(&self) -> &OperatorMatrix {
        &self.caputo().1
    }

    /// Overwrites fixed end values after checking the input agrees with them.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.grid.len() {
            return Err(Error::Shape(format!(
                "expected {} node values, got {}",
                self.grid.len(),
                y.len()
            )));
        }
        let mut out = y.to_vec();
        let n = self.grid.n();
        for (node, b) in [(0, self.boundary.left), (n, self.boundary.right)] {
            if let Boundary::Fixed(v) = b {
                if (y[node] - v).abs() > FIXED_VALUE_TOLERANCE {
                    return Err(Error::Constraint {
                        node,
                        expected: v,
                        found: y[node],
                    });
                }
                out[node] = v;
            }
        }
        Ok(out)
    }

    /// Sets fixed end values without checking the input.
    pub(crate) fn project_unchecked(&self, y: &mut [f64]) {
        if let Boundary::Fixed(v) = self.boundary.left {
            y[0] = v;
        }
        if let Boundary::Fixed(v) = self.boundary.right {
            y[self.grid.n()] = v;
        }
    }

    /// Lagrangian arguments at every node for already-projected values.
    pub(crate) fn points(&self, y: &[f64]) -> Vec<Point> {
        let (z, _) = self.left_caputo().apply_slice(y);
        let (t, _) = self.right_caputo().apply_slice(y);
        let (u, v) = (y[0], y[self.grid.n()]);
        (0..self.grid.len())
            .map(|i| [self.grid.x(i), y[i], z[i], t[i], u, v])
            .collect()
    }

    /// ∂ᵢL at every point; evaluation errors carry the node index.
    pub(crate) fn partial_column(&self, points: &[Point], i: usize) -> Result<Vec<f64>> {
        points
            .iter()
            .enumerate()
            .map(|(node, p)| {
                self.lagrangian.partial(i, p).map_err(|e| match e {
                    Error::Evaluation { what, .. } => Error::Evaluation {
                        node: Some(node),
                        what,
                    },
                    other => other,
                })
            })
            .collect()
    }

    pub(crate) fn functional_unchecked(&self, y: &[f64]) -> Result<f64> {
        let vals = self
            .points(y)
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let l = self.lagrangian.eval(p);
                if l.is_finite() {
                    Ok(l)
                } else {
                    Err(Error::Evaluation {
                        node: Some(i),
                        what: format!("L = {l}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        self.grid.integrate(&vals)
    }
}

/// Trapezoid quadrature of `L` along `y` with Caputo slots from the problem's
/// operators.
pub fn eval_functional(p: &Problem, y: &SampledFunction) -> Result<f64> {
    p.grid.check_same(y.grid())?;
    let y = p.project(y.values())?;
    p.functional_unchecked(&y)
}

pub const REGISTRY: [&str; 3] = [
    "caputo_quadratic_free_endpoints",
    "classical_limit",
    "fixed_endpoint_quadratic",
];

struct ParamReader<'a> {
    name: &'a str,
    params: &'a Params,
}

impl ParamReader<'_> {
    fn real(&self, key: &str) -> Result<f64> {
        let v = *self.params.get(key).ok_or_else(|| {
            Error::Config(format!(
                "problem '{}' requires parameter '{key}'",
                self.name
            ))
        })?;
        if !v.is_finite() {
            return Err(Error::Config(format!(
                "parameter '{key}' must be finite, got {v}"
            )));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.real(key)?;
        if v <= 0.0 {
            return Err(Error::Config(format!(
                "parameter '{key}' must be positive, got {v}"
            )));
        }
        Ok(v)
    }

    fn order(&self, key: &str) -> Result<FractionalOrder> {
        FractionalOrder::new(self.real(key)?)
            .map_err(|e| Error::Config(format!("parameter '{key}': {e}")))
    }

    fn grid(&self) -> Result<Grid> {
        let n = self.real("n")?;
        if n.fract() != 0.0 || n < 2.0 || n > u32::MAX as f64 {
            return Err(Error::Config(format!(
                "parameter 'n' must be an integer >= 2, got {n}"
            )));
        }
        Grid::new(self.real("a")?, self.real("b")?, n as usize)
            .map_err(|e| Error::Config(e.to_string()))
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!(
                "unknown parameter '{k}' for problem '{}' (expected {})",
                self.name,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

/// `½ [z² + γ u² + λ (v - 1)²]`.
pub fn quadratic_endpoint_lagrangian(gamma: f64, lambda: f64) -> Lagrangian {
    Lagrangian::new(move |p| {
        0.5 * (p[2] * p[2] + gamma * p[4] * p[4] + lambda * (p[5] - 1.0).powi(2))
    })
    .with_partial(1, |_| 0.0)
    .with_partial(2, |_| 0.0)
    .with_partial(3, |p| p[2])
    .with_partial(4, |_| 0.0)
    .with_partial(5, move |p| gamma * p[4])
    .with_partial(6, move |p| lambda * (p[5] - 1.0))
    .declare_smooth()
}

/// `½ z²`.
pub fn caputo_energy_lagrangian() -> Lagrangian {
    Lagrangian::new(|p| 0.5 * p[2] * p[2])
        .with_partial(1, |_| 0.0)
        .with_partial(2, |_| 0.0)
        .with_partial(3, |p| p[2])
        .with_partial(4, |_| 0.0)
        .with_partial(5, |_| 0.0)
        .with_partial(6, |_| 0.0)
        .declare_smooth()
}

/// Builds a registry problem from named parameters.
///
/// | name | Lagrangian | ends | parameters |
/// |------|-----------|------|------------|
/// | `caputo_quadratic_free_endpoints` | `½[z² + γu² + λ(v−1)²]` | free/free | gamma, lambda, a, b, n, alpha, beta |
/// | `classical_limit` | same, α = β = 1 | free/free | gamma, lambda, a, b, n |
/// | `fixed_endpoint_quadratic` | `½z²` | fixed/fixed | a, b, n, alpha, beta, ya, yb |
pub fn builtin_problem(name: &str, params: &Params) -> Result<Problem> {
    let r = ParamReader { name, params };
    match name {
        "caputo_quadratic_free_endpoints" => {
            r.only(&["gamma", "lambda", "a", "b", "n", "alpha", "beta"])?;
            let (gamma, lambda) = (r.positive("gamma")?, r.positive("lambda")?);
            Problem::new(
                quadratic_endpoint_lagrangian(gamma, lambda),
                r.order("alpha")?,
                r.order("beta")?,
                BoundarySpec::FREE,
                r.grid()?,
            )
        }
        "classical_limit" => {
            r.only(&["gamma", "lambda", "a", "b", "n", "alpha", "beta"])?;
            for key in ["alpha", "beta"] {
                if let Some(&v) = params.get(key) {
                    if v != 1.0 {
                        return Err(Error::Config(format!(
                            "problem 'classical_limit' fixes {key} = 1, got {v}"
                        )));
                    }
                }
            }
            let (gamma, lambda) = (r.positive("gamma")?, r.positive("lambda")?);
            Problem::new(
                quadratic_endpoint_lagrangian(gamma, lambda),
                FractionalOrder::CLASSICAL,
                FractionalOrder::CLASSICAL,
                BoundarySpec::FREE,
                r.grid()?,
            )
        }
        "fixed_endpoint_quadratic" => {
            r.only(&["a", "b", "n", "alpha", "beta", "ya", "yb"])?;
            Problem::new(
                caputo_energy_lagrangian(),
                r.order("alpha")?,
                r.order("beta")?,
                BoundarySpec::fixed(r.real("ya")?, r.real("yb")?),
                r.grid()?,
            )
        }
        other => Err(Error::Registry(other.to_string())),
    }
}

/// Affine minimizer of the classical (order-one) quadratic end-point problem on
/// `[a, b]`, sampled on `grid`.
///
/// On `[0, 1]` this is `(γλ x + λ) / (γλ + λ + γ)`.
pub fn classical_candidate(gamma: f64, lambda: f64, grid: Grid) -> SampledFunction {
    let len = grid.length();
    let slope = gamma * lambda * len / (gamma * lambda * len * len + lambda + gamma);
    let ya = slope / (gamma * len);
    let a = grid.a();
    SampledFunction::from_fn(grid, |x| ya + slope * (x - a))
        .expect("affine function of finite parameters is finite")
}
