//! Direct method: minimize the discrete functional over the node values, free
//! end values included, then evaluate the optimality residuals at the result.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{Grid, SampledFunction};
use crate::problem::{builtin_problem, classical_candidate, Boundary, Params, Point, Problem};
use crate::residuals::{residual_report, ResidualOptions, ResidualReport};

/// Search direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Damped Newton on the free nodes with a finite-difference Hessian of `L`.
    Newton,
    SteepestDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Bound on the infinity norm of the discrete gradient.
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub seed: u64,
    pub method: Method,
    /// Half-width of the uniform perturbation added to free nodes of the initial guess.
    pub perturbation: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-8,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            seed: 0,
            method: Method::Newton,
            perturbation: 1e-3,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("solver option {what}")));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad("grad_tol must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return bad("perturbation must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub minimizer: SampledFunction,
    pub j_value: f64,
    pub grad_norm: f64,
    pub el_residual_norm: f64,
    pub nbc_left_residual: Option<f64>,
    pub nbc_right_residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: ResidualReport,
}

const MIN_STEP: f64 = 1e-16;

struct Partials([Vec<f64>; 5]);

impl Partials {
    /// ∂₂L..∂₆L at every point.
    fn at(p: &Problem, points: &[Point]) -> Result<Self> {
        Ok(Self([
            p.partial_column(points, 2)?,
            p.partial_column(points, 3)?,
            p.partial_column(points, 4)?,
            p.partial_column(points, 5)?,
            p.partial_column(points, 6)?,
        ]))
    }
}

fn gradient_of(p: &Problem, y: &[f64]) -> Result<Vec<f64>> {
    let points = p.points(y);
    let Partials([d2, d3, d4, d5, d6]) = Partials::at(p, &points)?;
    let w = p.grid().trapezoid_weights();
    let weighted = |d: &[f64]| -> Vec<f64> { d.iter().zip(&w).map(|(a, b)| a * b).collect() };
    let mut g = weighted(&d2);
    for (gi, v) in g
        .iter_mut()
        .zip(p.left_caputo().transpose_apply(&weighted(&d3)))
    {
        *gi += v;
    }
    for (gi, v) in g
        .iter_mut()
        .zip(p.right_caputo().transpose_apply(&weighted(&d4)))
    {
        *gi += v;
    }
    let n = p.grid().n();
    g[0] += weighted(&d5).iter().sum::<f64>();
    g[n] += weighted(&d6).iter().sum::<f64>();
    let bc = p.boundary();
    if !bc.left.is_free() {
        g[0] = 0.0;
    }
    if !bc.right.is_free() {
        g[n] = 0.0;
    }
    Ok(g)
}

/// Exact gradient of the discrete functional with respect to the node values;
/// entries at fixed ends are zero.
pub fn discrete_gradient(p: &Problem, y: &SampledFunction) -> Result<Vec<f64>> {
    p.grid().check_same(y.grid())?;
    let y = p.project(y.values())?;
    gradient_of(p, &y)
}

enum Slot<'a> {
    Identity,
    Dense(&'a DMatrix<f64>),
    Pick(usize),
}

impl Slot<'_> {
    /// `Pᵀ d`.
    fn transpose_mul(&self, d: &[f64]) -> DVector<f64> {
        match self {
            Slot::Identity => DVector::from_column_slice(d),
            Slot::Dense(m) => m.tr_mul(&DVector::from_column_slice(d)),
            Slot::Pick(i) => {
                let mut v = DVector::zeros(d.len());
                v[*i] = d.iter().sum();
                v
            }
        }
    }
}

/// `H += Pₖᵀ diag(d) Pₗ`.
fn add_block(h: &mut DMatrix<f64>, pk: &Slot, pl: &Slot, d: &[f64]) {
    match (pk, pl) {
        (Slot::Pick(i), Slot::Pick(j)) => h[(*i, *j)] += d.iter().sum::<f64>(),
        (Slot::Pick(i), other) => {
            let r = other.transpose_mul(d);
            for (c, v) in r.iter().enumerate() {
                h[(*i, c)] += v;
            }
        }
        (other, Slot::Pick(j)) => {
            let c = other.transpose_mul(d);
            for (r, v) in c.iter().enumerate() {
                h[(r, *j)] += v;
            }
        }
        (Slot::Identity, Slot::Identity) => {
            for (i, v) in d.iter().enumerate() {
                h[(i, i)] += v;
            }
        }
        (Slot::Identity, Slot::Dense(m)) => {
            for (i, v) in d.iter().enumerate() {
                let row = m.row(i) * *v;
                let mut target = h.row_mut(i);
                target += row;
            }
        }
        (Slot::Dense(m), Slot::Identity) => {
            for (j, v) in d.iter().enumerate() {
                let col = m.row(j).transpose() * *v;
                let mut target = h.column_mut(j);
                target += col;
            }
        }
        (Slot::Dense(a), Slot::Dense(b)) => {
            let mut db = (*b).clone();
            for (i, v) in d.iter().enumerate() {
                db.row_mut(i).scale_mut(*v);
            }
            h.gemm_tr(1.0, a, &db, 1.0);
        }
    }
}

/// Central difference of ∂ₖL in argument `l`, both 1-based.
fn second_partial(p: &Problem, k: usize, l: usize, pt: &Point) -> Result<f64> {
    let lag = p.lagrangian();
    let idx = l - 1;
    let step = f64::EPSILON.cbrt() * pt[idx].abs().max(1.0);
    let mut hi = *pt;
    let mut lo = *pt;
    hi[idx] += step;
    lo[idx] -= step;
    Ok((lag.partial(k, &hi)? - lag.partial(k, &lo)?) / (hi[idx] - lo[idx]))
}

/// Hessian of the discrete functional with `L` replaced by its local quadratic
/// model at every node.
fn hessian(p: &Problem, y: &[f64], a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let points = p.points(y);
    let w = p.grid().trapezoid_weights();
    let m = y.len();
    let n = m - 1;
    let slots = [
        Slot::Identity,
        Slot::Dense(a),
        Slot::Dense(b),
        Slot::Pick(0),
        Slot::Pick(n),
    ];
    let mut second = vec![[[0.0; 5]; 5]; m];
    for (node, pt) in points.iter().enumerate() {
        for (k, row) in second[node].iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = second_partial(p, k + 2, l + 2, pt).map_err(|e| match e {
                    Error::Evaluation { what, .. } => Error::Evaluation {
                        node: Some(node),
                        what,
                    },
                    other => other,
                })?;
            }
        }
    }
    let mut h = DMatrix::zeros(m, m);
    for k in 0..5 {
        for l in 0..5 {
            let d: Vec<f64> = (0..m)
                .map(|i| w[i] * 0.5 * (second[i][k][l] + second[i][l][k]))
                .collect();
            if d.iter().any(|&v| v != 0.0) {
                add_block(&mut h, &slots[k], &slots[l], &d);
            }
        }
    }
    Ok(h)
}

/// Solves the shifted Newton system on the free nodes; `None` when no shift
/// makes it positive definite.
fn newton_direction(h: &DMatrix<f64>, g: &[f64], free: &[usize]) -> Option<Vec<f64>> {
    let k = free.len();
    let hf = DMatrix::from_fn(k, k, |i, j| h[(free[i], free[j])]);
    let rhs = DVector::from_fn(k, |i, _| -g[free[i]]);
    let scale = hf.diagonal().amax();
    if scale <= 0.0 {
        return None;
    }
    let mut shift = 0.0;
    for _ in 0..24 {
        let mut m = hf.clone();
        for i in 0..k {
            m[(i, i)] += shift;
        }
        if let Some(ch) = Cholesky::new(m) {
            let d = ch.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        shift = if shift == 0.0 {
            1e-12 * scale
        } else {
            shift * 10.0
        };
    }
    None
}

fn initial_guess(p: &Problem, opts: &SolveOptions) -> Vec<f64> {
    let grid = p.grid();
    let bc = p.boundary();
    let mut y: Vec<f64> = match (bc.left, bc.right) {
        (Boundary::Fixed(ya), Boundary::Fixed(yb)) => {
            let n = grid.n() as f64;
            (0..grid.len())
                .map(|i| {
                    let s = i as f64 / n;
                    ya + s * (yb - ya)
                })
                .collect()
        }
        (Boundary::Fixed(c), Boundary::Free) | (Boundary::Free, Boundary::Fixed(c)) => {
            vec![c; grid.len()]
        }
        (Boundary::Free, Boundary::Free) => vec![0.5 * (grid.a() + grid.b()); grid.len()],
    };
    if opts.perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for v in y.iter_mut() {
            *v += rng.random_range(-opts.perturbation..=opts.perturbation);
        }
    }
    p.project_unchecked(&mut y);
    y
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimizes the discrete functional from the default initial guess.
///
/// Line-search failure ends the iteration with `converged = false`; only
/// evaluation errors of `L` at accepted points are returned as errors.
pub fn solve_direct(p: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let n = p.grid().n();
    let bc = p.boundary();
    let free: Vec<usize> = (0..=n)
        .filter(|&i| (i != 0 || bc.left.is_free()) && (i != n || bc.right.is_free()))
        .collect();
    let dense = match opts.method {
        Method::Newton => Some((p.left_caputo().to_dmatrix(), p.right_caputo().to_dmatrix())),
        Method::SteepestDescent => None,
    };

    let mut y = initial_guess(p, opts);
    let j_start = p.functional_unchecked(&y)?;
    let mut j = j_start;
    let mut g = gradient_of(p, &y)?;
    let mut grad_norm = inf_norm(&g);
    let mut iterations = 0;
    let mut converged = grad_norm <= opts.grad_tol;

    while !converged && iterations < opts.max_iters {
        let newton = match &dense {
            Some((a, b)) => newton_direction(&hessian(p, &y, a, b)?, &g, &free).map(|d| {
                let mut full = vec![0.0; n + 1];
                for (&i, v) in free.iter().zip(d) {
                    full[i] = v;
                }
                full
            }),
            None => None,
        };
        let newton = newton.filter(|d| d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() < 0.0);
        let full_newton_step = newton.is_some();
        let dir: Vec<f64> = newton.unwrap_or_else(|| g.iter().map(|v| -v).collect());
        let slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();

        // near the minimizer the predicted decrease of a Newton step falls below
        // the rounding error of J; tolerate that much on the full step only
        let rounding = 8.0 * f64::EPSILON * j.abs();
        let mut step = opts.step_init;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial: Vec<f64> = y.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            if let Ok(jt) = p.functional_unchecked(&trial) {
                let slack = if full_newton_step && step == opts.step_init {
                    rounding
                } else {
                    0.0
                };
                if jt - j <= opts.armijo_c * step * slope + slack && jt <= j_start {
                    accepted = Some((trial, jt));
                    break;
                }
            }
            step *= opts.backtrack_factor;
        }
        iterations += 1;
        match accepted {
            Some((trial, jt)) => {
                y = trial;
                j = jt;
                g = gradient_of(p, &y)?;
                grad_norm = inf_norm(&g);
                converged = grad_norm <= opts.grad_tol;
            }
            None => break,
        }
    }

    let minimizer = SampledFunction::new(*p.grid(), y)?;
    let residuals = residual_report(p, &minimizer, &ResidualOptions::default())?;
    Ok(SolveReport {
        minimizer,
        j_value: j,
        grad_norm,
        el_residual_norm: residuals.el_norm,
        nbc_left_residual: residuals.nbc_left,
        nbc_right_residual: residuals.nbc_right,
        iterations,
        converged,
        residuals,
    })
}

/// Analytic comparison function for a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Affine minimizer of the order-one problem, from `gamma` and `lambda`.
    ClassicalCandidate,
}

impl Reference {
    pub fn sample(self, params: &Params, grid: Grid) -> Result<SampledFunction> {
        match self {
            Reference::ClassicalCandidate => {
                let get = |k: &str| {
                    params.get(k).copied().ok_or_else(|| {
                        Error::Config(format!(
                            "reference 'classical_candidate' needs parameter '{k}'"
                        ))
                    })
                };
                Ok(classical_candidate(get("gamma")?, get("lambda")?, grid))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub j_value: f64,
    pub el_norm: f64,
    pub nbc_left: Option<f64>,
    pub nbc_right: Option<f64>,
    pub max_dev_from_reference: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// Relative increase tolerated between consecutive rows.
pub const MONOTONE_SLACK: f64 = 0.1;
/// Values at or below this are treated as converged to rounding.
pub const NOISE_FLOOR: f64 = 1e-10;

fn non_increasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= NOISE_FLOOR || w[1] <= (1.0 + MONOTONE_SLACK) * w[0])
}

impl ConvergenceTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    /// Residual norms non-increasing from coarse to fine within the slack.
    /// `None` when some row did not converge.
    pub fn residuals_monotone(&self) -> Option<bool> {
        if !self.all_converged() {
            return None;
        }
        let el: Vec<f64> = self.rows.iter().map(|r| r.el_norm).collect();
        let left: Vec<f64> = self.rows.iter().filter_map(|r| r.nbc_left).collect();
        let right: Vec<f64> = self.rows.iter().filter_map(|r| r.nbc_right).collect();
        Some(non_increasing(&el) && non_increasing(&left) && non_increasing(&right))
    }

    /// Deviation from the reference strictly decreasing, or already below the
    /// noise floor. `None` without a reference or when some row did not converge.
    pub fn reference_deviation_decreasing(&self) -> Option<bool> {
        if !self.all_converged() {
            return None;
        }
        let dev: Option<Vec<f64>> = self.rows.iter().map(|r| r.max_dev_from_reference).collect();
        let dev = dev?;
        Some(dev.windows(2).all(|w| w[1] <= NOISE_FLOOR || w[1] < w[0]))
    }
}

/// One solve per grid size of a registry problem, rows in the given order.
pub fn convergence_study(
    name: &str,
    params: &Params,
    grid_sizes: &[usize],
    opts: &SolveOptions,
    reference: Option<Reference>,
) -> Result<ConvergenceTable> {
    if grid_sizes.is_empty() {
        return Err(Error::Config("grid_sizes must not be empty".into()));
    }
    let mut jobs = Vec::with_capacity(grid_sizes.len());
    for &n in grid_sizes {
        let mut ps = params.clone();
        ps.insert("n".into(), n as f64);
        let problem = builtin_problem(name, &ps)?;
        let reference = reference
            .map(|r| r.sample(&ps, *problem.grid()))
            .transpose()?;
        jobs.push((problem, reference));
    }
    study(&jobs, opts)
}

/// Solves every problem, each on its own thread, and tabulates the results in
/// input order. The optional function is the reference for the deviation column.
pub fn study(
    jobs: &[(Problem, Option<SampledFunction>)],
    opts: &SolveOptions,
) -> Result<ConvergenceTable> {
    if jobs.is_empty() {
        return Err(Error::Config("grid_sizes must not be empty".into()));
    }
    opts.validate()?;
    let results: Vec<Result<ConvergenceRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(problem, reference)| {
                scope.spawn(move || {
                    let r = solve_direct(problem, opts)?;
                    let max_dev = reference
                        .as_ref()
                        .map(|f| r.minimizer.max_abs_diff(f))
                        .transpose()?;
                    Ok(ConvergenceRow {
                        n: problem.grid().n(),
                        j_value: r.j_value,
                        el_norm: r.el_residual_norm,
                        nbc_left: r.nbc_left_residual,
                        nbc_right: r.nbc_right_residual,
                        max_dev_from_reference: max_dev,
                        iterations: r.iterations,
                        converged: r.converged,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    Ok(ConvergenceTable {
        rows: results.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::operators::FractionalOrder;
    use crate::problem::{caputo_energy_lagrangian, eval_functional, BoundarySpec, Lagrangian};

    fn params(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn example(alpha: f64, n: f64) -> Problem {
        builtin_problem(
            "caputo_quadratic_free_endpoints",
            &params(&[
                ("gamma", 1.0),
                ("lambda", 1.0),
                ("a", 0.0),
                ("b", 1.0),
                ("n", n),
                ("alpha", alpha),
                ("beta", alpha),
            ]),
        )
        .unwrap()
    }

    fn finite_difference_gradient(p: &Problem, y: &[f64]) -> Vec<f64> {
        let j0 = p.functional_unchecked(y).unwrap();
        (0..y.len())
            .map(|i| {
                let h = 1e-7;
                let mut yp = y.to_vec();
                yp[i] += h;
                (p.functional_unchecked(&yp).unwrap() - j0) / h
            })
            .collect()
    }

    #[test]
    fn gradient_vanishes_at_constant() {
        let grid = Grid::new(0.0, 1.0, 16).unwrap();
        for alpha in [0.3, 0.8, 1.0] {
            let o = FractionalOrder::new(alpha).unwrap();
            let p =
                Problem::new(caputo_energy_lagrangian(), o, o, BoundarySpec::FREE, grid).unwrap();
            let g = discrete_gradient(&p, &SampledFunction::constant(grid, 0.4).unwrap()).unwrap();
            assert!(g.iter().all(|&v| v.abs() < 1e-15), "{g:?}");
        }
    }

    #[test]
    fn gradient_matches_one_sided_differences() {
        let p = example(0.5, 32.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..33).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gradient_of(&p, &y).unwrap();
        let fd = finite_difference_gradient(&p, &y);
        let err = g
            .iter()
            .zip(&fd)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-5, "{err}");
    }

    #[test]
    fn end_value_term_only_when_present() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let o = FractionalOrder::new(0.5).unwrap();
        let with_u = Problem::new(
            Lagrangian::new(|p| 0.5 * p[2] * p[2] + p[4]),
            o,
            o,
            BoundarySpec::FREE,
            grid,
        )
        .unwrap();
        let without =
            Problem::new(caputo_energy_lagrangian(), o, o, BoundarySpec::FREE, grid).unwrap();
        let y = SampledFunction::from_fn(grid, |x| x * x).unwrap();
        let a = discrete_gradient(&with_u, &y).unwrap();
        let b = discrete_gradient(&without, &y).unwrap();
        assert!((a[0] - b[0] - 1.0).abs() < 1e-8);
        assert!(a[1..]
            .iter()
            .zip(&b[1..])
            .all(|(x, y)| (x - y).abs() < 1e-8));
    }

    #[test]
    fn classical_limit_closed_form() {
        let p = builtin_problem(
            "classical_limit",
            &params(&[
                ("gamma", 1.0),
                ("lambda", 1.0),
                ("a", 0.0),
                ("b", 1.0),
                ("n", 1000.0),
            ]),
        )
        .unwrap();
        let r = solve_direct(&p, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        let ybar = classical_candidate(1.0, 1.0, *p.grid());
        assert!(r.minimizer.max_abs_diff(&ybar).unwrap() <= 1e-4);
        assert!((r.j_value - 1.0 / 6.0).abs() <= 1e-4);
    }

    #[test]
    fn fixed_ends_give_straight_line() {
        let p = builtin_problem(
            "fixed_endpoint_quadratic",
            &params(&[
                ("a", 0.0),
                ("b", 1.0),
                ("n", 50.0),
                ("alpha", 1.0),
                ("beta", 1.0),
                ("ya", 0.0),
                ("yb", 1.0),
            ]),
        )
        .unwrap();
        let r = solve_direct(&p, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        let line = SampledFunction::from_fn(*p.grid(), |x| x).unwrap();
        assert!(r.minimizer.max_abs_diff(&line).unwrap() <= 1e-6);
        assert_eq!(r.minimizer.first(), 0.0);
        assert_eq!(r.minimizer.last(), 1.0);
        assert_eq!((r.nbc_left_residual, r.nbc_right_residual), (None, None));
    }

    #[test]
    fn fractional_example_beats_classical_candidate() {
        let p = example(0.5, 200.0);
        let r = solve_direct(&p, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        let ybar = classical_candidate(1.0, 1.0, *p.grid());
        let j_bar = eval_functional(&p, &ybar).unwrap();
        assert!(r.j_value < j_bar || (r.j_value - j_bar).abs() <= 1e-6);
    }

    #[test]
    fn steepest_descent_on_small_problem() {
        let p = example(0.7, 16.0);
        let opts = SolveOptions {
            method: Method::SteepestDescent,
            grad_tol: 1e-7,
            max_iters: 20000,
            ..SolveOptions::default()
        };
        let sd = solve_direct(&p, &opts).unwrap();
        let nt = solve_direct(&p, &SolveOptions::default()).unwrap();
        assert!(sd.converged && nt.converged);
        assert!(sd.minimizer.max_abs_diff(&nt.minimizer).unwrap() < 1e-4);
    }

    #[test]
    fn line_search_failure_is_reported() {
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        // the supplied partial has the wrong sign, so every step goes uphill
        let lag = Lagrangian::new(|p| p[1]).with_partial(2, |_| -1.0);
        let p = Problem::new(
            lag,
            FractionalOrder::CLASSICAL,
            FractionalOrder::CLASSICAL,
            BoundarySpec::FREE,
            grid,
        )
        .unwrap();
        let r = solve_direct(&p, &SolveOptions::default()).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(
            r.j_value
                <= p.functional_unchecked(&initial_guess(&p, &SolveOptions::default()))
                    .unwrap()
        );
    }

    #[test]
    fn options_are_validated() {
        let p = example(0.5, 8.0);
        for bad in [
            SolveOptions {
                max_iters: 0,
                ..Default::default()
            },
            SolveOptions {
                backtrack_factor: 1.0,
                ..Default::default()
            },
            SolveOptions {
                armijo_c: 0.0,
                ..Default::default()
            },
            SolveOptions {
                grad_tol: -1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(solve_direct(&p, &bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn study_single_row_and_empty() {
        let ps = params(&[("gamma", 1.0), ("lambda", 1.0), ("a", 0.0), ("b", 1.0)]);
        let t = convergence_study(
            "classical_limit",
            &ps,
            &[40],
            &SolveOptions::default(),
            None,
        )
        .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.residuals_monotone(), Some(true));
        assert_eq!(t.reference_deviation_decreasing(), None);
        assert!(
            convergence_study("classical_limit", &ps, &[], &SolveOptions::default(), None).is_err()
        );
    }

    #[test]
    fn study_classical_refinement() {
        let ps = params(&[("gamma", 1.0), ("lambda", 1.0), ("a", 0.0), ("b", 1.0)]);
        let t = convergence_study(
            "classical_limit",
            &ps,
            &[50, 100, 200],
            &SolveOptions::default(),
            Some(Reference::ClassicalCandidate),
        )
        .unwrap();
        assert_eq!(
            t.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![50, 100, 200]
        );
        assert_eq!(t.residuals_monotone(), Some(true));
        assert_eq!(t.reference_deviation_decreasing(), Some(true));
    }

    #[test]
    fn monotonicity_rule() {
        assert!(non_increasing(&[1.0, 1.05, 0.5]));
        assert!(!non_increasing(&[1.0, 1.2]));
        assert!(non_increasing(&[1e-14, 5e-13, 1e-11]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn same_seed_same_report(seed in any::<u64>(), alpha in 0.3f64..=1.0) {
            let p = example(alpha, 24.0);
            let opts = SolveOptions { seed, ..Default::default() };
            let a = solve_direct(&p, &opts).unwrap();
            let b = solve_direct(&p, &opts).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn distinct_seeds_agree_on_convex_problems(s1 in any::<u64>(), s2 in any::<u64>(), alpha in 0.3f64..=1.0) {
            let p = example(alpha, 24.0);
            let a = solve_direct(&p, &SolveOptions { seed: s1, ..Default::default() }).unwrap();
            let b = solve_direct(&p, &SolveOptions { seed: s2, ..Default::default() }).unwrap();
            prop_assert!(a.converged && b.converged);
            prop_assert!(a.minimizer.max_abs_diff(&b.minimizer).unwrap() <= 1e-6);
        }

        #[test]
        fn solve_never_increases_the_functional(seed in any::<u64>()) {
            let p = example(0.6, 20.0);
            let opts = SolveOptions { seed, ..Default::default() };
            let start = p.functional_unchecked(&initial_guess(&p, &opts)).unwrap();
            let r = solve_direct(&p, &opts).unwrap();
            prop_assert!(r.j_value <= start);
        }
    }
}
