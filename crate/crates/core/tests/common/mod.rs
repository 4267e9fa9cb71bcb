//! Reference values computed without the library's discretizations.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Γ(x) for x > 0 by upward shift and the Stirling series.
pub fn gamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 1.0;
    let mut z = x;
    while z < 12.0 {
        shift *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    ln.exp() / shift
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // split once so symmetric integrands do not fool the first estimate
    let pieces = 8;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `(1/Γ(α)) ∫_a^x (x − t)^(α−1) f(t) dt` through `u = (x − t)^α`, which
/// removes the kernel singularity.
pub fn left_rlfi(f: &dyn Fn(f64) -> f64, alpha: f64, a: f64, x: f64) -> f64 {
    if x <= a {
        return 0.0;
    }
    let p = 1.0 / alpha;
    integrate(&|u: f64| f(x - u.powf(p)), 0.0, (x - a).powf(alpha), 1e-13) / gamma(alpha + 1.0)
}

/// `(1/Γ(α)) ∫_x^b (t − x)^(α−1) f(t) dt`.
pub fn right_rlfi(f: &dyn Fn(f64) -> f64, alpha: f64, x: f64, b: f64) -> f64 {
    if x >= b {
        return 0.0;
    }
    let p = 1.0 / alpha;
    integrate(&|u: f64| f(x + u.powf(p)), 0.0, (b - x).powf(alpha), 1e-13) / gamma(alpha + 1.0)
}

/// Left Caputo derivative `I_{a+}^{1−α} f′`.
pub fn left_caputo(df: &dyn Fn(f64) -> f64, alpha: f64, a: f64, x: f64) -> f64 {
    left_rlfi(df, 1.0 - alpha, a, x)
}

/// Right Caputo derivative `−I_{b−}^{1−α} f′`.
pub fn right_caputo(df: &dyn Fn(f64) -> f64, alpha: f64, x: f64, b: f64) -> f64 {
    -right_rlfi(df, 1.0 - alpha, x, b)
}

/// Integrand of the form `φ(x) ψ(x)` where ψ behaves like a power of the
/// distance to one end: substituting `x = a + (b − a) s²` (or its mirror)
/// smooths it for Simpson.
pub fn integrate_graded(f: &dyn Fn(f64) -> f64, a: f64, b: f64, toward_left: bool) -> f64 {
    let l = b - a;
    let g = |s: f64| {
        let x = if toward_left {
            a + l * s * s
        } else {
            b - l * s * s
        };
        f(x) * 2.0 * l * s
    };
    integrate(&g, 0.0, 1.0, 1e-11)
}

pub struct IbpTerms {
    pub lhs: f64,
    pub boundary: f64,
    pub rhs_integral: f64,
}

/// Terms of the left-sided Caputo integration by parts on `[a, b]`:
/// `∫ g ᶜD_{a+}^α f = [f I_{b−}^{1−α} g]_a^b + ∫ f D_{b−}^α g`, the right
/// Riemann–Liouville derivative being `ᶜD_{b−}^α g + g(b)(b − x)^(−α)/Γ(1 − α)`.
pub fn caputo_ibp_left(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    dg: &dyn Fn(f64) -> f64,
    alpha: f64,
    a: f64,
    b: f64,
) -> IbpTerms {
    let lhs = integrate_graded(&|x| g(x) * left_caputo(df, alpha, a, x), a, b, true);
    let trace = |x: f64| right_rlfi(g, 1.0 - alpha, x, b);
    let boundary = f(b) * trace(b) - f(a) * trace(a);
    let caputo_part = integrate_graded(&|x| f(x) * right_caputo(dg, alpha, x, b), a, b, false);
    // ∫ f(x)(b − x)^(−α) dx / Γ(1 − α) = I_{a+}^{1−α} f (b)
    let singular_part = g(b) * left_rlfi(f, 1.0 - alpha, a, b);
    IbpTerms {
        lhs,
        boundary,
        rhs_integral: caputo_part + singular_part,
    }
}

/// Both sides of `∫ g I_{a+}^α f = ∫ f I_{b−}^α g`.
pub fn rlfi_ibp(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    alpha: f64,
    a: f64,
    b: f64,
) -> (f64, f64) {
    let lhs = integrate_graded(&|x| g(x) * left_rlfi(f, alpha, a, x), a, b, true);
    let rhs = integrate_graded(&|x| f(x) * right_rlfi(g, alpha, x, b), a, b, false);
    (lhs, rhs)
}

/// Least-squares slope of `log2 e` against `log2 n`, negated.
pub fn observed_order(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -num / den
}
