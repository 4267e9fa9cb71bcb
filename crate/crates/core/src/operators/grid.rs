use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `n` intervals (`n + 1` nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Grid(format!(
                "end-points must be finite, got [{a}, {b}]"
            )));
        }
        if a >= b {
            return Err(Error::Grid(format!("need a < b, got [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 intervals, got {n}")));
        }
        let h = (b - a) / n as f64;
        if h <= 0.0 {
            return Err(Error::Grid("step underflows to zero".into()));
        }
        Ok(Self { a, b, n, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Coordinate of node `i`, `a + i h`.
    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n + 1).map(move |i| self.x(i))
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.h; self.len()];
        w[0] = 0.5 * self.h;
        w[self.n] = 0.5 * self.h;
        w
    }

    /// Composite trapezoid rule over node values.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Shape(format!(
                "expected {} node values, got {}",
                self.len(),
                values.len()
            )));
        }
        let inner: f64 = values[1..self.n].iter().sum();
        Ok(self.h * (inner + 0.5 * (values[0] + values[self.n])))
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "grid mismatch: [{}, {}]/{} vs [{}, {}]/{}",
                self.a, self.b, self.n, other.a, other.b, other.n
            )))
        }
    }
}
