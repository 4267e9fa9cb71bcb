use crate::error::{Error, Result};

use super::Grid;

/// Which end-nodes of a grid function carry a kernel singularity.
///
/// A flagged node holds the raw (possibly infinite) operator output and is excluded
/// from every norm and reduction.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SingularEnds {
    pub left: bool,
    pub right: bool,
}

impl SingularEnds {
    pub const NONE: SingularEnds = SingularEnds {
        left: false,
        right: false,
    };
    pub const BOTH: SingularEnds = SingularEnds {
        left: true,
        right: true,
    };

    pub fn union(self, other: SingularEnds) -> SingularEnds {
        SingularEnds {
            left: self.left || other.left,
            right: self.right || other.right,
        }
    }

    pub fn mirrored(self) -> SingularEnds {
        SingularEnds {
            left: self.right,
            right: self.left,
        }
    }
}

/// Node samples of a real function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    singular: SingularEnds,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "grid has {} nodes but {} values were supplied",
                grid.len(),
                values.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self {
            grid,
            values,
            singular: SingularEnds::NONE,
        })
    }

    /// Samples `f` at every node. Fails if `f` returns a non-finite value.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            singular: SingularEnds::NONE,
        }
    }

    /// Operator outputs: non-finite values are permitted only at flagged end-nodes.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>, singular: SingularEnds) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().enumerate().all(|(i, v)| v.is_finite()
            || (i == 0 && singular.left)
            || (i == grid.n() && singular.right)));
        Self {
            grid,
            values,
            singular,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn singular(&self) -> SingularEnds {
        self.singular
    }

    pub fn is_singular(&self, i: usize) -> bool {
        (i == 0 && self.singular.left) || (i == self.grid.n() && self.singular.right)
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.grid.n()]
    }

    /// Samples in reverse node order, i.e. `f(a + b - x)` on the same grid.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
            singular: self.singular.mirrored(),
        }
    }

    /// Node-wise combination `c1 * self + c2 * other`.
    pub fn combine(&self, c1: f64, other: &SampledFunction, c2: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| c1 * p + c2 * q)
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
            singular: self.singular.union(other.singular),
        })
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(x, v)| f(x, *v))
            .collect();
        Self::new(self.grid, values)
    }

    /// Trapezoid integral; rejects functions with flagged singular nodes.
    pub fn integral(&self) -> Result<f64> {
        if self.singular != SingularEnds::NONE {
            return Err(Error::Precondition(
                "cannot apply the trapezoid rule to a function with singular end-nodes".into(),
            ));
        }
        self.grid.integrate(&self.values)
    }

    /// Maximum of |f| over node indices `lo..=hi`, skipping singular nodes.
    pub fn max_abs_between(&self, lo: usize, hi: usize) -> f64 {
        (lo..=hi.min(self.grid.n()))
            .filter(|&i| !self.is_singular(i))
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }

    /// Maximum of |f - g| over all non-singular nodes.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok((0..self.grid.len())
            .filter(|&i| !self.is_singular(i) && !other.is_singular(i))
            .map(|i| (self.values[i] - other.values[i]).abs())
            .fold(0.0, f64::max))
    }
}
