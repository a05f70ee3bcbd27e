//! Grid-sampled vector-valued fields with interpolating evaluators.
//!
//! Interpolation uses convex-combination weights throughout so that
//! evaluation at a grid node reproduces the stored value exactly.

use crate::error::{Error, Result};

/// A (visible, hidden) value pair.
pub type Pair = [f64; 2];

/// A closed interval as (lo, hi).
pub type Interval = (f64, f64);

/// An axis-aligned rectangle as (x interval, y interval).
pub type Rect = (Interval, Interval);

#[inline]
pub fn pair_add(a: Pair, b: Pair) -> Pair {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn pair_sub(a: Pair, b: Pair) -> Pair {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn pair_l1(p: Pair) -> f64 {
    p[0].abs() + p[1].abs()
}

#[inline]
pub fn pair_lerp(a: Pair, b: Pair, t: f64) -> Pair {
    [
        (1.0 - t) * a[0] + t * b[0],
        (1.0 - t) * a[1] + t * b[1],
    ]
}

/// 2x2 scaling matrix acting on value pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 {
        a11: 0.0,
        a12: 0.0,
        a21: 0.0,
        a22: 0.0,
    };

    #[inline]
    pub fn apply(&self, p: Pair) -> Pair {
        [
            self.a11 * p[0] + self.a12 * p[1],
            self.a21 * p[0] + self.a22 * p[1],
        ]
    }
}

/// Build a grid over the knot span that contains every knot: each region is
/// subdivided uniformly so the total point count approaches `target_points`.
/// Returns the grid and the grid index of every knot.
pub fn grid_with_knots(knots: &[f64], target_points: usize) -> (Vec<f64>, Vec<usize>) {
    let total_len = knots[knots.len() - 1] - knots[0];
    let segments_total = (target_points.max(2) - 1) as f64;
    let mut grid = Vec::with_capacity(target_points + knots.len());
    let mut knot_indices = Vec::with_capacity(knots.len());
    for r in 0..knots.len() - 1 {
        let (lo, hi) = (knots[r], knots[r + 1]);
        let ideal = segments_total * (hi - lo) / total_len;
        let segs = (ideal.round() as usize).max(1);
        knot_indices.push(grid.len());
        for t in 0..segs {
            let w = t as f64 / segs as f64;
            grid.push((1.0 - w) * lo + w * hi);
        }
    }
    knot_indices.push(grid.len());
    grid.push(knots[knots.len() - 1]);
    (grid, knot_indices)
}

/// Locate `x` in a sorted grid: cell index and convex weight within the cell.
/// Values outside the grid clamp to its ends.
#[inline]
pub fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    // first index with grid[idx] > x, so the cell is idx-1
    let idx = grid.partition_point(|&g| g <= x);
    let cell = idx - 1;
    let w = (x - grid[cell]) / (grid[cell + 1] - grid[cell]);
    (cell, w)
}

/// A sampled one-variable field with piecewise-linear evaluation.
#[derive(Debug, Clone)]
pub struct SampledField1D {
    grid: Vec<f64>,
    values: Vec<Pair>,
}

impl SampledField1D {
    pub fn new(grid: Vec<f64>, values: Vec<Pair>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "field values",
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::GridTooCoarse {
                needed: 2,
                got: grid.len(),
            });
        }
        for i in 1..grid.len() {
            if !(grid[i] > grid[i - 1]) {
                return Err(Error::KnotsNotIncreasing {
                    axis: "grid",
                    index: i,
                });
            }
        }
        Ok(SampledField1D { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Pair] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Pair] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn eval(&self, x: f64) -> Pair {
        let (cell, w) = locate(&self.grid, x);
        pair_lerp(self.values[cell], self.values[cell + 1], w)
    }

    pub fn f1(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    pub fn f1_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[0]), hi.max(v[0]))
            })
    }
}

/// A sampled bivariate field with bilinear evaluation. Values are stored
/// row-major with y as the outer index: `values[iy * nx + ix]`.
#[derive(Debug, Clone)]
pub struct SampledField2D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<Pair>,
}

impl SampledField2D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<Pair>) -> Result<Self> {
        if values.len() != xs.len() * ys.len() {
            return Err(Error::LengthMismatch {
                what: "field values",
                expected: xs.len() * ys.len(),
                got: values.len(),
            });
        }
        for (axis, v) in [("grid x", &xs), ("grid y", &ys)] {
            if v.len() < 2 {
                return Err(Error::GridTooCoarse { needed: 2, got: v.len() });
            }
            for i in 1..v.len() {
                if !(v[i] > v[i - 1]) {
                    return Err(Error::KnotsNotIncreasing { axis, index: i });
                }
            }
        }
        Ok(SampledField2D { xs, ys, values })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn values(&self) -> &[Pair] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Pair] {
        &mut self.values
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.xs.len() + ix
    }

    pub fn at(&self, ix: usize, iy: usize) -> Pair {
        self.values[self.index(ix, iy)]
    }

    pub fn eval(&self, x: f64, y: f64) -> Pair {
        let (cx, wx) = locate(&self.xs, x);
        let (cy, wy) = locate(&self.ys, y);
        let i00 = self.index(cx, cy);
        let i01 = self.index(cx, cy + 1);
        let bottom = pair_lerp(self.values[i00], self.values[i00 + 1], wx);
        let top = pair_lerp(self.values[i01], self.values[i01 + 1], wx);
        pair_lerp(bottom, top, wy)
    }

    pub fn f1(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)[0]
    }

    pub fn f1_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[0]), hi.max(v[0]))
            })
    }
}
