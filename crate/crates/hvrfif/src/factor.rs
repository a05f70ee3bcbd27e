//! Contractivity factors with sampled sup / Lipschitz bounds.
//!
//! Bounds are heuristic by default: the factor is sampled on a dense uniform
//! grid over its region, and the sampled maximum (resp. maximum adjacent
//! difference quotient) is inflated by a 5% safety margin. Certification
//! decisions use the inflated estimates; the reported contraction number
//! `S_bar` uses the raw sampled sups so constant factors come out exact.
//! Configurations may supply analytic bounds instead, which are taken as-is.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Rect;
use crate::expr::{Dim, Expr};

/// Default sample count for one-variable bound estimation.
pub const DEFAULT_SAMPLES_1D: usize = 10_001;
/// Default per-axis sample count for two-variable bound estimation (257x257).
pub const DEFAULT_SAMPLES_2D: usize = 257;
/// Safety margin applied to sampled bounds.
pub const BOUND_SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    Estimated,
    UserSupplied,
}

/// A factor expression together with bound information on its region.
#[derive(Debug, Clone)]
pub struct FactorFn {
    pub expr: Expr,
    pub dim: Dim,
    /// Sampled max |f| (or the user bound verbatim).
    pub sup_raw: f64,
    /// `sup_raw` inflated by the safety margin for estimated bounds.
    pub sup_est: f64,
    /// Sampled max adjacent difference quotient (or the user bound).
    pub lip_raw: f64,
    pub lip_est: f64,
    pub bounds_mode: BoundsMode,
}

impl FactorFn {
    /// Build with sampled bounds over a one-variable region.
    pub fn estimated_1d(expr: Expr, interval: (f64, f64), samples: usize) -> Result<Self> {
        let sup_raw = sample_sup_1d(|x| expr.eval1(x).map_err(Error::from), interval, samples)?;
        let lip_raw = sample_lip_1d(|x| expr.eval1(x).map_err(Error::from), interval, samples)?;
        Ok(FactorFn {
            expr,
            dim: Dim::One,
            sup_raw,
            sup_est: sup_raw * BOUND_SAFETY,
            lip_raw,
            lip_est: lip_raw * BOUND_SAFETY,
            bounds_mode: BoundsMode::Estimated,
        })
    }

    /// Build with sampled bounds over a rectangle.
    pub fn estimated_2d(expr: Expr, rect: Rect, samples: usize) -> Result<Self> {
        let f = |x: f64, y: f64| expr.eval2(x, y).map_err(Error::from);
        let sup_raw = sample_sup_2d(f, rect, samples)?;
        let lip_raw = sample_lip_2d(f, rect, samples)?;
        Ok(FactorFn {
            expr,
            dim: Dim::Two,
            sup_raw,
            sup_est: sup_raw * BOUND_SAFETY,
            lip_raw,
            lip_est: lip_raw * BOUND_SAFETY,
            bounds_mode: BoundsMode::Estimated,
        })
    }

    /// Build with user-supplied analytic bounds (no safety margin applied).
    pub fn with_user_bounds(expr: Expr, dim: Dim, sup: f64, lip: f64) -> Result<Self> {
        if !(sup >= 0.0) || !(lip >= 0.0) {
            return Err(Error::BadSolverParams {
                what: "user-supplied factor bounds must be non-negative",
            });
        }
        Ok(FactorFn {
            expr,
            dim,
            sup_raw: sup,
            sup_est: sup,
            lip_raw: lip,
            lip_est: lip,
            bounds_mode: BoundsMode::UserSupplied,
        })
    }
}

/// Sup estimate for the spec'd `estimate_sup` operation: sampled max |f|
/// times the safety margin.
pub fn estimate_sup_1d(expr: &Expr, interval: (f64, f64), samples: usize) -> Result<f64> {
    Ok(sample_sup_1d(|x| expr.eval1(x).map_err(Error::from), interval, samples)? * BOUND_SAFETY)
}

pub fn estimate_lipschitz_1d(expr: &Expr, interval: (f64, f64), samples: usize) -> Result<f64> {
    Ok(sample_lip_1d(|x| expr.eval1(x).map_err(Error::from), interval, samples)? * BOUND_SAFETY)
}

pub fn estimate_sup_2d(expr: &Expr, rect: Rect, samples: usize) -> Result<f64> {
    Ok(sample_sup_2d(|x, y| expr.eval2(x, y).map_err(Error::from), rect, samples)? * BOUND_SAFETY)
}

pub fn estimate_lipschitz_2d(
    expr: &Expr,
    rect: Rect,
    samples: usize,
) -> Result<f64> {
    Ok(sample_lip_2d(|x, y| expr.eval2(x, y).map_err(Error::from), rect, samples)? * BOUND_SAFETY)
}

fn grid_point(interval: (f64, f64), i: usize, segments: usize) -> f64 {
    let t = i as f64 / segments as f64;
    (1.0 - t) * interval.0 + t * interval.1
}

/// Raw sampled sup of an arbitrary function over an interval.
pub(crate) fn sample_sup_1d<F: Fn(f64) -> Result<f64>>(
    f: F,
    interval: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let segments = samples.max(2) - 1;
    let mut sup = 0.0f64;
    for i in 0..=segments {
        sup = sup.max(f(grid_point(interval, i, segments))?.abs());
    }
    Ok(sup)
}

/// Raw sampled Lipschitz constant (max adjacent difference quotient).
pub(crate) fn sample_lip_1d<F: Fn(f64) -> Result<f64>>(
    f: F,
    interval: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let segments = samples.max(2) - 1;
    let h = (interval.1 - interval.0) / segments as f64;
    if h == 0.0 {
        return Ok(0.0);
    }
    let mut lip = 0.0f64;
    let mut prev = f(interval.0)?;
    for i in 1..=segments {
        let cur = f(grid_point(interval, i, segments))?;
        lip = lip.max((cur - prev).abs() / h);
        prev = cur;
    }
    Ok(lip)
}

pub(crate) fn sample_sup_2d<F: Fn(f64, f64) -> Result<f64>>(
    f: F,
    rect: Rect,
    samples: usize,
) -> Result<f64> {
    let segments = samples.max(2) - 1;
    let mut sup = 0.0f64;
    for j in 0..=segments {
        let y = grid_point(rect.1, j, segments);
        for i in 0..=segments {
            sup = sup.max(f(grid_point(rect.0, i, segments), y)?.abs());
        }
    }
    Ok(sup)
}

/// Max directional difference quotient along both axes; this bounds the
/// Lipschitz constant with respect to the l1 norm on the plane.
pub(crate) fn sample_lip_2d<F: Fn(f64, f64) -> Result<f64>>(
    f: F,
    rect: Rect,
    samples: usize,
) -> Result<f64> {
    let segments = samples.max(2) - 1;
    let hx = (rect.0 .1 - rect.0 .0) / segments as f64;
    let hy = (rect.1 .1 - rect.1 .0) / segments as f64;
    let mut lip = 0.0f64;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(segments + 1);
    for j in 0..=segments {
        let y = grid_point(rect.1, j, segments);
        let mut row = Vec::with_capacity(segments + 1);
        for i in 0..=segments {
            row.push(f(grid_point(rect.0, i, segments), y)?);
        }
        if hx > 0.0 {
            for i in 1..=segments {
                lip = lip.max((row[i] - row[i - 1]).abs() / hx);
            }
        }
        if hy > 0.0 {
            if let Some(prev) = rows.last() {
                for i in 0..=segments {
                    lip = lip.max((row[i] - prev[i]).abs() / hy);
                }
            }
        }
        rows.push(row);
        if rows.len() > 2 {
            rows.remove(0);
        }
    }
    Ok(lip)
}

/// The four factors of one region, arranged as the rows of the 2x2 scaling
/// matrix `[[s, s_prime], [s_tilde, s_tilde_prime]]` acting on the
/// (visible, hidden) value pair.
#[derive(Debug, Clone)]
pub struct FactorQuad {
    pub s: FactorFn,
    pub s_prime: FactorFn,
    pub s_tilde: FactorFn,
    pub s_tilde_prime: FactorFn,
}

impl FactorQuad {
    pub fn iter(&self) -> impl Iterator<Item = &FactorFn> {
        [&self.s, &self.s_prime, &self.s_tilde, &self.s_tilde_prime].into_iter()
    }

    /// Raw sup column sums of the scaling matrix: (|s|+|s~|, |s'|+|s~'|).
    pub fn sup_columns_raw(&self) -> (f64, f64) {
        (
            self.s.sup_raw + self.s_tilde.sup_raw,
            self.s_prime.sup_raw + self.s_tilde_prime.sup_raw,
        )
    }

    pub fn max_sup_est(&self) -> f64 {
        self.iter().map(|f| f.sup_est).fold(0.0, f64::max)
    }

    /// Column sums of Lipschitz estimates: (L_s + L_s~, L_s' + L_s~').
    pub fn lip_columns_est(&self) -> (f64, f64) {
        (
            self.s.lip_est + self.s_tilde.lip_est,
            self.s_prime.lip_est + self.s_tilde_prime.lip_est,
        )
    }

    pub fn all_user_supplied(&self) -> bool {
        self.iter().all(|f| f.bounds_mode == BoundsMode::UserSupplied)
    }
}

/// One factor as supplied by a configuration: an expression plus optional
/// analytic (sup, Lipschitz) bounds that override sampling.
#[derive(Debug, Clone)]
pub struct FactorSpec {
    pub expr: Expr,
    pub user_bounds: Option<(f64, f64)>,
}

impl FactorSpec {
    pub fn new(expr: Expr) -> Self {
        FactorSpec {
            expr,
            user_bounds: None,
        }
    }

    fn build_1d(&self, interval: (f64, f64), samples: usize) -> Result<FactorFn> {
        match self.user_bounds {
            Some((sup, lip)) => FactorFn::with_user_bounds(self.expr.clone(), Dim::One, sup, lip),
            None => FactorFn::estimated_1d(self.expr.clone(), interval, samples),
        }
    }

    fn build_2d(&self, rect: Rect, samples: usize) -> Result<FactorFn> {
        match self.user_bounds {
            Some((sup, lip)) => FactorFn::with_user_bounds(self.expr.clone(), Dim::Two, sup, lip),
            None => FactorFn::estimated_2d(self.expr.clone(), rect, samples),
        }
    }
}

/// Per-region factor lists in the order (s, s_tilde, s_prime, s_tilde_prime),
/// matching the order the quadruples are conventionally listed in.
#[derive(Debug, Clone)]
pub struct FactorLists {
    pub s: Vec<FactorSpec>,
    pub s_tilde: Vec<FactorSpec>,
    pub s_prime: Vec<FactorSpec>,
    pub s_tilde_prime: Vec<FactorSpec>,
}

impl FactorLists {
    pub fn from_exprs(
        s: Vec<Expr>,
        s_tilde: Vec<Expr>,
        s_prime: Vec<Expr>,
        s_tilde_prime: Vec<Expr>,
    ) -> Self {
        let wrap = |v: Vec<Expr>| v.into_iter().map(FactorSpec::new).collect();
        FactorLists {
            s: wrap(s),
            s_tilde: wrap(s_tilde),
            s_prime: wrap(s_prime),
            s_tilde_prime: wrap(s_tilde_prime),
        }
    }

    fn check_len(&self, expected: usize) -> Result<()> {
        for (what, list) in [
            ("factor list s", &self.s),
            ("factor list s_tilde", &self.s_tilde),
            ("factor list s_prime", &self.s_prime),
            ("factor list s_tilde_prime", &self.s_tilde_prime),
        ] {
            if list.len() != expected {
                return Err(Error::LengthMismatch {
                    what,
                    expected,
                    got: list.len(),
                });
            }
        }
        Ok(())
    }
}

/// Factor quadruples for every region of a one-variable system.
#[derive(Debug, Clone)]
pub struct FactorSet1D {
    quads: Vec<FactorQuad>,
}

impl FactorSet1D {
    /// Estimate bounds for every factor over its region interval.
    pub fn build(lists: &FactorLists, regions: &[(f64, f64)], samples: usize) -> Result<Self> {
        lists.check_len(regions.len())?;
        let mut quads = Vec::with_capacity(regions.len());
        for (i, &iv) in regions.iter().enumerate() {
            quads.push(FactorQuad {
                s: lists.s[i].build_1d(iv, samples)?,
                s_prime: lists.s_prime[i].build_1d(iv, samples)?,
                s_tilde: lists.s_tilde[i].build_1d(iv, samples)?,
                s_tilde_prime: lists.s_tilde_prime[i].build_1d(iv, samples)?,
            });
        }
        Ok(FactorSet1D { quads })
    }

    pub fn quads(&self) -> &[FactorQuad] {
        &self.quads
    }
}

/// Factor quadruples for every region of a bivariate system, in linearized
/// region order (x index fastest).
#[derive(Debug, Clone)]
pub struct FactorSet2D {
    quads: Vec<FactorQuad>,
}

impl FactorSet2D {
    pub fn build(
        lists: &FactorLists,
        regions: &[Rect],
        samples: usize,
    ) -> Result<Self> {
        lists.check_len(regions.len())?;
        let mut quads = Vec::with_capacity(regions.len());
        for (i, &rect) in regions.iter().enumerate() {
            quads.push(FactorQuad {
                s: lists.s[i].build_2d(rect, samples)?,
                s_prime: lists.s_prime[i].build_2d(rect, samples)?,
                s_tilde: lists.s_tilde[i].build_2d(rect, samples)?,
                s_tilde_prime: lists.s_tilde_prime[i].build_2d(rect, samples)?,
            });
        }
        Ok(FactorSet2D { quads })
    }

    pub fn quads(&self) -> &[FactorQuad] {
        &self.quads
    }
}
