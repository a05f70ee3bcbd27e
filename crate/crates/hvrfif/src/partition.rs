//! Datasets, region/domain partitions and the recurrent connection matrix.
//!
//! A dataset's knots split its interval (or rectangle) into unit regions.
//! A partition groups consecutive regions into domains — each spanning at
//! least two regions — and assigns every region a source domain through the
//! map `gamma`. The connection matrix records which map may follow which in
//! the chaos game: entry `(s, t)` is positive exactly when region `s` lies
//! inside the domain assigned to map `t`, and every positive row is
//! normalized to sum 1 by its count of positive entries.
//!
//! All indices are zero-based: regions `0..n`, domains `0..l`, knots `0..=n`.

use crate::error::{Error, Result};

/// Orientation of an endpoint map: `Plus` sends the domain's left endpoint to
/// the region's left knot, `Minus` to its right knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Plus,
    Minus,
}

fn check_knots(axis: &'static str, xs: &[f64]) -> Result<()> {
    for i in 1..xs.len() {
        if !(xs[i] > xs[i - 1]) {
            return Err(Error::KnotsNotIncreasing { axis, index: i });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 1D
// ---------------------------------------------------------------------------

/// Knots with visible values and hidden parameters: the extended dataset.
#[derive(Debug, Clone)]
pub struct HiddenDataset1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
}

impl HiddenDataset1D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, zs: Vec<f64>) -> Result<Self> {
        check_knots("x", &xs)?;
        if ys.len() != xs.len() {
            return Err(Error::LengthMismatch {
                what: "ys",
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if zs.len() != xs.len() {
            return Err(Error::LengthMismatch {
                what: "zs",
                expected: xs.len(),
                got: zs.len(),
            });
        }
        if xs.len() < 3 {
            return Err(Error::TooFewRegions {
                axis: "x",
                got: xs.len().saturating_sub(1),
            });
        }
        Ok(HiddenDataset1D { xs, ys, zs })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn zs(&self) -> &[f64] {
        &self.zs
    }

    /// Number of regions `n`.
    pub fn region_count(&self) -> usize {
        self.xs.len() - 1
    }

    /// Extended value pair at knot `i`.
    pub fn value(&self, i: usize) -> [f64; 2] {
        [self.ys[i], self.zs[i]]
    }

    pub fn y_range(&self) -> (f64, f64) {
        min_max(&self.ys)
    }

    pub fn z_range(&self) -> (f64, f64) {
        min_max(&self.zs)
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Regions grouped into domains with the assignment map `gamma`.
#[derive(Debug, Clone)]
pub struct Partition1D {
    n: usize,
    domains: Vec<(usize, usize)>,
    gamma: Vec<usize>,
    orientations: Vec<Orientation>,
}

impl Partition1D {
    /// `domains` are knot-index pairs `(s(k), e(k))`; `gamma` assigns each of
    /// the `n` regions a domain index; `orientations` selects each region's
    /// endpoint pairing.
    pub fn new(
        n: usize,
        domains: Vec<(usize, usize)>,
        gamma: Vec<usize>,
        orientations: Vec<Orientation>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRegions { axis: "x", got: n });
        }
        let l = domains.len();
        if l < 2 || l > n {
            return Err(Error::DomainCountOutOfRange { got: l, max: n });
        }
        for (k, &(s, e)) in domains.iter().enumerate() {
            if e > n || s >= e {
                return Err(Error::DomainIndexOutOfRange {
                    domain: k,
                    axis: "x",
                    lo: s,
                    hi: e,
                    knots: n + 1,
                });
            }
            if e - s < 2 {
                return Err(Error::DomainTooSmall {
                    domain: k,
                    axis: "x",
                    span: e - s,
                });
            }
        }
        if gamma.len() != n {
            return Err(Error::LengthMismatch {
                what: "gamma",
                expected: n,
                got: gamma.len(),
            });
        }
        for (i, &k) in gamma.iter().enumerate() {
            if k >= l {
                return Err(Error::GammaOutOfRange {
                    region: i,
                    got: k,
                    domains: l,
                });
            }
        }
        if orientations.len() != n {
            return Err(Error::LengthMismatch {
                what: "orientations",
                expected: n,
                got: orientations.len(),
            });
        }
        Ok(Partition1D {
            n,
            domains,
            gamma,
            orientations,
        })
    }

    pub fn region_count(&self) -> usize {
        self.n
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[(usize, usize)] {
        &self.domains
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    /// Does region `r` (spanning knots `r..=r+1`) lie inside domain `k`?
    pub fn region_in_domain(&self, r: usize, k: usize) -> bool {
        let (s, e) = self.domains[k];
        s <= r && r < e
    }

    pub fn domain_interval(&self, knots: &[f64], k: usize) -> (f64, f64) {
        let (s, e) = self.domains[k];
        (knots[s], knots[e])
    }

    pub fn region_interval(&self, knots: &[f64], r: usize) -> (f64, f64) {
        (knots[r], knots[r + 1])
    }
}

// ---------------------------------------------------------------------------
// 2D
// ---------------------------------------------------------------------------

/// Rectangular-grid dataset with hidden parameters. Value grids are indexed
/// `[i][j]` with `i` along x and `j` along y.
#[derive(Debug, Clone)]
pub struct HiddenDataset2D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zss: Vec<Vec<f64>>,
    tss: Vec<Vec<f64>>,
}

impl HiddenDataset2D {
    pub fn new(
        xs: Vec<f64>,
        ys: Vec<f64>,
        zss: Vec<Vec<f64>>,
        tss: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_knots("x", &xs)?;
        check_knots("y", &ys)?;
        if xs.len() < 3 {
            return Err(Error::TooFewRegions {
                axis: "x",
                got: xs.len().saturating_sub(1),
            });
        }
        if ys.len() < 3 {
            return Err(Error::TooFewRegions {
                axis: "y",
                got: ys.len().saturating_sub(1),
            });
        }
        for (what, grid) in [("zss", &zss), ("tss", &tss)] {
            if grid.len() != xs.len() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: xs.len(),
                    got: grid.len(),
                });
            }
            for col in grid.iter() {
                if col.len() != ys.len() {
                    return Err(Error::LengthMismatch {
                        what,
                        expected: ys.len(),
                        got: col.len(),
                    });
                }
            }
        }
        Ok(HiddenDataset2D { xs, ys, zss, tss })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn zss(&self) -> &[Vec<f64>] {
        &self.zss
    }

    pub fn tss(&self) -> &[Vec<f64>] {
        &self.tss
    }

    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.ys.len() - 1
    }

    /// Extended value pair at grid node `(i, j)`.
    pub fn value(&self, i: usize, j: usize) -> [f64; 2] {
        [self.zss[i][j], self.tss[i][j]]
    }

    pub fn z_range(&self) -> (f64, f64) {
        grid_min_max(&self.zss)
    }

    pub fn t_range(&self) -> (f64, f64) {
        grid_min_max(&self.tss)
    }
}

fn grid_min_max(g: &[Vec<f64>]) -> (f64, f64) {
    g.iter()
        .flat_map(|c| c.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// A rectangular domain in knot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Domain2D {
    pub sx: usize,
    pub ex: usize,
    pub sy: usize,
    pub ey: usize,
}

#[derive(Debug, Clone)]
pub struct Partition2D {
    n: usize,
    m: usize,
    domains: Vec<Domain2D>,
    gamma: Vec<usize>,
    orientations: Vec<(Orientation, Orientation)>,
}

impl Partition2D {
    /// `gamma` and `orientations` are in linearized region order: region
    /// `(i, j)` (zero-based) sits at index `j * n + i`, x index fastest.
    pub fn new(
        n: usize,
        m: usize,
        domains: Vec<Domain2D>,
        gamma: Vec<usize>,
        orientations: Vec<(Orientation, Orientation)>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRegions { axis: "x", got: n });
        }
        if m < 2 {
            return Err(Error::TooFewRegions { axis: "y", got: m });
        }
        let count = n * m;
        let l = domains.len();
        if l < 2 || l > count {
            return Err(Error::DomainCountOutOfRange { got: l, max: count });
        }
        for (k, d) in domains.iter().enumerate() {
            for (axis, s, e, knots) in [("x", d.sx, d.ex, n + 1), ("y", d.sy, d.ey, m + 1)] {
                if e >= knots || s >= e {
                    return Err(Error::DomainIndexOutOfRange {
                        domain: k,
                        axis,
                        lo: s,
                        hi: e,
                        knots,
                    });
                }
                if e - s < 2 {
                    return Err(Error::DomainTooSmall {
                        domain: k,
                        axis,
                        span: e - s,
                    });
                }
            }
        }
        if gamma.len() != count {
            return Err(Error::LengthMismatch {
                what: "gamma",
                expected: count,
                got: gamma.len(),
            });
        }
        for (r, &k) in gamma.iter().enumerate() {
            if k >= l {
                return Err(Error::GammaOutOfRange {
                    region: r,
                    got: k,
                    domains: l,
                });
            }
        }
        if orientations.len() != count {
            return Err(Error::LengthMismatch {
                what: "orientations",
                expected: count,
                got: orientations.len(),
            });
        }
        Ok(Partition2D {
            n,
            m,
            domains,
            gamma,
            orientations,
        })
    }

    pub fn nx(&self) -> usize {
        self.n
    }

    pub fn ny(&self) -> usize {
        self.m
    }

    pub fn region_count(&self) -> usize {
        self.n * self.m
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain2D] {
        &self.domains
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn orientations(&self) -> &[(Orientation, Orientation)] {
        &self.orientations
    }

    /// Linearized index of region `(i, j)`, both zero-based.
    pub fn region_index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Inverse of [`region_index`](Self::region_index).
    pub fn region_pair(&self, r: usize) -> (usize, usize) {
        (r % self.n, r / self.n)
    }

    pub fn region_in_domain(&self, r: usize, k: usize) -> bool {
        let (i, j) = self.region_pair(r);
        let d = &self.domains[k];
        d.sx <= i && i < d.ex && d.sy <= j && j < d.ey
    }

    pub fn domain_rect(&self, xs: &[f64], ys: &[f64], k: usize) -> ((f64, f64), (f64, f64)) {
        let d = &self.domains[k];
        ((xs[d.sx], xs[d.ex]), (ys[d.sy], ys[d.ey]))
    }

    pub fn region_rect(&self, xs: &[f64], ys: &[f64], r: usize) -> ((f64, f64), (f64, f64)) {
        let (i, j) = self.region_pair(r);
        ((xs[i], xs[i + 1]), (ys[j], ys[j + 1]))
    }
}

// ---------------------------------------------------------------------------
// Connection matrix
// ---------------------------------------------------------------------------

/// Row-stochastic matrix governing which map may follow which.
#[derive(Debug, Clone)]
pub struct ConnectionMatrix {
    rows: Vec<Vec<f64>>,
}

impl ConnectionMatrix {
    pub fn from_partition_1d(p: &Partition1D) -> Result<Self> {
        Self::build(p.region_count(), |s, t| p.region_in_domain(s, p.gamma()[t]))
    }

    pub fn from_partition_2d(p: &Partition2D) -> Result<Self> {
        Self::build(p.region_count(), |s, t| p.region_in_domain(s, p.gamma()[t]))
    }

    fn build<F: Fn(usize, usize) -> bool>(count: usize, supported: F) -> Result<Self> {
        let mut rows = Vec::with_capacity(count);
        for s in 0..count {
            let support: Vec<bool> = (0..count).map(|t| supported(s, t)).collect();
            let positive = support.iter().filter(|&&b| b).count();
            if positive == 0 {
                return Err(Error::RegionUncovered { region: s });
            }
            let w = 1.0 / positive as f64;
            rows.push(support.into_iter().map(|b| if b { w } else { 0.0 }).collect());
        }
        Ok(ConnectionMatrix { rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn entry(&self, s: usize, t: usize) -> f64 {
        self.rows[s][t]
    }

    /// Check non-negativity and that every row sums to 1 within `tol`.
    pub fn validate_stochastic(&self, tol: f64) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::MatrixNotStochastic {
                    row: i,
                    sum: f64::NAN,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::MatrixNotStochastic { row: i, sum });
            }
        }
        Ok(())
    }
}
