//! Bivariate recurrent map system over a rectangular grid: product endpoint
//! maps, transfinite boundary blends, the fixed-point solver and the 2D
//! chaos game.
//!
//! The per-region map is
//! `F_r(p, v) = S_r(L_r(p)) (v - l_r(p)) + r_r(L_r(p))`
//! where `l_r` blends the global bilinear data interpolant `g` along the
//! boundary of the region's domain and `r_r` blends it along the region
//! cell's own boundary. Both blends coincide with `g` on the respective
//! boundaries, which makes the domain-edge matching conditions hold by
//! construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{
    sample_lip_2d, BoundsMode, FactorLists, FactorQuad, FactorSet2D, BOUND_SAFETY,
    DEFAULT_SAMPLES_2D,
};
use crate::field::{grid_with_knots, pair_l1, pair_lerp, pair_sub, Mat2, Pair, Rect, SampledField2D};
use crate::partition::{HiddenDataset2D, Partition2D};
use crate::univariate::{box_alpha, padded_box, AffineMap, ContractionReport, RegionSupTerms};
use crate::verify::VerificationReport;
use crate::ConnectionMatrix;

/// Sample density per axis for the Lipschitz estimate of the offset maps.
const OFFSET_LIP_SAMPLES: usize = 129;
/// Per-edge samples for the build-time boundary matching check.
const BUILD_EDGE_SAMPLES: usize = 33;

/// Componentwise product of two affine endpoint maps.
#[derive(Debug, Clone, Copy)]
pub struct ProductMap {
    pub x_map: AffineMap,
    pub y_map: AffineMap,
}

impl ProductMap {
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.x_map.apply(x), self.y_map.apply(y))
    }

    #[inline]
    pub fn invert(&self, x: f64, y: f64) -> (f64, f64) {
        (self.x_map.invert(x), self.y_map.invert(y))
    }

    /// Max component contraction ratio.
    pub fn ratio(&self) -> f64 {
        self.x_map.a().abs().max(self.y_map.a().abs())
    }
}

/// The global bilinear data interpolant together with per-region blend
/// geometry. `l_eval` blends along domain boundaries, `r_eval` along region
/// cell boundaries; both reproduce `g` there exactly.
#[derive(Debug, Clone)]
pub struct BlendFunctions2D {
    g: SampledField2D,
    domain_rects: Vec<Rect>,
    cell_rects: Vec<Rect>,
}

impl BlendFunctions2D {
    /// Build the interpolant and blend geometry for a dataset/partition pair.
    pub fn build(dataset: &HiddenDataset2D, partition: &Partition2D) -> Result<Self> {
        let xs = dataset.xs().to_vec();
        let ys = dataset.ys().to_vec();
        let mut values = vec![[0.0; 2]; xs.len() * ys.len()];
        for iy in 0..ys.len() {
            for ix in 0..xs.len() {
                values[iy * xs.len() + ix] = dataset.value(ix, iy);
            }
        }
        let g = SampledField2D::new(xs, ys, values)?;
        let domain_rects = (0..partition.region_count())
            .map(|r| {
                partition.domain_rect(dataset.xs(), dataset.ys(), partition.gamma()[r])
            })
            .collect();
        let cell_rects = (0..partition.region_count())
            .map(|r| partition.region_rect(dataset.xs(), dataset.ys(), r))
            .collect();
        Ok(BlendFunctions2D {
            g,
            domain_rects,
            cell_rects,
        })
    }

    pub fn g(&self) -> &SampledField2D {
        &self.g
    }

    /// Transfinite blend of `g`'s traces on the boundary of `rect`.
    fn blend(&self, rect: Rect, x: f64, y: f64) -> Pair {
        let ((x0, x1), (y0, y1)) = rect;
        let u = (x - x0) / (x1 - x0);
        let v = (y - y0) / (y1 - y0);
        let left = self.g.eval(x0, y);
        let right = self.g.eval(x1, y);
        let bottom = self.g.eval(x, y0);
        let top = self.g.eval(x, y1);
        let c00 = self.g.eval(x0, y0);
        let c10 = self.g.eval(x1, y0);
        let c01 = self.g.eval(x0, y1);
        let c11 = self.g.eval(x1, y1);
        let mut out = [0.0; 2];
        for c in 0..2 {
            let lofted = (1.0 - u) * left[c] + u * right[c] + (1.0 - v) * bottom[c] + v * top[c];
            let corners = (1.0 - u) * (1.0 - v) * c00[c]
                + u * (1.0 - v) * c10[c]
                + (1.0 - u) * v * c01[c]
                + u * v * c11[c];
            out[c] = lofted - corners;
        }
        out
    }

    /// Domain-boundary blend of region `r` at a domain point.
    pub fn l_eval(&self, r: usize, x: f64, y: f64) -> Pair {
        self.blend(self.domain_rects[r], x, y)
    }

    /// Region-boundary blend of region `r` at a region point.
    pub fn r_eval(&self, r: usize, x: f64, y: f64) -> Pair {
        self.blend(self.cell_rects[r], x, y)
    }

    pub fn domain_rect(&self, r: usize) -> Rect {
        self.domain_rects[r]
    }

    pub fn cell_rect(&self, r: usize) -> Rect {
        self.cell_rects[r]
    }
}

#[derive(Debug, Clone)]
pub struct Solution2D {
    pub field: SampledField2D,
    pub iterations: usize,
    pub final_change: f64,
    pub converged: bool,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryCloud2D {
    /// (x, y, visible, hidden) rows in generation order, burn-in removed.
    pub points: Vec<[f64; 4]>,
    pub regions: Vec<usize>,
    pub seed: u64,
    pub burn_in: usize,
}

pub(crate) struct SweepPlan2D {
    nodes: Vec<PlanNode2>,
    pins: Vec<(usize, Pair)>,
}

struct PlanNode2 {
    base: usize,
    stride: usize,
    wx: f64,
    wy: f64,
    s: Mat2,
    c: Pair,
}

impl SweepPlan2D {
    fn apply(&self, values: &[Pair], out: &mut [Pair]) {
        out.par_iter_mut()
            .zip(self.nodes.par_iter())
            .for_each(|(o, nd)| {
                let bottom = pair_lerp(values[nd.base], values[nd.base + 1], nd.wx);
                let top = pair_lerp(
                    values[nd.base + nd.stride],
                    values[nd.base + nd.stride + 1],
                    nd.wx,
                );
                let v = pair_lerp(bottom, top, nd.wy);
                let sv = nd.s.apply(v);
                *o = [sv[0] + nd.c[0], sv[1] + nd.c[1]];
            });
    }

    fn pin(&self, out: &mut [Pair]) {
        for &(idx, v) in &self.pins {
            out[idx] = v;
        }
    }
}

/// The full bivariate map system.
#[derive(Debug, Clone)]
pub struct MapSystem2D {
    dataset: HiddenDataset2D,
    partition: Partition2D,
    factors: FactorSet2D,
    maps: Vec<ProductMap>,
    blends: BlendFunctions2D,
    /// Additive perturbation of `r_eval` per region; zero in normal use,
    /// poked by tests to drive the boundary check red.
    pub(crate) region_offsets: Vec<Pair>,
}

impl MapSystem2D {
    pub fn build(
        dataset: HiddenDataset2D,
        partition: Partition2D,
        factors: FactorLists,
    ) -> Result<Self> {
        Self::build_with_samples(dataset, partition, factors, DEFAULT_SAMPLES_2D)
    }

    pub fn build_with_samples(
        dataset: HiddenDataset2D,
        partition: Partition2D,
        factors: FactorLists,
        bound_samples: usize,
    ) -> Result<Self> {
        if partition.nx() != dataset.nx() || partition.ny() != dataset.ny() {
            return Err(Error::LengthMismatch {
                what: "partition regions",
                expected: dataset.nx() * dataset.ny(),
                got: partition.nx() * partition.ny(),
            });
        }
        let xs = dataset.xs();
        let ys = dataset.ys();
        let count = partition.region_count();

        let mut maps = Vec::with_capacity(count);
        for r in 0..count {
            let (i, j) = partition.region_pair(r);
            let (dx, dy) = partition.domain_rect(xs, ys, partition.gamma()[r]);
            let (ox, oy) = partition.orientations()[r];
            let x_map = AffineMap::new(dx, (xs[i], xs[i + 1]), ox).map_err(|e| match e {
                Error::NonContractiveMap { ratio, .. } => {
                    Error::NonContractiveMap { region: r, ratio }
                }
                other => other,
            })?;
            let y_map = AffineMap::new(dy, (ys[j], ys[j + 1]), oy).map_err(|e| match e {
                Error::NonContractiveMap { ratio, .. } => {
                    Error::NonContractiveMap { region: r, ratio }
                }
                other => other,
            })?;
            maps.push(ProductMap { x_map, y_map });
        }

        let blends = BlendFunctions2D::build(&dataset, &partition)?;

        let rects: Vec<Rect> = (0..count)
            .map(|r| partition.region_rect(xs, ys, r))
            .collect();
        let factors = FactorSet2D::build(&factors, &rects, bound_samples)?;

        let sys = MapSystem2D {
            region_offsets: vec![[0.0; 2]; count],
            dataset,
            partition,
            factors,
            maps,
            blends,
        };
        sys.check_corner_condition()?;
        sys.check_boundary_conditions(BUILD_EDGE_SAMPLES)?;
        Ok(sys)
    }

    pub fn dataset(&self) -> &HiddenDataset2D {
        &self.dataset
    }

    pub fn partition(&self) -> &Partition2D {
        &self.partition
    }

    pub fn factors(&self) -> &[FactorQuad] {
        self.factors.quads()
    }

    pub fn maps(&self) -> &[ProductMap] {
        &self.maps
    }

    pub fn blends(&self) -> &BlendFunctions2D {
        &self.blends
    }

    pub fn region_count(&self) -> usize {
        self.partition.region_count()
    }

    pub fn connection_matrix(&self) -> Result<ConnectionMatrix> {
        ConnectionMatrix::from_partition_2d(&self.partition)
    }

    pub fn has_factor_sup_warning(&self) -> bool {
        self.factors.quads().iter().any(|q| q.max_sup_est() >= 1.0)
    }

    /// Linearized region index of a point, half-open cells per axis.
    pub fn region_of(&self, x: f64, y: f64) -> usize {
        let xs = self.dataset.xs();
        let ys = self.dataset.ys();
        let i = xs.partition_point(|&k| k <= x).clamp(1, self.partition.nx()) - 1;
        let j = ys.partition_point(|&k| k <= y).clamp(1, self.partition.ny()) - 1;
        self.partition.region_index(i, j)
    }

    pub fn factor_matrix_at(&self, r: usize, x: f64, y: f64) -> Result<Mat2> {
        let q = &self.factors.quads()[r];
        Ok(Mat2 {
            a11: q.s.expr.eval2(x, y)?,
            a12: q.s_prime.expr.eval2(x, y)?,
            a21: q.s_tilde.expr.eval2(x, y)?,
            a22: q.s_tilde_prime.expr.eval2(x, y)?,
        })
    }

    fn r_with_offset(&self, r: usize, x: f64, y: f64) -> Pair {
        let v = self.blends.r_eval(r, x, y);
        let o = self.region_offsets[r];
        [v[0] + o[0], v[1] + o[1]]
    }

    fn f_at(&self, r: usize, x: f64, y: f64, v: Pair) -> Result<Pair> {
        let (lx, ly) = self.maps[r].apply(x, y);
        let s = self.factor_matrix_at(r, lx, ly)?;
        let l = self.blends.l_eval(r, x, y);
        let rr = self.r_with_offset(r, lx, ly);
        let sv = s.apply(pair_sub(v, l));
        Ok([sv[0] + rr[0], sv[1] + rr[1]])
    }

    fn domain_contains(&self, r: usize, x: f64, y: f64) -> bool {
        let ((x0, x1), (y0, y1)) = self.blends.domain_rect(r);
        let tx = 1e-9 * (x1 - x0);
        let ty = 1e-9 * (y1 - y0);
        x >= x0 - tx && x <= x1 + tx && y >= y0 - ty && y <= y1 + ty
    }

    /// Apply `F_r` to a domain point and value pair.
    pub fn apply_f(&self, r: usize, x: f64, y: f64, v: Pair) -> Result<Pair> {
        if !self.domain_contains(r, x, y) {
            return Err(Error::PointOutsideDomain { region: r, x });
        }
        self.f_at(r, x, y, v)
    }

    fn check_corner_condition(&self) -> Result<()> {
        let xs = self.dataset.xs();
        let ys = self.dataset.ys();
        for r in 0..self.region_count() {
            let (i, j) = self.partition.region_pair(r);
            let d = self.partition.domains()[self.partition.gamma()[r]];
            for ca in [d.sx, d.ex] {
                for cb in [d.sy, d.ey] {
                    let (px, py) = (xs[ca], ys[cb]);
                    let (lx, ly) = self.maps[r].apply(px, py);
                    let ti = if lx == xs[i] { i } else { i + 1 };
                    let tj = if ly == ys[j] { j } else { j + 1 };
                    let got = self.f_at(r, px, py, self.dataset.value(ca, cb))?;
                    let want = self.dataset.value(ti, tj);
                    let residual = pair_l1(pair_sub(got, want));
                    if residual > 1e-12 {
                        return Err(Error::EndpointCondition {
                            region: r,
                            residual,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn boundary_residual(&self, samples: usize) -> Result<(f64, usize)> {
        let mut max_residual = 0.0f64;
        let mut count = 0usize;
        for r in 0..self.region_count() {
            let ((x0, x1), (y0, y1)) = self.blends.domain_rect(r);
            for alpha in [x0, x1] {
                for s in 0..samples {
                    let t = s as f64 / (samples - 1) as f64;
                    let y = (1.0 - t) * y0 + t * y1;
                    let z = self.blends.g().eval(alpha, y);
                    let lhs = self.f_at(r, alpha, y, z)?;
                    let (lx, ly) = self.maps[r].apply(alpha, y);
                    let rhs = self.blends.g().eval(lx, ly);
                    max_residual = max_residual.max(pair_l1(pair_sub(lhs, rhs)));
                    count += 1;
                }
            }
            for beta in [y0, y1] {
                for s in 0..samples {
                    let t = s as f64 / (samples - 1) as f64;
                    let x = (1.0 - t) * x0 + t * x1;
                    let z = self.blends.g().eval(x, beta);
                    let lhs = self.f_at(r, x, beta, z)?;
                    let (lx, ly) = self.maps[r].apply(x, beta);
                    let rhs = self.blends.g().eval(lx, ly);
                    max_residual = max_residual.max(pair_l1(pair_sub(lhs, rhs)));
                    count += 1;
                }
            }
        }
        Ok((max_residual, count))
    }

    fn check_boundary_conditions(&self, samples: usize) -> Result<()> {
        let (residual, _) = self.boundary_residual(samples)?;
        if residual > 1e-9 {
            return Err(Error::BoundaryCondition {
                region: 0,
                residual,
            });
        }
        Ok(())
    }

    /// Sampled report of the domain-edge matching conditions: the map must
    /// carry `g`'s trace on every domain edge onto `g`'s trace on the image
    /// gridline.
    pub fn boundary_matching_check(&self, samples_per_edge: usize) -> Result<VerificationReport> {
        let samples = samples_per_edge.max(2);
        let (max_residual, count) = self.boundary_residual(samples)?;
        Ok(VerificationReport::new(
            "boundary_matching",
            max_residual,
            1e-9,
            count,
        ))
    }

    pub(crate) fn build_plan(
        &self,
        gx: &[f64],
        gy: &[f64],
        knot_ix: &[usize],
        knot_iy: &[usize],
    ) -> Result<SweepPlan2D> {
        let nx = gx.len();
        let mut nodes = Vec::with_capacity(nx * gy.len());
        for &y in gy.iter() {
            for &x in gx.iter() {
                let r = self.region_of(x, y);
                let (ux, uy) = self.maps[r].invert(x, y);
                let s = self.factor_matrix_at(r, x, y)?;
                let l = self.blends.l_eval(r, ux, uy);
                let rr = self.r_with_offset(r, x, y);
                let sl = s.apply(l);
                let c = [rr[0] - sl[0], rr[1] - sl[1]];
                let (cx, wx) = crate::field::locate(gx, ux);
                let (cy, wy) = crate::field::locate(gy, uy);
                nodes.push(PlanNode2 {
                    base: cy * nx + cx,
                    stride: nx,
                    wx,
                    wy,
                    s,
                    c,
                });
            }
        }
        // pin every node on a knot gridline to the data interpolant
        let on_x: Vec<bool> = {
            let mut v = vec![false; nx];
            for &i in knot_ix {
                v[i] = true;
            }
            v
        };
        let on_y: Vec<bool> = {
            let mut v = vec![false; gy.len()];
            for &j in knot_iy {
                v[j] = true;
            }
            v
        };
        let mut pins = Vec::new();
        for (iy, &y) in gy.iter().enumerate() {
            for (ix, &x) in gx.iter().enumerate() {
                if on_x[ix] || on_y[iy] {
                    pins.push((iy * nx + ix, self.blends.g().eval(x, y)));
                }
            }
        }
        Ok(SweepPlan2D { nodes, pins })
    }

    /// One operator application on the field's own grid (no pinning).
    pub fn rb_apply(&self, h: &SampledField2D) -> Result<SampledField2D> {
        let plan = self.build_plan(h.xs(), h.ys(), &[], &[])?;
        let mut out = vec![[0.0; 2]; h.values().len()];
        plan.apply(h.values(), &mut out);
        SampledField2D::new(h.xs().to_vec(), h.ys().to_vec(), out)
    }

    /// The data interpolant `g` sampled on a fresh grid.
    pub fn data_interpolant(&self, grid: (usize, usize)) -> SampledField2D {
        let (gx, _) = grid_with_knots(self.dataset.xs(), grid.0);
        let (gy, _) = grid_with_knots(self.dataset.ys(), grid.1);
        self.sample_g(gx, gy)
    }

    fn sample_g(&self, gx: Vec<f64>, gy: Vec<f64>) -> SampledField2D {
        let mut values = vec![[0.0; 2]; gx.len() * gy.len()];
        for (iy, &y) in gy.iter().enumerate() {
            for (ix, &x) in gx.iter().enumerate() {
                values[iy * gx.len() + ix] = self.blends.g().eval(x, y);
            }
        }
        SampledField2D::new(gx, gy, values).expect("generated grid is valid")
    }

    /// Iterate the operator from `g` until convergence, re-pinning the knot
    /// gridlines to `g` after every sweep.
    pub fn solve(&self, grid: (usize, usize), tol: f64, max_iter: usize) -> Result<Solution2D> {
        let need_x = 2 * (self.partition.nx() + 1);
        let need_y = 2 * (self.partition.ny() + 1);
        if grid.0 < need_x {
            return Err(Error::GridTooCoarse {
                needed: need_x,
                got: grid.0,
            });
        }
        if grid.1 < need_y {
            return Err(Error::GridTooCoarse {
                needed: need_y,
                got: grid.1,
            });
        }
        if !(tol > 0.0) {
            return Err(Error::BadSolverParams {
                what: "tol must be positive",
            });
        }
        if max_iter == 0 {
            return Err(Error::BadSolverParams {
                what: "max_iter must be at least 1",
            });
        }
        let (gx, knot_ix) = grid_with_knots(self.dataset.xs(), grid.0);
        let (gy, knot_iy) = grid_with_knots(self.dataset.ys(), grid.1);
        let plan = self.build_plan(&gx, &gy, &knot_ix, &knot_iy)?;
        let mut cur = self.sample_g(gx.clone(), gy.clone()).values().to_vec();
        let mut next = vec![[0.0; 2]; cur.len()];

        let mut iterations = 0;
        let mut final_change = f64::INFINITY;
        let mut converged = false;
        while iterations < max_iter {
            plan.apply(&cur, &mut next);
            plan.pin(&mut next);
            let change = cur
                .iter()
                .zip(next.iter())
                .map(|(a, b)| pair_l1(pair_sub(*b, *a)))
                .fold(0.0f64, f64::max);
            std::mem::swap(&mut cur, &mut next);
            iterations += 1;
            final_change = change;
            if !change.is_finite() {
                break;
            }
            if change <= tol {
                converged = true;
                break;
            }
        }

        Ok(Solution2D {
            field: SampledField2D::new(gx, gy, cur)?,
            iterations,
            final_change,
            converged,
            tol,
        })
    }

    /// Theorem-style contraction certificate for the bivariate system.
    pub fn contraction_report(&self, hidden_margin: f64) -> Result<ContractionReport> {
        let mut regions = Vec::with_capacity(self.region_count());
        let mut s_bar = 0.0f64;
        let mut max_sup_est = 0.0f64;
        for (r, q) in self.factors.quads().iter().enumerate() {
            let (col_v, col_h) = q.sup_columns_raw();
            s_bar = s_bar.max(col_v).max(col_h);
            max_sup_est = max_sup_est.max(q.max_sup_est());
            regions.push(RegionSupTerms {
                region: r,
                sup_s: q.s.sup_raw,
                sup_s_prime: q.s_prime.sup_raw,
                sup_s_tilde: q.s_tilde.sup_raw,
                sup_s_tilde_prime: q.s_tilde_prime.sup_raw,
                column_visible: col_v,
                column_hidden: col_h,
            });
        }

        let c_l = self.maps.iter().map(ProductMap::ratio).fold(0.0f64, f64::max);

        let l_s = self
            .factors
            .quads()
            .iter()
            .zip(self.maps.iter())
            .map(|(q, m)| {
                let (c1, c2) = q.lip_columns_est();
                m.ratio() * c1.max(c2)
            })
            .fold(0.0f64, f64::max);

        let mut l_q = 0.0f64;
        for r in 0..self.region_count() {
            let rect = self.blends.domain_rect(r);
            let lq = sample_lip_2d(
                |x, y| self.f_at(r, x, y, [0.0, 0.0]).map(|p| p[0]),
                rect,
                OFFSET_LIP_SAMPLES,
            )?;
            let lqt = sample_lip_2d(
                |x, y| self.f_at(r, x, y, [0.0, 0.0]).map(|p| p[1]),
                rect,
                OFFSET_LIP_SAMPLES,
            )?;
            l_q = l_q.max((lq + lqt) * BOUND_SAFETY);
        }

        let vis = padded_box(self.dataset.z_range(), hidden_margin);
        let hid = padded_box(self.dataset.t_range(), hidden_margin);
        let alpha = box_alpha(vis, hid);

        let denom = l_s * alpha + l_q;
        let theta_max = if denom > 0.0 {
            Some((1.0 - c_l) / denom)
        } else {
            None
        };
        let theta_positive = theta_max.map_or(c_l < 1.0, |t| t > 0.0);
        let certified = s_bar < 1.0 && max_sup_est < 1.0 && theta_positive;

        let bounds_mode = if self.factors.quads().iter().all(|q| q.all_user_supplied()) {
            BoundsMode::UserSupplied
        } else {
            BoundsMode::Estimated
        };

        Ok(ContractionReport {
            s_bar,
            regions,
            l_l: c_l,
            l_s,
            l_q,
            alpha,
            theta_max,
            certified,
            max_factor_sup_est: max_sup_est,
            bounds_mode,
            hidden_margin,
            value_box: (vis, hid),
        })
    }

    /// The 2D recurrent chaos game over linearized regions.
    pub fn chaos_game(
        &self,
        matrix: &ConnectionMatrix,
        n_points: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<TrajectoryCloud2D> {
        let count = self.region_count();
        if matrix.size() != count {
            return Err(Error::MatrixSizeMismatch {
                expected: count,
                got: matrix.size(),
            });
        }
        matrix.validate_stochastic(1e-9)?;
        if n_points <= burn_in {
            return Err(Error::BadChaosParams {
                what: "n_points must exceed burn_in",
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = self.dataset.xs()[0];
        let mut y = self.dataset.ys()[0];
        let mut v = self.dataset.value(0, 0);
        let mut region = 0usize;

        let keep = n_points - burn_in;
        let mut points = Vec::with_capacity(keep);
        let mut regions = Vec::with_capacity(keep);
        for step in 0..n_points {
            let t = crate::univariate::draw_row(matrix.rows()[region].as_slice(), rng.gen::<f64>());
            if !self.domain_contains(t, x, y) {
                return Err(Error::ChaosInconsistency { region: t, x });
            }
            let new_v = self.f_at(t, x, y, v)?;
            let (nx, ny) = self.maps[t].apply(x, y);
            x = nx;
            y = ny;
            v = new_v;
            region = t;
            if step >= burn_in {
                points.push([x, y, v[0], v[1]]);
                regions.push(region);
            }
        }
        Ok(TrajectoryCloud2D {
            points,
            regions,
            seed,
            burn_in,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::partition::{Domain2D, Orientation};
    use crate::univariate::DEFAULT_HIDDEN_MARGIN;

    /// Bivariate surface dataset used across the tests: 5x5 values, zero
    /// hidden layer.
    pub(crate) fn table_dataset() -> HiddenDataset2D {
        let knots = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        // column x, row y layout transposed into zss[i][j]
        let rows: [[f64; 5]; 5] = [
            [46.0, 32.0, 65.0, 73.0, 39.0],
            [32.0, 23.0, 84.0, 33.0, 29.0],
            [76.0, 88.0, 58.0, 73.0, 88.0],
            [62.0, 79.0, 33.0, 86.0, 43.0],
            [49.0, 23.0, 39.0, 76.0, 32.0],
        ];
        let mut zss = vec![vec![0.0; 5]; 5];
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                zss[i][j] = v;
            }
        }
        HiddenDataset2D::new(knots.clone(), knots, zss, vec![vec![0.0; 5]; 5]).unwrap()
    }

    pub(crate) fn quadrant_partition() -> Partition2D {
        let domains = vec![
            Domain2D { sx: 0, ex: 2, sy: 0, ey: 2 },
            Domain2D { sx: 2, ex: 4, sy: 0, ey: 2 },
            Domain2D { sx: 0, ex: 2, sy: 2, ey: 4 },
            Domain2D { sx: 2, ex: 4, sy: 2, ey: 4 },
        ];
        let mut gamma = vec![0; 16];
        for j in 0..4 {
            for i in 0..4 {
                gamma[j * 4 + i] = (if i < 2 { 0 } else { 1 }) + (if j < 2 { 0 } else { 2 });
            }
        }
        Partition2D::new(
            4,
            4,
            domains,
            gamma,
            vec![(Orientation::Plus, Orientation::Plus); 16],
        )
        .unwrap()
    }

    fn const_table(t: [[f64; 4]; 4]) -> Vec<Expr> {
        // region (i, j) at linear index j*4 + i reads entry [i][j]
        let mut v = Vec::with_capacity(16);
        for j in 0..4 {
            for i in 0..4 {
                v.push(Expr::Num(t[i][j]));
            }
        }
        v
    }

    pub(crate) fn config1_factors_2d() -> FactorLists {
        let s = [
            [0.9, 0.6, -0.9, 0.7],
            [-0.94, 0.95, 0.3, 0.85],
            [0.5, -0.99, 0.86, 0.79],
            [0.87, 0.92, 0.75, -0.87],
        ];
        let st = [
            [-0.4, 0.9, -0.65, 0.66],
            [0.9, 0.36, 0.27, 0.25],
            [0.91, -0.89, 0.9, 0.85],
            [0.53, 0.96, -0.49, 0.39],
        ];
        let stp = [
            [0.53, 0.03, 0.27, 0.28],
            [0.09, 0.55, 0.64, 0.72],
            [0.05, 0.01, 0.02, 0.11],
            [0.41, 0.03, 0.48, 0.56],
        ];
        FactorLists::from_exprs(
            const_table(s),
            const_table(st),
            const_table([[0.0; 4]; 4]),
            const_table(stp),
        )
    }

    pub(crate) fn zero_factors_2d() -> FactorLists {
        let zeros = || (0..16).map(|_| Expr::Num(0.0)).collect::<Vec<_>>();
        FactorLists::from_exprs(zeros(), zeros(), zeros(), zeros())
    }

    fn mild_factors_2d() -> FactorLists {
        let c = |v: f64| (0..16).map(|_| Expr::Num(v)).collect::<Vec<_>>();
        FactorLists::from_exprs(c(0.3), c(0.2), c(0.1), c(0.1))
    }

    fn build_zero() -> MapSystem2D {
        MapSystem2D::build(table_dataset(), quadrant_partition(), zero_factors_2d()).unwrap()
    }

    fn build_config1() -> MapSystem2D {
        MapSystem2D::build(table_dataset(), quadrant_partition(), config1_factors_2d()).unwrap()
    }

    #[test]
    fn blends_coincide_with_g_on_boundaries() {
        let ds = table_dataset();
        let p = quadrant_partition();
        let blends = BlendFunctions2D::build(&ds, &p).unwrap();
        // r at region corner (x1, y1) must be the data value 23
        let r = p.region_index(0, 0);
        let v = blends.r_eval(r, 0.25, 0.25);
        assert_eq!(v[0], 23.0);
        // l equals g along the domain edge x = 0
        let mut worst = 0.0f64;
        for s in 0..1000 {
            let y = 0.5 * s as f64 / 999.0;
            let l = blends.l_eval(r, 0.0, y);
            let g = blends.g().eval(0.0, y);
            worst = worst.max(pair_l1(pair_sub(l, g)));
        }
        assert!(worst <= 1e-12, "worst = {worst}");
        // l at a domain corner is the corner data value
        assert_eq!(blends.l_eval(r, 0.5, 0.5)[0], 58.0);
    }

    #[test]
    fn zero_factor_f_is_cell_interpolant() {
        let sys = build_zero();
        let r = sys.partition().region_index(0, 0);
        let v = sys.apply_f(r, 0.25, 0.25, [999.0, -999.0]).unwrap();
        // image of the domain midpoint is the cell midpoint (0.125, 0.125);
        // bilinear mean of 46, 32, 32, 23
        assert!((v[0] - 33.25).abs() < 1e-12);
    }

    #[test]
    fn corner_condition_holds_for_config1() {
        // verified inside build; reaching here means residual <= 1e-12
        build_config1();
    }

    #[test]
    fn boundary_matching_passes_and_perturbation_fails() {
        let mut sys = build_config1();
        let rep = sys.boundary_matching_check(200).unwrap();
        assert!(rep.pass, "residual = {}", rep.max_residual);
        assert!(rep.max_residual <= 1e-9);

        sys.region_offsets[3] = [1.0, 0.0];
        let rep = sys.boundary_matching_check(200).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn zero_factor_solution_is_bilinear() {
        let sys = build_zero();
        let sol = sys.solve((65, 65), 1e-12, 10).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 2);
        assert!((sol.field.f1(0.125, 0.125) - 33.25).abs() < 1e-12);
        // knots match the data exactly
        for i in 0..5 {
            for j in 0..5 {
                let x = sys.dataset().xs()[i];
                let y = sys.dataset().ys()[j];
                assert_eq!(sol.field.f1(x, y), sys.dataset().zss()[i][j]);
            }
        }
    }

    #[test]
    fn config1_solution_interpolates_and_matches_oracle_probe() {
        let sys = build_config1();
        let sol = sys.solve((257, 257), 1e-9, 4000).unwrap();
        assert!(sol.converged, "final change {}", sol.final_change);
        for i in 0..5 {
            for j in 0..5 {
                let x = sys.dataset().xs()[i];
                let y = sys.dataset().ys()[j];
                assert!(
                    (sol.field.f1(x, y) - sys.dataset().zss()[i][j]).abs() < 1e-9,
                    "knot ({i},{j})"
                );
            }
        }
        // frozen from the independent 513x513 brute-force oracle
        assert!(
            (sol.field.f1(0.375, 0.625) - 73.95).abs() < 1e-4,
            "got {}",
            sol.field.f1(0.375, 0.625)
        );
        assert!((sol.field.f1(0.125, 0.125) - 2.875).abs() < 1e-4);
    }

    #[test]
    fn report_config1_uncertified() {
        let sys = build_config1();
        let rep = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
        assert!(rep.s_bar >= 1.3);
        assert!(!rep.certified);
        // region (1,1): columns (|0.9| + |-0.4|, 0 + 0.53)
        assert!((rep.regions[0].column_visible - 1.3).abs() < 1e-12);
        assert!((rep.regions[0].column_hidden - 0.53).abs() < 1e-12);
    }

    #[test]
    fn report_mild_certified() {
        let sys =
            MapSystem2D::build(table_dataset(), quadrant_partition(), mild_factors_2d()).unwrap();
        let rep = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
        assert!((rep.s_bar - 0.5).abs() < 1e-12);
        assert!(rep.certified);
        assert_eq!(rep.l_l, 0.5);
    }

    #[test]
    fn chaos_game_2d_basics() {
        let sys =
            MapSystem2D::build(table_dataset(), quadrant_partition(), mild_factors_2d()).unwrap();
        let m = sys.connection_matrix().unwrap();
        let cloud = sys.chaos_game(&m, 2000, 50, 11).unwrap();
        assert_eq!(cloud.points.len(), 1950);
        for p in &cloud.points {
            assert!(p[0] >= 0.0 && p[0] <= 1.0);
            assert!(p[1] >= 0.0 && p[1] <= 1.0);
        }
        let cloud2 = sys.chaos_game(&m, 2000, 50, 11).unwrap();
        assert_eq!(cloud.points, cloud2.points);
    }

    #[test]
    fn operator_fixes_g_on_gridlines_for_admissible_fields() {
        let sys = build_config1();
        // start from g on a grid, perturb strictly inside cells
        let mut h = sys.data_interpolant((33, 33));
        let xs: Vec<f64> = h.xs().to_vec();
        let ys: Vec<f64> = h.ys().to_vec();
        let knots = sys.dataset().xs();
        let is_knot = |v: f64, ks: &[f64]| ks.contains(&v);
        for (iy, &y) in ys.iter().enumerate() {
            for (ix, &x) in xs.iter().enumerate() {
                if !is_knot(x, knots) && !is_knot(y, sys.dataset().ys()) {
                    let idx = iy * xs.len() + ix;
                    h.values_mut()[idx][0] += ((ix * 7 + iy * 13) % 10) as f64 - 4.5;
                    h.values_mut()[idx][1] += ((ix * 3 + iy * 5) % 6) as f64 - 2.5;
                }
            }
        }
        let th = sys.rb_apply(&h).unwrap();
        let mut worst = 0.0f64;
        for (iy, &y) in ys.iter().enumerate() {
            for (ix, &x) in xs.iter().enumerate() {
                if is_knot(x, knots) || is_knot(y, sys.dataset().ys()) {
                    let got = th.values()[iy * xs.len() + ix];
                    let want = h.values()[iy * xs.len() + ix];
                    worst = worst.max(pair_l1(pair_sub(got, want)));
                }
            }
        }
        assert!(worst <= 1e-9, "worst gridline drift {worst}");
    }
}
