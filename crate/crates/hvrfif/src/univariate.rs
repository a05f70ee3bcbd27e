//! One-variable recurrent map system: endpoint maps, the vector-valued map
//! family, the fixed-point solver and the chaos-game sampler.
//!
//! Each region `I_i` carries an affine contraction `L_i` from its assigned
//! domain onto the region and a map
//! `F_i(x, v) = S_i(L_i(x)) (v - g_k(x)) + h_i(L_i(x))`
//! where `g_k` interpolates the domain-endpoint data, `h_i` the
//! region-endpoint data and `S_i` is the 2x2 factor matrix. This form pins
//! the domain-endpoint data to the region-endpoint data exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{
    sample_lip_1d, BoundsMode, FactorLists, FactorQuad, FactorSet1D, BOUND_SAFETY,
    DEFAULT_SAMPLES_1D,
};
use crate::field::{
    grid_with_knots, pair_l1, pair_lerp, pair_sub, Mat2, Pair, SampledField1D,
};
use crate::partition::{HiddenDataset1D, Orientation, Partition1D};
use crate::ConnectionMatrix;

/// Default padding of the hidden-value bounding box, as a fraction of the
/// data range per axis.
pub const DEFAULT_HIDDEN_MARGIN: f64 = 0.5;

/// Tolerance for the build-time endpoint-condition check.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Affine endpoint map from a domain interval onto a region interval.
///
/// Evaluation is anchored at the interval endpoints so that endpoints map to
/// endpoints exactly in floating point.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    a: f64,
    b: f64,
    domain: (f64, f64),
    region: (f64, f64),
    orientation: Orientation,
}

impl AffineMap {
    /// The spec'd `make_L`: build the contraction sending the domain's
    /// endpoint set onto the region's. Fails unless `|slope| < 1`.
    pub fn new(domain: (f64, f64), region: (f64, f64), orientation: Orientation) -> Result<Self> {
        Self::with_region_index(domain, region, orientation, usize::MAX)
    }

    fn with_region_index(
        domain: (f64, f64),
        region: (f64, f64),
        orientation: Orientation,
        index: usize,
    ) -> Result<Self> {
        let span = domain.1 - domain.0;
        let a = match orientation {
            Orientation::Plus => (region.1 - region.0) / span,
            Orientation::Minus => (region.0 - region.1) / span,
        };
        if a == 0.0 {
            return Err(Error::DegenerateMap { region: index });
        }
        if a.abs() >= 1.0 {
            return Err(Error::NonContractiveMap {
                region: index,
                ratio: a.abs(),
            });
        }
        let b = match orientation {
            Orientation::Plus => region.0 - a * domain.0,
            Orientation::Minus => region.1 - a * domain.0,
        };
        Ok(AffineMap {
            a,
            b,
            domain,
            region,
            orientation,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn region(&self) -> (f64, f64) {
        self.region
    }

    /// Map a domain point into the region (endpoint-exact).
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let t = (x - self.domain.0) / (self.domain.1 - self.domain.0);
        match self.orientation {
            Orientation::Plus => (1.0 - t) * self.region.0 + t * self.region.1,
            Orientation::Minus => (1.0 - t) * self.region.1 + t * self.region.0,
        }
    }

    /// Map a region point back into the domain (endpoint-exact).
    #[inline]
    pub fn invert(&self, x: f64) -> f64 {
        let t = (x - self.region.0) / (self.region.1 - self.region.0);
        match self.orientation {
            Orientation::Plus => (1.0 - t) * self.domain.0 + t * self.domain.1,
            Orientation::Minus => (1.0 - t) * self.domain.1 + t * self.domain.0,
        }
    }

    fn contains(&self, x: f64) -> bool {
        let tol = 1e-9 * (self.domain.1 - self.domain.0).abs();
        x >= self.domain.0 - tol && x <= self.domain.1 + tol
    }
}

/// Vector-valued line through two data points, evaluated endpoint-exactly.
#[derive(Debug, Clone, Copy)]
struct Line2 {
    x0: f64,
    x1: f64,
    v0: Pair,
    v1: Pair,
}

impl Line2 {
    #[inline]
    fn eval(&self, x: f64) -> Pair {
        let t = (x - self.x0) / (self.x1 - self.x0);
        pair_lerp(self.v0, self.v1, t)
    }
}

/// Convergence metadata alongside the solved field.
#[derive(Debug, Clone)]
pub struct Solution1D {
    pub field: SampledField1D,
    pub iterations: usize,
    pub final_change: f64,
    pub converged: bool,
    pub tol: f64,
}

/// Sup terms of one region's factor matrix, as reported by the certificate.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSupTerms {
    pub region: usize,
    pub sup_s: f64,
    pub sup_s_prime: f64,
    pub sup_s_tilde: f64,
    pub sup_s_tilde_prime: f64,
    /// |s| + |s~| column sum.
    pub column_visible: f64,
    /// |s'| + |s~'| column sum.
    pub column_hidden: f64,
}

/// Contraction certificate. `s_bar` uses raw sampled sups (exact for constant
/// factors); the `certified` flag additionally requires every individual
/// safety-inflated sup estimate to stay below 1.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub s_bar: f64,
    pub regions: Vec<RegionSupTerms>,
    /// Max contraction ratio of the coordinate maps (`L_L` in 1D, `c_L` in 2D).
    pub l_l: f64,
    pub l_s: f64,
    pub l_q: f64,
    pub alpha: f64,
    /// Upper bound on the metric weight; `None` when unconstrained.
    pub theta_max: Option<f64>,
    pub certified: bool,
    pub max_factor_sup_est: f64,
    pub bounds_mode: BoundsMode,
    pub hidden_margin: f64,
    /// Padded bounding box of the (visible, hidden) values.
    pub value_box: ((f64, f64), (f64, f64)),
}

impl ContractionReport {
    /// Weight for the sampled metric check: half the admissible bound, or 1
    /// when the bound is unconstrained.
    pub fn theta_check(&self) -> f64 {
        match self.theta_max {
            Some(t) if t.is_finite() => t / 2.0,
            _ => 1.0,
        }
    }

    /// Contraction constant of the point maps under the weighted metric.
    pub fn metric_ratio(&self) -> f64 {
        let theta = self.theta_check();
        (self.l_l + theta * (self.l_s * self.alpha + self.l_q)).max(self.s_bar)
    }
}

pub(crate) fn padded_box(range: (f64, f64), margin: f64) -> (f64, f64) {
    let pad = margin * (range.1 - range.0);
    (range.0 - pad, range.1 + pad)
}

pub(crate) fn box_alpha(vis: (f64, f64), hid: (f64, f64)) -> f64 {
    vis.0.abs().max(vis.1.abs()) + hid.0.abs().max(hid.1.abs())
}

/// Attractor sample produced by the recurrent chaos game.
#[derive(Debug, Clone)]
pub struct TrajectoryCloud1D {
    /// (x, visible, hidden) triples in generation order, burn-in removed.
    pub points: Vec<[f64; 3]>,
    /// Region index of each retained point.
    pub regions: Vec<usize>,
    pub seed: u64,
    pub burn_in: usize,
}

/// Precomputed per-node sweep data: the operator application at a grid node
/// reduces to a gather, a 2x2 multiply and an add.
pub(crate) struct SweepPlan1D {
    nodes: Vec<PlanNode>,
    pins: Vec<(usize, Pair)>,
}

struct PlanNode {
    cell: usize,
    w: f64,
    s: Mat2,
    c: Pair,
}

impl SweepPlan1D {
    fn apply(&self, values: &[Pair], out: &mut [Pair]) {
        out.par_iter_mut()
            .zip(self.nodes.par_iter())
            .for_each(|(o, nd)| {
                let v = pair_lerp(values[nd.cell], values[nd.cell + 1], nd.w);
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

/// The full one-variable map system.
#[derive(Debug, Clone)]
pub struct MapSystem1D {
    dataset: HiddenDataset1D,
    partition: Partition1D,
    factors: FactorSet1D,
    maps: Vec<AffineMap>,
    domain_baselines: Vec<Line2>,
    region_baselines: Vec<Line2>,
}

impl MapSystem1D {
    /// Build the system, estimating factor bounds with the default sample
    /// density.
    pub fn build(
        dataset: HiddenDataset1D,
        partition: Partition1D,
        factors: FactorLists,
    ) -> Result<Self> {
        Self::build_with_samples(dataset, partition, factors, DEFAULT_SAMPLES_1D)
    }

    pub fn build_with_samples(
        dataset: HiddenDataset1D,
        partition: Partition1D,
        factors: FactorLists,
        bound_samples: usize,
    ) -> Result<Self> {
        let n = dataset.region_count();
        if partition.region_count() != n {
            return Err(Error::LengthMismatch {
                what: "partition regions",
                expected: n,
                got: partition.region_count(),
            });
        }
        let xs = dataset.xs();

        let mut maps = Vec::with_capacity(n);
        for r in 0..n {
            let domain = partition.domain_interval(xs, partition.gamma()[r]);
            let region = partition.region_interval(xs, r);
            maps.push(AffineMap::with_region_index(
                domain,
                region,
                partition.orientations()[r],
                r,
            )?);
        }

        let domain_baselines: Vec<Line2> = (0..partition.domain_count())
            .map(|k| {
                let (s, e) = partition.domains()[k];
                Line2 {
                    x0: xs[s],
                    x1: xs[e],
                    v0: dataset.value(s),
                    v1: dataset.value(e),
                }
            })
            .collect();
        let region_baselines: Vec<Line2> = (0..n)
            .map(|r| Line2 {
                x0: xs[r],
                x1: xs[r + 1],
                v0: dataset.value(r),
                v1: dataset.value(r + 1),
            })
            .collect();

        let regions: Vec<(f64, f64)> = (0..n).map(|r| partition.region_interval(xs, r)).collect();
        let factors = FactorSet1D::build(&factors, &regions, bound_samples)?;

        let sys = MapSystem1D {
            dataset,
            partition,
            factors,
            maps,
            domain_baselines,
            region_baselines,
        };
        sys.check_endpoint_condition()?;
        Ok(sys)
    }

    fn check_endpoint_condition(&self) -> Result<()> {
        for r in 0..self.region_count() {
            let (s, e) = self.partition.domains()[self.partition.gamma()[r]];
            for knot in [s, e] {
                let x = self.dataset.xs()[knot];
                let image = self.maps[r].apply(x);
                let target = if image == self.dataset.xs()[r] {
                    self.dataset.value(r)
                } else {
                    self.dataset.value(r + 1)
                };
                let got = self.f_at(r, x, self.dataset.value(knot));
                let residual = pair_l1(pair_sub(got, target));
                if residual > ENDPOINT_TOL {
                    return Err(Error::EndpointCondition {
                        region: r,
                        residual,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dataset(&self) -> &HiddenDataset1D {
        &self.dataset
    }

    pub fn partition(&self) -> &Partition1D {
        &self.partition
    }

    pub fn factors(&self) -> &[FactorQuad] {
        self.factors.quads()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn region_count(&self) -> usize {
        self.partition.region_count()
    }

    pub fn connection_matrix(&self) -> Result<ConnectionMatrix> {
        ConnectionMatrix::from_partition_1d(&self.partition)
    }

    /// Any safety-inflated factor sup at or above 1? Such systems build but
    /// are not certified.
    pub fn has_factor_sup_warning(&self) -> bool {
        self.factors.quads().iter().any(|q| q.max_sup_est() >= 1.0)
    }

    /// Region index of a point, half-open cells with the last knot assigned
    /// to the last region.
    pub fn region_of(&self, x: f64) -> usize {
        let xs = self.dataset.xs();
        let idx = xs.partition_point(|&k| k <= x);
        idx.clamp(1, self.region_count()) - 1
    }

    /// Factor matrix of region `r` evaluated at a region point.
    pub fn factor_matrix_at(&self, r: usize, x: f64) -> Result<Mat2> {
        let q = &self.factors.quads()[r];
        Ok(Mat2 {
            a11: q.s.expr.eval1(x)?,
            a12: q.s_prime.expr.eval1(x)?,
            a21: q.s_tilde.expr.eval1(x)?,
            a22: q.s_tilde_prime.expr.eval1(x)?,
        })
    }

    fn f_at(&self, r: usize, x: f64, v: Pair) -> Pair {
        let lx = self.maps[r].apply(x);
        let s = self
            .factor_matrix_at(r, lx)
            .expect("factor evaluation checked at build");
        let g = self.domain_baselines[self.partition.gamma()[r]].eval(x);
        let h = self.region_baselines[r].eval(lx);
        let sv = s.apply(pair_sub(v, g));
        [sv[0] + h[0], sv[1] + h[1]]
    }

    /// Apply `F_r` to a domain point and value pair.
    pub fn apply_f(&self, r: usize, x: f64, v: Pair) -> Result<Pair> {
        if !self.maps[r].contains(x) {
            return Err(Error::PointOutsideDomain { region: r, x });
        }
        let lx = self.maps[r].apply(x);
        let s = self.factor_matrix_at(r, lx)?;
        let g = self.domain_baselines[self.partition.gamma()[r]].eval(x);
        let h = self.region_baselines[r].eval(lx);
        let sv = s.apply(pair_sub(v, g));
        Ok([sv[0] + h[0], sv[1] + h[1]])
    }

    /// The offset `Q_r(x) = F_r(x, 0)` of the affine map family.
    pub fn q_at(&self, r: usize, x: f64) -> Result<Pair> {
        self.apply_f(r, x, [0.0, 0.0])
    }

    pub(crate) fn build_plan(&self, grid: &[f64], knot_indices: &[usize]) -> Result<SweepPlan1D> {
        let mut nodes = Vec::with_capacity(grid.len());
        for &x in grid {
            let r = self.region_of(x);
            let u = self.maps[r].invert(x);
            // S and the region baseline take L(u) = x directly; only the
            // field gather happens at the preimage.
            let s = self.factor_matrix_at(r, x)?;
            let g = self.domain_baselines[self.partition.gamma()[r]].eval(u);
            let h = self.region_baselines[r].eval(x);
            let sg = s.apply(g);
            let c = [h[0] - sg[0], h[1] - sg[1]];
            let (cell, w) = crate::field::locate(grid, u);
            nodes.push(PlanNode { cell, w, s, c });
        }
        let pins = knot_indices
            .iter()
            .enumerate()
            .map(|(k, &idx)| (idx, self.dataset.value(k)))
            .collect();
        Ok(SweepPlan1D { nodes, pins })
    }

    /// One application of the operator `(Th)(x) = F(L^{-1}(x), h(L^{-1}(x)))`
    /// on the field's own grid. Knot values are not pinned here.
    pub fn rb_apply(&self, h: &SampledField1D) -> Result<SampledField1D> {
        let plan = self.build_plan(h.grid(), &[])?;
        let mut out = vec![[0.0; 2]; h.len()];
        plan.apply(h.values(), &mut out);
        SampledField1D::new(h.grid().to_vec(), out)
    }

    /// Piecewise-linear interpolant of the extended data on a fresh grid.
    pub fn data_interpolant(&self, grid_points: usize) -> SampledField1D {
        let (grid, _) = grid_with_knots(self.dataset.xs(), grid_points);
        self.data_interpolant_on(grid)
    }

    fn data_interpolant_on(&self, grid: Vec<f64>) -> SampledField1D {
        let knots = SampledField1D::new(
            self.dataset.xs().to_vec(),
            (0..self.dataset.xs().len())
                .map(|i| self.dataset.value(i))
                .collect(),
        )
        .expect("dataset knots are a valid grid");
        let values = grid.iter().map(|&x| knots.eval(x)).collect();
        SampledField1D::new(grid, values).expect("generated grid is valid")
    }

    /// Iterate the operator from the data interpolant until the sup-norm
    /// change drops to `tol` or `max_iter` sweeps pass. Knot values are
    /// pinned to the data after every sweep.
    pub fn solve(&self, grid_points: usize, tol: f64, max_iter: usize) -> Result<Solution1D> {
        let needed = 2 * (self.region_count() + 1);
        if grid_points < needed {
            return Err(Error::GridTooCoarse {
                needed,
                got: grid_points,
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
        let (grid, knot_indices) = grid_with_knots(self.dataset.xs(), grid_points);
        let plan = self.build_plan(&grid, &knot_indices)?;
        let mut cur = self.data_interpolant_on(grid.clone()).values().to_vec();
        let mut next = vec![[0.0; 2]; grid.len()];

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

        Ok(Solution1D {
            field: SampledField1D::new(grid, cur)?,
            iterations,
            final_change,
            converged,
            tol,
        })
    }

    /// Theorem-style contraction certificate.
    pub fn contraction_report(&self, hidden_margin: f64) -> Result<ContractionReport> {
        let n = self.region_count();
        let mut regions = Vec::with_capacity(n);
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

        let l_l = self
            .maps
            .iter()
            .map(|m| m.a().abs())
            .fold(0.0f64, f64::max);

        let l_s = self
            .factors
            .quads()
            .iter()
            .zip(self.maps.iter())
            .map(|(q, m)| {
                let (c1, c2) = q.lip_columns_est();
                m.a().abs() * c1.max(c2)
            })
            .fold(0.0f64, f64::max);

        let mut l_q = 0.0f64;
        for r in 0..n {
            let domain = self
                .partition
                .domain_interval(self.dataset.xs(), self.partition.gamma()[r]);
            let lq = sample_lip_1d(
                |x| self.apply_f(r, x, [0.0, 0.0]).map(|p| p[0]),
                domain,
                DEFAULT_SAMPLES_1D,
            )?;
            let lqt = sample_lip_1d(
                |x| self.apply_f(r, x, [0.0, 0.0]).map(|p| p[1]),
                domain,
                DEFAULT_SAMPLES_1D,
            )?;
            l_q = l_q.max((lq + lqt) * BOUND_SAFETY);
        }

        let vis = padded_box(self.dataset.y_range(), hidden_margin);
        let hid = padded_box(self.dataset.z_range(), hidden_margin);
        let alpha = box_alpha(vis, hid);

        let denom = l_s * alpha + l_q;
        let theta_max = if denom > 0.0 {
            Some((1.0 - l_l) / denom)
        } else {
            None
        };
        let theta_positive = theta_max.map_or(l_l < 1.0, |t| t > 0.0);
        let certified = s_bar < 1.0 && max_sup_est < 1.0 && theta_positive;

        let bounds_mode = if self.factors.quads().iter().all(|q| q.all_user_supplied()) {
            BoundsMode::UserSupplied
        } else {
            BoundsMode::Estimated
        };

        Ok(ContractionReport {
            s_bar,
            regions,
            l_l,
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

    /// Sample the attractor by the recurrent chaos game. Generates
    /// `n_points` steps from `(x_0, value_0)` and discards the first
    /// `burn_in`. Deterministic for a fixed seed.
    pub fn chaos_game(
        &self,
        matrix: &ConnectionMatrix,
        n_points: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<TrajectoryCloud1D> {
        let n = self.region_count();
        if matrix.size() != n {
            return Err(Error::MatrixSizeMismatch {
                expected: n,
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
        let mut v = self.dataset.value(0);
        let mut region = 0usize;

        let keep = n_points - burn_in;
        let mut points = Vec::with_capacity(keep);
        let mut regions = Vec::with_capacity(keep);
        for step in 0..n_points {
            let t = draw_row(matrix.rows()[region].as_slice(), rng.gen::<f64>());
            if !self.maps[t].contains(x) {
                return Err(Error::ChaosInconsistency { region: t, x });
            }
            let new_v = self.apply_f(t, x, v)?;
            let new_x = self.maps[t].apply(x);
            x = new_x;
            v = new_v;
            region = t;
            if step >= burn_in {
                points.push([x, v[0], v[1]]);
                regions.push(region);
            }
        }
        Ok(TrajectoryCloud1D {
            points,
            regions,
            seed,
            burn_in,
        })
    }
}

/// Pick an index from a probability row by inverse transform sampling.
pub(crate) fn draw_row(row: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (t, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = t;
            acc += p;
            if r < acc {
                return t;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Dim, Expr};

    pub(crate) fn example_dataset() -> HiddenDataset1D {
        HiddenDataset1D::new(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![20.0, 30.0, 10.0, 50.0, 40.0],
            vec![0.0; 5],
        )
        .unwrap()
    }

    pub(crate) fn fixture_f1() -> Partition1D {
        Partition1D::new(
            4,
            vec![(0, 2), (2, 4)],
            vec![0, 0, 1, 1],
            vec![Orientation::Plus; 4],
        )
        .unwrap()
    }

    fn consts(vals: [f64; 4]) -> Vec<Expr> {
        vals.iter().map(|v| Expr::Num(*v)).collect()
    }

    pub(crate) fn config1_factors() -> FactorLists {
        FactorLists::from_exprs(
            consts([0.3, 0.85, 0.8, 0.5]),
            consts([0.0, 0.0, 0.0, 0.0]),
            consts([0.8, 0.6, 0.4, 0.5]),
            consts([0.19, 0.37, 0.48, 0.43]),
        )
    }

    pub(crate) fn zero_factors() -> FactorLists {
        FactorLists::from_exprs(
            consts([0.0; 4]),
            consts([0.0; 4]),
            consts([0.0; 4]),
            consts([0.0; 4]),
        )
    }

    fn config3_factors() -> FactorLists {
        let p = |s: &str| parse(s, Dim::One).unwrap();
        FactorLists::from_exprs(
            vec![p("2.9*x"), p("1.9*x"), p("x"), p("x")],
            consts([0.0; 4]),
            vec![p("sin(10*x)"), p("cos(300*x)"), p("sin(100*x)"), p("cos(3*x)")],
            vec![
                p("0.99-abs(sin(10*x))"),
                p("0.9-abs(cos(300*x))"),
                p("0.95-abs(sin(100*x))"),
                p("0.9-abs(cos(3*x))"),
            ],
        )
    }

    fn build_config1() -> MapSystem1D {
        MapSystem1D::build(example_dataset(), fixture_f1(), config1_factors()).unwrap()
    }

    #[test]
    fn make_l_examples() {
        let m = AffineMap::new((0.0, 0.5), (0.25, 0.5), Orientation::Plus).unwrap();
        assert_eq!(m.a(), 0.5);
        assert_eq!(m.b(), 0.25);
        assert_eq!(m.apply(0.0), 0.25);
        assert_eq!(m.apply(0.5), 0.5);

        let m = AffineMap::new((0.0, 0.5), (0.25, 0.5), Orientation::Minus).unwrap();
        assert_eq!(m.a(), -0.5);
        assert_eq!(m.b(), 0.5);
        assert_eq!(m.apply(0.0), 0.5);
        assert_eq!(m.apply(0.5), 0.25);

        assert!(matches!(
            AffineMap::new((0.0, 0.25), (0.0, 0.5), Orientation::Plus),
            Err(Error::NonContractiveMap { .. })
        ));
    }

    #[test]
    fn map_inversion_is_endpoint_exact() {
        for orient in [Orientation::Plus, Orientation::Minus] {
            let m = AffineMap::new((0.1, 0.7), (0.3, 0.4), orient).unwrap();
            assert_eq!(m.invert(m.apply(0.1)), 0.1);
            assert_eq!(m.invert(m.apply(0.7)), 0.7);
            let x = 0.5361;
            assert!((m.invert(m.apply(x)) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_factor_f_is_baseline() {
        let sys = MapSystem1D::build(example_dataset(), fixture_f1(), zero_factors()).unwrap();
        // region 0, domain [0, 0.5], x = 0.25 maps to 0.125; baseline through
        // (0,20),(0.25,30) gives 25
        let v = sys.apply_f(0, 0.25, [123.0, -4.0]).unwrap();
        assert_eq!(v, [25.0, 0.0]);
    }

    #[test]
    fn endpoint_condition_exact() {
        let sys = build_config1();
        // region 0: domain endpoint x2 = 0.5 maps to x1 under +, so the
        // domain-end data lands on the region's right knot
        let v = sys.apply_f(0, 0.5, [10.0, 0.0]).unwrap();
        assert_eq!(v, [30.0, 0.0]);
        // same check through every region and both endpoints at build time
        assert!(MapSystem1D::build(example_dataset(), fixture_f1(), config1_factors()).is_ok());
    }

    #[test]
    fn q_value_matches_hand_computation() {
        // independent hand evaluation of the affine offset at region 2
        // (one-based), x = 0.3: Q = (6.1, 0)
        let sys = build_config1();
        let q = sys.q_at(1, 0.3).unwrap();
        assert!((q[0] - 6.1).abs() < 1e-12, "q = {q:?}");
        assert_eq!(q[1], 0.0);
    }

    #[test]
    fn apply_f_outside_domain_rejected() {
        let sys = build_config1();
        assert!(matches!(
            sys.apply_f(0, 0.75, [0.0, 0.0]),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn rb_apply_fixes_knots_for_interpolating_fields() {
        let sys = build_config1();
        let mut h = sys.data_interpolant(65);
        // perturb away from the data off the knots
        for (i, v) in h.values_mut().iter_mut().enumerate() {
            if i % 16 != 0 {
                v[0] += ((i * 37) % 11) as f64 - 5.0;
                v[1] += ((i * 53) % 7) as f64 - 3.0;
            }
        }
        let th = sys.rb_apply(&h).unwrap();
        for (k, &x) in sys.dataset().xs().iter().enumerate() {
            let got = th.eval(x);
            let want = sys.dataset().value(k);
            assert!(
                pair_l1(pair_sub(got, want)) < 1e-12,
                "knot {k}: {got:?} vs {want:?}"
            );
        }
    }

    #[test]
    fn zero_factor_operator_collapses_any_field_to_the_interpolant() {
        let sys = MapSystem1D::build(example_dataset(), fixture_f1(), zero_factors()).unwrap();
        let mut h = sys.data_interpolant(129);
        for (i, v) in h.values_mut().iter_mut().enumerate() {
            v[0] += ((i * 31) % 17) as f64 - 8.0;
            v[1] += ((i * 13) % 5) as f64;
        }
        let th = sys.rb_apply(&h).unwrap();
        let pl = sys.data_interpolant(129);
        for (a, b) in th.values().iter().zip(pl.values()) {
            assert!(pair_l1(pair_sub(*a, *b)) <= 1e-12);
        }
    }

    #[test]
    fn zero_factors_solve_to_data_interpolant_in_one_sweep() {
        let sys = MapSystem1D::build(example_dataset(), fixture_f1(), zero_factors()).unwrap();
        let sol = sys.solve(257, 1e-12, 10).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.field.f1(0.125), 25.0);
        let pl = sys.data_interpolant(257);
        for (a, b) in sol.field.values().iter().zip(pl.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn config1_solution_interpolates_and_matches_oracle_probe() {
        let sys = build_config1();
        let sol = sys.solve(4097, 1e-10, 5000).unwrap();
        assert!(sol.converged);
        for (k, &x) in sys.dataset().xs().iter().enumerate() {
            assert!((sol.field.f1(x) - sys.dataset().ys()[k]).abs() < 1e-9);
        }
        // frozen from the independent 8193-grid brute-force oracle
        assert!((sol.field.f1(0.375) - 32.75).abs() < 1e-6);
        assert!((sol.field.f1(0.125) - 29.5).abs() < 1e-6);
    }

    #[test]
    fn report_config1() {
        let sys = build_config1();
        let rep = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
        assert!((rep.s_bar - 0.99).abs() < 1e-12);
        assert!(rep.certified);
        assert_eq!(rep.l_l, 0.5);
        assert!(rep.theta_max.unwrap() > 0.0);
        // region 1 column sums: (0.3, 0.99)
        assert!((rep.regions[0].column_visible - 0.3).abs() < 1e-15);
        assert!((rep.regions[0].column_hidden - 0.99).abs() < 1e-15);
    }

    #[test]
    fn report_zero_factors() {
        let sys = MapSystem1D::build(example_dataset(), fixture_f1(), zero_factors()).unwrap();
        let rep = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
        assert_eq!(rep.s_bar, 0.0);
        assert!(rep.certified);
    }

    #[test]
    fn report_config3_uncertified() {
        let sys =
            MapSystem1D::build(example_dataset(), fixture_f1(), config3_factors()).unwrap();
        assert!(sys.has_factor_sup_warning());
        let rep = sys.contraction_report(DEFAULT_HIDDEN_MARGIN).unwrap();
        assert!(rep.s_bar >= 1.98 && rep.s_bar <= 2.0, "s_bar = {}", rep.s_bar);
        assert!(!rep.certified);
    }

    #[test]
    fn chaos_game_stays_in_span_and_is_deterministic() {
        let sys = build_config1();
        let m = sys.connection_matrix().unwrap();
        let cloud = sys.chaos_game(&m, 5000, 100, 7).unwrap();
        assert_eq!(cloud.points.len(), 4900);
        for p in &cloud.points {
            assert!(p[0] >= 0.0 && p[0] <= 1.0);
        }
        let cloud2 = sys.chaos_game(&m, 5000, 100, 7).unwrap();
        assert_eq!(cloud.points, cloud2.points);
        let cloud3 = sys.chaos_game(&m, 5000, 100, 8).unwrap();
        assert_ne!(cloud.points, cloud3.points);
    }

    #[test]
    fn chaos_game_parameter_checks() {
        let sys = build_config1();
        let m = sys.connection_matrix().unwrap();
        assert!(matches!(
            sys.chaos_game(&m, 10, 10, 1),
            Err(Error::BadChaosParams { .. })
        ));
    }

    #[test]
    fn solver_parameter_checks() {
        let sys = build_config1();
        assert!(matches!(
            sys.solve(5, 1e-10, 10),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(
            sys.solve(64, 0.0, 10),
            Err(Error::BadSolverParams { .. })
        ));
    }
}
