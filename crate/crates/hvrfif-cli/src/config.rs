//! JSON run configuration: schema, cross-validation and conversion into
//! library types.
//!
//! One document describes a full run. Knot indices in `partition.domains`
//! are zero-based; `partition.gamma` is one-based, matching the way
//! region-to-domain assignments are conventionally written out.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use hvrfif::expr::{parse, Dim};
use hvrfif::factor::{FactorLists, FactorSpec};
use hvrfif::partition::Domain2D;
use hvrfif::{
    ConnectionMatrix, HiddenDataset1D, HiddenDataset2D, MapSystem1D, MapSystem2D, Orientation,
    Partition1D, Partition2D,
};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: u8,
    pub dataset: DatasetConfig,
    pub partition: PartitionConfig,
    pub factors: FactorsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub chaos: ChaosConfig,
    #[serde(default = "default_hidden_margin")]
    pub hidden_margin: f64,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_hidden_margin() -> f64 {
    hvrfif::DEFAULT_HIDDEN_MARGIN
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub xs: Vec<f64>,
    /// Visible values in 1D; y knots in 2D.
    pub ys: Vec<f64>,
    #[serde(default)]
    pub zs: Option<Vec<f64>>,
    /// 2D visible values, indexed `zss[i][j]` with `i` along x.
    #[serde(default)]
    pub zss: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub tss: Option<Vec<Vec<f64>>>,
    /// Generator for hidden values when `zs`/`tss` are omitted.
    #[serde(default)]
    pub hidden: HiddenGen,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum HiddenGen {
    #[default]
    Zeros,
    Uniform {
        min: f64,
        max: f64,
        seed: u64,
    },
}

impl HiddenGen {
    fn fill(&self, count: usize) -> Vec<f64> {
        match self {
            HiddenGen::Zeros => vec![0.0; count],
            HiddenGen::Uniform { min, max, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..count).map(|_| min + (max - min) * rng.gen::<f64>()).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// Knot-index pairs `[s, e]` (1D) or quadruples `[sx, ex, sy, ey]` (2D).
    pub domains: Vec<Vec<usize>>,
    /// One-based domain index per region, x index fastest in 2D.
    pub gamma: Vec<usize>,
    /// `"+"`/`"-"` per region (1D) or two-character strings like `"+-"` (2D).
    pub orientations: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FactorEntry {
    Expr(String),
    Detailed { expr: String, sup: f64, lip: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorsConfig {
    pub s: Vec<FactorEntry>,
    pub s_tilde: Vec<FactorEntry>,
    pub s_prime: Vec<FactorEntry>,
    pub s_tilde_prime: Vec<FactorEntry>,
    /// Override of the bound-estimation sample density.
    #[serde(default)]
    pub bound_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub grid: Option<[usize; 2]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points: None,
            grid: None,
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    5000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ChaosConfig {
    fn default() -> Self {
        ChaosConfig {
            points: default_points(),
            burn_in: default_burn_in(),
            seed: 0,
        }
    }
}

fn default_points() -> usize {
    200_000
}

fn default_burn_in() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_equation_samples")]
    pub equation_samples: usize,
    #[serde(default = "default_contraction_pairs")]
    pub contraction_pairs: usize,
    #[serde(default = "default_metric_pairs")]
    pub metric_pairs: usize,
    #[serde(default = "default_cloud_threshold_frac")]
    pub cloud_threshold_frac: f64,
    #[serde(default = "default_knot_threshold")]
    pub knot_threshold: f64,
    #[serde(default = "default_boundary_samples")]
    pub boundary_samples: usize,
    #[serde(default = "default_seed_base")]
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            equation_samples: default_equation_samples(),
            contraction_pairs: default_contraction_pairs(),
            metric_pairs: default_metric_pairs(),
            cloud_threshold_frac: default_cloud_threshold_frac(),
            knot_threshold: default_knot_threshold(),
            boundary_samples: default_boundary_samples(),
            seed: default_seed_base(),
        }
    }
}

fn default_equation_samples() -> usize {
    10_000
}

fn default_contraction_pairs() -> usize {
    20
}

fn default_metric_pairs() -> usize {
    100
}

fn default_cloud_threshold_frac() -> f64 {
    0.05
}

fn default_knot_threshold() -> f64 {
    1e-9
}

fn default_boundary_samples() -> usize {
    1000
}

fn default_seed_base() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Artifact basename; defaults to `run` (or the example name).
    #[serde(default)]
    pub basename: Option<String>,
}

/// A config compiled into library objects, ready to run.
pub enum Built {
    One {
        sys: MapSystem1D,
        matrix: ConnectionMatrix,
        grid_points: usize,
    },
    Two {
        sys: MapSystem2D,
        matrix: ConnectionMatrix,
        grid: (usize, usize),
    },
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_orientation(s: &str, field: usize) -> Result<Orientation, CliError> {
    match s {
        "+" => Ok(Orientation::Plus),
        "-" => Ok(Orientation::Minus),
        other => Err(schema(format!(
            "partition.orientations[{field}]: expected \"+\" or \"-\", got {other:?}"
        ))),
    }
}

fn parse_factor_list(
    entries: &[FactorEntry],
    dim: Dim,
    name: &str,
) -> Result<Vec<FactorSpec>, CliError> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (text, bounds) = match e {
                FactorEntry::Expr(t) => (t.as_str(), None),
                FactorEntry::Detailed { expr, sup, lip } => (expr.as_str(), Some((*sup, *lip))),
            };
            let expr = parse(text, dim).map_err(|err| {
                schema(format!("factors.{name}[{i}] ({text:?}): {err}"))
            })?;
            Ok(FactorSpec {
                expr,
                user_bounds: bounds,
            })
        })
        .collect()
}

fn factor_lists(f: &FactorsConfig, dim: Dim) -> Result<FactorLists, CliError> {
    Ok(FactorLists {
        s: parse_factor_list(&f.s, dim, "s")?,
        s_tilde: parse_factor_list(&f.s_tilde, dim, "s_tilde")?,
        s_prime: parse_factor_list(&f.s_prime, dim, "s_prime")?,
        s_tilde_prime: parse_factor_list(&f.s_tilde_prime, dim, "s_tilde_prime")?,
    })
}

fn gamma_zero_based(gamma: &[usize], domains: usize) -> Result<Vec<usize>, CliError> {
    gamma
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            if g == 0 || g > domains {
                Err(schema(format!(
                    "partition.gamma[{i}] = {g}: must be a one-based domain index in 1..={domains}"
                )))
            } else {
                Ok(g - 1)
            }
        })
        .collect()
}

/// Compile a validated configuration into a ready-to-run system.
pub fn build(cfg: &RunConfig) -> Result<Built, CliError> {
    match cfg.dimension {
        1 => build_1d(cfg),
        2 => build_2d(cfg),
        d => Err(schema(format!("dimension: expected 1 or 2, got {d}"))),
    }
}

fn build_1d(cfg: &RunConfig) -> Result<Built, CliError> {
    let ds = &cfg.dataset;
    if ds.zss.is_some() || ds.tss.is_some() {
        return Err(schema("dataset.zss/tss are only valid with dimension = 2"));
    }
    let zs = match &ds.zs {
        Some(z) => z.clone(),
        None => ds.hidden.fill(ds.xs.len()),
    };
    let dataset = HiddenDataset1D::new(ds.xs.clone(), ds.ys.clone(), zs)
        .map_err(|e| schema(format!("dataset: {e}")))?;
    let n = dataset.region_count();

    let p = &cfg.partition;
    let mut domains = Vec::with_capacity(p.domains.len());
    for (k, d) in p.domains.iter().enumerate() {
        if d.len() != 2 {
            return Err(schema(format!(
                "partition.domains[{k}]: expected [start, end] knot indices, got {d:?}"
            )));
        }
        domains.push((d[0], d[1]));
    }
    let gamma = gamma_zero_based(&p.gamma, domains.len())?;
    let orientations = p
        .orientations
        .iter()
        .enumerate()
        .map(|(i, s)| parse_orientation(s, i))
        .collect::<Result<Vec<_>, _>>()?;
    let partition = Partition1D::new(n, domains, gamma, orientations)
        .map_err(|e| schema(format!("partition: {e}")))?;
    let matrix = ConnectionMatrix::from_partition_1d(&partition)
        .map_err(|e| schema(format!("partition: {e}")))?;

    let lists = factor_lists(&cfg.factors, Dim::One)?;
    let samples = cfg
        .factors
        .bound_samples
        .unwrap_or(hvrfif::factor::DEFAULT_SAMPLES_1D);
    let sys = MapSystem1D::build_with_samples(dataset, partition, lists, samples)
        .map_err(|e| schema(format!("system: {e}")))?;

    if cfg.solver.grid.is_some() {
        return Err(schema("solver.grid is only valid with dimension = 2; use solver.grid_points"));
    }
    let grid_points = cfg.solver.grid_points.unwrap_or(4097);
    Ok(Built::One {
        sys,
        matrix,
        grid_points,
    })
}

fn build_2d(cfg: &RunConfig) -> Result<Built, CliError> {
    let ds = &cfg.dataset;
    if ds.zs.is_some() {
        return Err(schema("dataset.zs is only valid with dimension = 1"));
    }
    let zss = ds
        .zss
        .clone()
        .ok_or_else(|| schema("dataset.zss is required with dimension = 2"))?;
    let tss = match &ds.tss {
        Some(t) => t.clone(),
        None => {
            let flat = ds.hidden.fill(ds.xs.len() * ds.ys.len());
            flat.chunks(ds.ys.len()).map(|c| c.to_vec()).collect()
        }
    };
    let dataset = HiddenDataset2D::new(ds.xs.clone(), ds.ys.clone(), zss, tss)
        .map_err(|e| schema(format!("dataset: {e}")))?;
    let (n, m) = (dataset.nx(), dataset.ny());

    let p = &cfg.partition;
    let mut domains = Vec::with_capacity(p.domains.len());
    for (k, d) in p.domains.iter().enumerate() {
        if d.len() != 4 {
            return Err(schema(format!(
                "partition.domains[{k}]: expected [sx, ex, sy, ey] knot indices, got {d:?}"
            )));
        }
        domains.push(Domain2D {
            sx: d[0],
            ex: d[1],
            sy: d[2],
            ey: d[3],
        });
    }
    let gamma = gamma_zero_based(&p.gamma, domains.len())?;
    let orientations = p
        .orientations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let chars: Vec<char> = s.chars().collect();
            if chars.len() != 2 {
                return Err(schema(format!(
                    "partition.orientations[{i}]: expected two characters like \"+-\", got {s:?}"
                )));
            }
            let ox = parse_orientation(&chars[0].to_string(), i)?;
            let oy = parse_orientation(&chars[1].to_string(), i)?;
            Ok((ox, oy))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let partition = Partition2D::new(n, m, domains, gamma, orientations)
        .map_err(|e| schema(format!("partition: {e}")))?;
    let matrix = ConnectionMatrix::from_partition_2d(&partition)
        .map_err(|e| schema(format!("partition: {e}")))?;

    let lists = factor_lists(&cfg.factors, Dim::Two)?;
    let samples = cfg
        .factors
        .bound_samples
        .unwrap_or(hvrfif::factor::DEFAULT_SAMPLES_2D);
    let sys = MapSystem2D::build_with_samples(dataset, partition, lists, samples)
        .map_err(|e| schema(format!("system: {e}")))?;

    if cfg.solver.grid_points.is_some() {
        return Err(schema("solver.grid_points is only valid with dimension = 1; use solver.grid"));
    }
    let grid = cfg.solver.grid.map(|g| (g[0], g[1])).unwrap_or((257, 257));
    Ok(Built::Two { sys, matrix, grid })
}
