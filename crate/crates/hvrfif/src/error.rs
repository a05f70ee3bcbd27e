//! Crate-wide error type.

use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{axis} knots must be strictly increasing (violated at index {index})")]
    KnotsNotIncreasing { axis: &'static str, index: usize },

    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("need at least 2 regions along the {axis} axis, got {got}")]
    TooFewRegions { axis: &'static str, got: usize },

    #[error("domain {domain} spans {span} region(s) along the {axis} axis; at least 2 required")]
    DomainTooSmall {
        domain: usize,
        axis: &'static str,
        span: usize,
    },

    #[error("domain {domain} has knot indices ({lo}, {hi}) out of range for {knots} knots on the {axis} axis")]
    DomainIndexOutOfRange {
        domain: usize,
        axis: &'static str,
        lo: usize,
        hi: usize,
        knots: usize,
    },

    #[error("domain count {got} outside the admissible range [2, {max}]")]
    DomainCountOutOfRange { got: usize, max: usize },

    #[error("gamma for region {region} is {got}; must be a domain index below {domains}")]
    GammaOutOfRange {
        region: usize,
        got: usize,
        domains: usize,
    },

    #[error("region {region} is contained in no assigned domain; its connection-matrix row would be all zeros")]
    RegionUncovered { region: usize },

    #[error("map for region {region} is not a contraction: |slope| = {ratio}")]
    NonContractiveMap { region: usize, ratio: f64 },

    #[error("map for region {region} is degenerate (zero slope)")]
    DegenerateMap { region: usize },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{0}")]
    Eval(#[from] EvalError),

    #[error("endpoint condition violated for region {region}: residual {residual}")]
    EndpointCondition { region: usize, residual: f64 },

    #[error("boundary matching violated for region {region}: residual {residual}")]
    BoundaryCondition { region: usize, residual: f64 },

    #[error("point {x} lies outside the domain of region {region}'s map")]
    PointOutsideDomain { region: usize, x: f64 },

    #[error("connection matrix row {row} sums to {sum}, not 1")]
    MatrixNotStochastic { row: usize, sum: f64 },

    #[error("connection matrix is {got}x{got}, system has {expected} regions")]
    MatrixSizeMismatch { expected: usize, got: usize },

    #[error("solver grid too coarse: {got} points, need at least {needed}")]
    GridTooCoarse { needed: usize, got: usize },

    #[error("invalid solver parameter: {what}")]
    BadSolverParams { what: &'static str },

    #[error("invalid chaos-game parameter: {what}")]
    BadChaosParams { what: &'static str },

    #[error("chaos game internal inconsistency: point {x} not in the drawn map's domain (region {region})")]
    ChaosInconsistency { region: usize, x: f64 },
}
