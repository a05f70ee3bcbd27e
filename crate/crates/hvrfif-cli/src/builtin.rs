//! Built-in example configurations: four curve configs over one shared
//! dataset, two constant-factor surface configs over a 5x5 value table, and
//! two function-factor surface demos on a 4x3-region grid.

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const EXAMPLE_NAMES: [&str; 8] = [
    "1d-config-1",
    "1d-config-2",
    "1d-config-3",
    "1d-config-4",
    "2d-config-1",
    "2d-config-2",
    "2d-config-3",
    "2d-config-4",
];

/// The JSON document for a built-in example, exactly as written to disk.
pub fn example_json(name: &str) -> Option<Value> {
    let v = match name {
        "1d-config-1" => curve_config(
            json!(["0.3", "0.85", "0.8", "0.5"]),
            json!(["0", "0", "0", "0"]),
            json!(["0.8", "0.6", "0.4", "0.5"]),
            json!(["0.19", "0.37", "0.48", "0.43"]),
            5000,
        ),
        "1d-config-2" => curve_config(
            json!(["0.3", "0.85", "0.8", "0.5"]),
            json!(["0.64", "0.14", "0.19", "0.49"]),
            json!(["0.8", "0.6", "0.4", "0.5"]),
            json!(["0.19", "0.37", "0.48", "0.43"]),
            5000,
        ),
        "1d-config-3" => curve_config(
            json!(["2.9*x", "1.9*x", "x", "x"]),
            json!(["0", "0", "0", "0"]),
            json!(["sin(10*x)", "cos(300*x)", "sin(100*x)", "cos(3*x)"]),
            json!([
                "0.99-abs(sin(10*x))",
                "0.9-abs(cos(300*x))",
                "0.95-abs(sin(100*x))",
                "0.9-abs(cos(3*x))"
            ]),
            2000,
        ),
        "1d-config-4" => curve_config(
            json!(["2.9*x", "1.9*x", "x", "x"]),
            json!(["0.99-2.9*x", "0.99-1.9*x", "0.9-x", "0.9-x"]),
            json!(["sin(10*x)", "cos(300*x)", "sin(100*x)", "cos(3*x)"]),
            json!([
                "0.99-abs(sin(10*x))",
                "0.9-abs(cos(300*x))",
                "0.95-abs(sin(100*x))",
                "0.9-abs(cos(3*x))"
            ]),
            2000,
        ),
        "2d-config-1" => surface_config(SP_ZERO, STP_CONST, 4000),
        "2d-config-2" => surface_config(SP_CONST2, STP_CONST, 4000),
        "2d-config-3" => demo_config(DEMO3_S_TILDE_ZERO),
        "2d-config-4" => demo_config(DEMO4_S_TILDE),
        _ => return None,
    };
    Some(v)
}

pub fn load_example(name: &str) -> Result<(RunConfig, Value), CliError> {
    let value = example_json(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown example {name:?}; available: {}",
            EXAMPLE_NAMES.join(", ")
        ))
    })?;
    let cfg: RunConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Config(format!("builtin example {name}: {e}")))?;
    Ok((cfg, value))
}

fn curve_config(s: Value, s_tilde: Value, s_prime: Value, s_tilde_prime: Value, max_iter: usize) -> Value {
    json!({
        "dimension": 1,
        "dataset": {
            "xs": [0.0, 0.25, 0.5, 0.75, 1.0],
            "ys": [20.0, 30.0, 10.0, 50.0, 40.0],
            "zs": [0.0, 0.0, 0.0, 0.0, 0.0]
        },
        "partition": {
            "domains": [[0, 2], [2, 4]],
            "gamma": [1, 1, 2, 2],
            "orientations": ["+", "+", "+", "+"]
        },
        "factors": {
            "s": s,
            "s_tilde": s_tilde,
            "s_prime": s_prime,
            "s_tilde_prime": s_tilde_prime
        },
        "solver": { "grid_points": 4097, "tol": 1e-10, "max_iter": max_iter },
        "chaos": { "points": 200000, "burn_in": 100, "seed": 7 },
        // these factor sets run close to the contraction limit, so the
        // attractor oscillates by a few units inside a single grid cell;
        // the cloud agreement threshold is set accordingly
        "verify": { "cloud_threshold_frac": 0.25 }
    })
}

/// 5x5 visible values; rows of this literal are y slices, columns run along
/// x, matching the usual tabular layout.
const TABLE_ROWS_Y: [[f64; 5]; 5] = [
    [46.0, 32.0, 65.0, 73.0, 39.0],
    [32.0, 23.0, 84.0, 33.0, 29.0],
    [76.0, 88.0, 58.0, 73.0, 88.0],
    [62.0, 79.0, 33.0, 86.0, 43.0],
    [49.0, 23.0, 39.0, 76.0, 32.0],
];

const S_CONST: [[f64; 4]; 4] = [
    [0.9, 0.6, -0.9, 0.7],
    [-0.94, 0.95, 0.3, 0.85],
    [0.5, -0.99, 0.86, 0.79],
    [0.87, 0.92, 0.75, -0.87],
];
const ST_CONST: [[f64; 4]; 4] = [
    [-0.4, 0.9, -0.65, 0.66],
    [0.9, 0.36, 0.27, 0.25],
    [0.91, -0.89, 0.9, 0.85],
    [0.53, 0.96, -0.49, 0.39],
];
const SP_ZERO: [[f64; 4]; 4] = [[0.0; 4]; 4];
const SP_CONST2: [[f64; 4]; 4] = [
    [-0.47, -0.07, -0.08, 0.14],
    [0.15, -0.04, -0.69, 0.14],
    [0.46, -0.69, 0.04, 0.07],
    [0.07, -0.13, 0.18, -0.02],
];
const STP_CONST: [[f64; 4]; 4] = [
    [0.53, 0.03, 0.27, 0.28],
    [0.09, 0.55, 0.64, 0.72],
    [0.05, 0.01, 0.02, 0.11],
    [0.41, 0.03, 0.48, 0.56],
];

/// Flatten a per-region table indexed `[i][j]` (i along x) into linearized
/// region order (x fastest) as expression strings.
fn flatten_const(table: [[f64; 4]; 4]) -> Value {
    let mut out = Vec::with_capacity(16);
    for j in 0..4 {
        for i in 0..4 {
            out.push(Value::String(format!("{}", table[i][j])));
        }
    }
    Value::Array(out)
}

fn surface_config(sp: [[f64; 4]; 4], stp: [[f64; 4]; 4], max_iter: usize) -> Value {
    let mut zss = vec![vec![0.0; 5]; 5];
    for (j, row) in TABLE_ROWS_Y.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            zss[i][j] = v;
        }
    }
    json!({
        "dimension": 2,
        "dataset": {
            "xs": [0.0, 0.25, 0.5, 0.75, 1.0],
            "ys": [0.0, 0.25, 0.5, 0.75, 1.0],
            "zss": zss,
            "hidden": { "mode": "zeros" }
        },
        "partition": {
            "domains": [[0, 2, 0, 2], [2, 4, 0, 2], [0, 2, 2, 4], [2, 4, 2, 4]],
            "gamma": [1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4],
            "orientations": vec!["++"; 16]
        },
        "factors": {
            "s": flatten_const(S_CONST),
            "s_tilde": flatten_const(ST_CONST),
            "s_prime": flatten_const(sp),
            "s_tilde_prime": flatten_const(stp)
        },
        "solver": { "grid": [257, 257], "tol": 1e-9, "max_iter": max_iter },
        "chaos": { "points": 200000, "burn_in": 100, "seed": 7 }
    })
}

/// Function-factor tables for the 4x3-region surface demos, `[i][j]` with
/// four x rows and three y columns.
const DEMO_S: [[&str; 3]; 4] = [
    ["0.45*(cos(x)+sin(y))", "0.9*sin(10*x^2+10*y^2)", "0.9*cos(10*x^2+10*y^2)"],
    ["0.99*cos(10*x^3+10*y^3)", "0.45*(cos(x)-sin(y))", "0.9*sin(x^2+y^9)"],
    ["0.9*cos(50*x+50*y)", "0.99*cos(40*x^3+40*y^3)", "0.9*sin(10*x+10*y)"],
    ["0.9*sin(50*x+50*y)", "0.99*cos(150*x^2+15*y^2)", "0.45*(cos(20*x)-sin(20*y))"],
];
const DEMO_SP: [[&str; 3]; 4] = [
    ["0.45*(cos(x)+sin(y))", "0.9*sin(10*x^2+10*y^2)", "0.9*cos(30*x^2+30*y^2)"],
    ["0.93*cos(10*x^4+10*y^3)", "0.45*(cos(x)-sin(y))", "0.95*sin(x^2+y^9)"],
    ["0.9*cos(20*x+20*y)", "0.85*cos(30*x^3+40*y^3)", "0.87*sin(20*x+30*y)"],
    ["0.98*sin(40*x+40*y)", "0.93*cos(150*x^2+15*y^2)", "0.4*(cos(30*x)-sin(20*y))"],
];
const DEMO_STP: [[&str; 3]; 4] = [
    [
        "0.93-0.45*(cos(x)+sin(y))",
        "0.93-0.9*sin(10*x^2+10*y^2)",
        "0.92-0.9*cos(30*x^2+30*y^2)",
    ],
    [
        "0.99-0.93*cos(10*x^4+10*y^3)",
        "0.91-0.45*(cos(x)-sin(y))",
        "0.91-0.95*sin(x^2+y^9)",
    ],
    [
        "0.96-0.9*cos(20*x+20*y)",
        "0.99-0.85*cos(30*x^3+40*y^3)",
        "0.92-0.87*sin(20*x+30*y)",
    ],
    [
        "0.94-0.98*sin(40*x+40*y)",
        "0.99-0.93*cos(150*x^2+15*y^2)",
        "0.97-0.4*(cos(30*x)-sin(20*y))",
    ],
];
const DEMO3_S_TILDE_ZERO: [[&str; 3]; 4] = [["0", "0", "0"]; 4];
const DEMO4_S_TILDE: [[&str; 3]; 4] = [
    [
        "0.82-0.45*(cos(x)+sin(y))",
        "0.84-0.9*sin(10*x^2+10*y^2)",
        "0.82-0.9*cos(10*x^2+10*y^2)",
    ],
    [
        "0.79-0.99*cos(10*x^3+10*y^3)",
        "0.91-0.45*(cos(x)-sin(y))",
        "0.99-0.9*sin(x^2+y^9)",
    ],
    [
        "0.96-0.9*cos(50*x+50*y)",
        "0.69-0.99*cos(40*x^3+40*y^3)",
        "0.9-0.9*sin(10*x+10*y)",
    ],
    [
        "0.94-0.9*sin(50*x+50*y)",
        "0.79-0.99*cos(150*x^2+15*y^2)",
        "0.93-0.45*(cos(20*x)-sin(20*y))",
    ],
];

fn flatten_exprs(table: [[&str; 3]; 4]) -> Value {
    let mut out = Vec::with_capacity(12);
    for j in 0..3 {
        for i in 0..4 {
            out.push(Value::String(table[i][j].to_owned()));
        }
    }
    Value::Array(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{build, Built, FactorEntry};

    #[test]
    fn all_examples_load_and_build() {
        for name in EXAMPLE_NAMES {
            let (cfg, _) = load_example(name).unwrap();
            build(&cfg).unwrap_or_else(|e| panic!("example {name} failed to build: {e}"));
        }
    }

    #[test]
    fn first_curve_example_carries_the_shared_dataset_and_factors() {
        let (cfg, _) = load_example("1d-config-1").unwrap();
        assert_eq!(cfg.dimension, 1);
        assert_eq!(cfg.dataset.xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.dataset.ys, vec![20.0, 30.0, 10.0, 50.0, 40.0]);
        assert_eq!(cfg.dataset.zs.as_deref(), Some(&[0.0; 5][..]));
        let exprs: Vec<&str> = cfg
            .factors
            .s
            .iter()
            .map(|e| match e {
                FactorEntry::Expr(t) => t.as_str(),
                FactorEntry::Detailed { expr, .. } => expr.as_str(),
            })
            .collect();
        assert_eq!(exprs, vec!["0.3", "0.85", "0.8", "0.5"]);
        assert_eq!(cfg.partition.gamma, vec![1, 1, 2, 2]);
    }

    #[test]
    fn quadrant_example_region_factor_alignment() {
        // region (1,1) zero-based (0,0) must read the first table entry 0.9
        let (cfg, _) = load_example("2d-config-1").unwrap();
        match build(&cfg).unwrap() {
            Built::Two { sys, .. } => {
                let r = sys.partition().region_index(0, 0);
                let q = &sys.factors()[r];
                assert_eq!(q.s.sup_raw, 0.9);
                assert_eq!(q.s_tilde.sup_raw, 0.4);
                assert_eq!(q.s_tilde_prime.sup_raw, 0.53);
            }
            _ => panic!("expected a surface system"),
        }
    }
}

fn demo_config(s_tilde: [[&str; 3]; 4]) -> Value {
    // 4x3-region demo: the 5x4 value slab is the first four y rows of the
    // surface table
    let mut zss = vec![vec![0.0; 4]; 5];
    for (j, row) in TABLE_ROWS_Y.iter().take(4).enumerate() {
        for (i, &v) in row.iter().enumerate() {
            zss[i][j] = v;
        }
    }
    json!({
        "dimension": 2,
        "dataset": {
            "xs": [0.0, 0.25, 0.5, 0.75, 1.0],
            "ys": [0.0, 0.25, 0.5, 0.75],
            "zss": zss,
            "hidden": { "mode": "zeros" }
        },
        "partition": {
            "domains": [[0, 2, 0, 3], [2, 4, 0, 3]],
            "gamma": [1, 1, 2, 2, 1, 1, 2, 2, 1, 1, 2, 2],
            "orientations": vec!["++"; 12]
        },
        "factors": {
            "s": flatten_exprs(DEMO_S),
            "s_tilde": flatten_exprs(s_tilde),
            "s_prime": flatten_exprs(DEMO_SP),
            "s_tilde_prime": flatten_exprs(DEMO_STP)
        },
        "solver": { "grid": [129, 129], "tol": 1e-9, "max_iter": 1000 },
        "chaos": { "points": 200000, "burn_in": 100, "seed": 7 }
    })
}
