//! Command implementations shared by the binary and the integration tests.

use std::path::{Path, PathBuf};

use serde::Serialize;

use hvrfif::verify::{
    cloud_vs_field, cloud_vs_field_2d, empirical_contraction_ratio,
    empirical_contraction_ratio_2d, functional_equation_residual,
    functional_equation_residual_2d, knot_interpolation_residual,
    knot_interpolation_residual_2d, rho_theta_check, rho_theta_check_2d,
};
use hvrfif::{ContractionReport, VerificationReport};

use crate::builtin::load_example;
use crate::config::{build, load_config, Built, RunConfig};
use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_change: f64,
    pub tol: f64,
    pub grid: Vec<usize>,
    pub certified: bool,
}

#[derive(Debug, Serialize)]
struct SolveDocument {
    solve: SolveSummary,
    certificate: ContractionReport,
}

#[derive(Debug, Serialize)]
struct VerifyDocument {
    pass: bool,
    solve: SolveSummary,
    certificate: ContractionReport,
    checks: Vec<VerificationReport>,
}

fn artifact(out: &Path, base: &str, suffix: &str) -> PathBuf {
    out.join(format!("{base}.{suffix}"))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn basename<'a>(cfg: &'a RunConfig, fallback: &'a str) -> &'a str {
    cfg.output.basename.as_deref().unwrap_or(fallback)
}

/// Attractor-versus-graph agreement only follows from the fixed-point
/// theorems on certified systems; elsewhere the check is informational.
fn cloud_threshold(report: &ContractionReport, frac: f64, range: f64) -> f64 {
    if report.certified {
        frac * range
    } else {
        f64::INFINITY
    }
}

fn warn_uncertified(report: &ContractionReport) {
    if !report.certified {
        eprintln!(
            "warning: system is not certified (S_bar = {}, max factor sup estimate = {}); \
             solving anyway",
            report.s_bar, report.max_factor_sup_est
        );
    }
}

/// Build + certify, write the certificate. Exit 0 even when uncertified;
/// hard validation failures surface as errors before we get here.
pub fn cmd_validate(cfg: &RunConfig, out: &Path, base: &str) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let built = build(cfg)?;
    let report = certificate(&built, cfg)?;
    warn_uncertified(&report);
    write_json(&report, &artifact(out, base, "certificate.json"))?;
    println!(
        "validated: {} region(s), S_bar = {}, certified = {}",
        region_count(&built),
        report.s_bar,
        report.certified
    );
    Ok(())
}

fn region_count(built: &Built) -> usize {
    match built {
        Built::One { sys, .. } => sys.region_count(),
        Built::Two { sys, .. } => sys.region_count(),
    }
}

fn certificate(built: &Built, cfg: &RunConfig) -> Result<ContractionReport, CliError> {
    let report = match built {
        Built::One { sys, .. } => sys.contraction_report(cfg.hidden_margin),
        Built::Two { sys, .. } => sys.contraction_report(cfg.hidden_margin),
    }
    .map_err(|e| CliError::Config(format!("certificate: {e}")))?;
    Ok(report)
}

enum Solved {
    One(hvrfif::Solution1D),
    Two(hvrfif::Solution2D),
}

fn solve(built: &Built, cfg: &RunConfig) -> Result<(Solved, SolveSummary, ContractionReport), CliError> {
    let report = certificate(built, cfg)?;
    warn_uncertified(&report);
    let (solved, summary) = match built {
        Built::One {
            sys, grid_points, ..
        } => {
            let sol = sys
                .solve(*grid_points, cfg.solver.tol, cfg.solver.max_iter)
                .map_err(|e| CliError::Config(format!("solver: {e}")))?;
            let summary = SolveSummary {
                converged: sol.converged,
                iterations: sol.iterations,
                final_change: sol.final_change,
                tol: sol.tol,
                grid: vec![sol.field.len()],
                certified: report.certified,
            };
            (Solved::One(sol), summary)
        }
        Built::Two { sys, grid, .. } => {
            let sol = sys
                .solve(*grid, cfg.solver.tol, cfg.solver.max_iter)
                .map_err(|e| CliError::Config(format!("solver: {e}")))?;
            let summary = SolveSummary {
                converged: sol.converged,
                iterations: sol.iterations,
                final_change: sol.final_change,
                tol: sol.tol,
                grid: vec![sol.field.nx(), sol.field.ny()],
                certified: report.certified,
            };
            (Solved::Two(sol), summary)
        }
    };
    if !summary.converged {
        eprintln!(
            "warning: solver did not converge within {} iteration(s); final change = {}",
            summary.iterations, summary.final_change
        );
    }
    Ok((solved, summary, report))
}

/// Solve the fixed point and emit the field CSV plus a solve report.
pub fn cmd_solve(cfg: &RunConfig, out: &Path, base: &str) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let built = build(cfg)?;
    let (solved, summary, report) = solve(&built, cfg)?;
    match &solved {
        Solved::One(sol) => {
            output::write_csv_field_1d(&sol.field, &artifact(out, base, "field.csv"))?
        }
        Solved::Two(sol) => {
            output::write_csv_field_2d(&sol.field, &artifact(out, base, "field.csv"))?
        }
    }
    write_json(
        &SolveDocument {
            solve: summary.clone(),
            certificate: report,
        },
        &artifact(out, base, "solve.json"),
    )?;
    println!(
        "solved: converged = {}, iterations = {}, final change = {}",
        summary.converged, summary.iterations, summary.final_change
    );
    Ok(())
}

/// Run the chaos game and emit the cloud CSV.
pub fn cmd_chaos(
    cfg: &RunConfig,
    out: &Path,
    base: &str,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let built = build(cfg)?;
    let seed = seed_override.unwrap_or(cfg.chaos.seed);
    match &built {
        Built::One { sys, matrix, .. } => {
            let cloud = sys
                .chaos_game(matrix, cfg.chaos.points, cfg.chaos.burn_in, seed)
                .map_err(|e| CliError::Config(format!("chaos game: {e}")))?;
            output::write_csv_cloud_1d(&cloud, &artifact(out, base, "cloud.csv"))?;
            println!("chaos game: {} point(s), seed {seed}", cloud.points.len());
        }
        Built::Two { sys, matrix, .. } => {
            let cloud = sys
                .chaos_game(matrix, cfg.chaos.points, cfg.chaos.burn_in, seed)
                .map_err(|e| CliError::Config(format!("chaos game: {e}")))?;
            output::write_csv_cloud_2d(&cloud, &artifact(out, base, "cloud.csv"))?;
            println!("chaos game: {} point(s), seed {seed}", cloud.points.len());
        }
    }
    Ok(())
}

/// Solve and render the visible component as a PGM image.
pub fn cmd_render(cfg: &RunConfig, out: &Path, base: &str) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let built = build(cfg)?;
    let (solved, summary, _) = solve(&built, cfg)?;
    match &solved {
        Solved::One(sol) => {
            output::write_pgm_field_1d(&sol.field, &artifact(out, base, "field.pgm"))?
        }
        Solved::Two(sol) => {
            output::write_pgm_field_2d(&sol.field, &artifact(out, base, "field.pgm"))?
        }
    }
    println!(
        "rendered: converged = {}, iterations = {}",
        summary.converged, summary.iterations
    );
    Ok(())
}

/// Full verification pipeline; exit code 2 when any check fails.
pub fn cmd_verify(
    cfg: &RunConfig,
    out: &Path,
    base: &str,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let built = build(cfg)?;
    let (solved, summary, report) = solve(&built, cfg)?;
    let v = &cfg.verify;
    let seed = seed_override.unwrap_or(v.seed);
    let chaos_seed = seed_override.unwrap_or(cfg.chaos.seed);

    let mut checks: Vec<VerificationReport> = Vec::new();
    match (&built, &solved) {
        (Built::One { sys, matrix, .. }, Solved::One(sol)) => {
            checks.push(knot_interpolation_residual(
                &sol.field,
                sys.dataset(),
                v.knot_threshold,
            ));
            checks.push(
                functional_equation_residual(sys, sol, &report, v.equation_samples, seed)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            checks.push(
                empirical_contraction_ratio(sys, &report, v.contraction_pairs, seed + 1, 1025)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            checks.push(
                rho_theta_check(sys, &report, v.metric_pairs, seed + 2)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            let cloud = sys
                .chaos_game(matrix, cfg.chaos.points, cfg.chaos.burn_in, chaos_seed)
                .map_err(|e| CliError::Config(format!("chaos game: {e}")))?;
            let (lo, hi) = sys.dataset().y_range();
            let mut check = cloud_vs_field(
                &cloud,
                &sol.field,
                cloud_threshold(&report, v.cloud_threshold_frac, hi - lo),
            );
            if !report.certified {
                check = check.with_note("informational: system is not certified");
            }
            checks.push(check);
        }
        (Built::Two { sys, matrix, .. }, Solved::Two(sol)) => {
            checks.push(knot_interpolation_residual_2d(
                &sol.field,
                sys.dataset(),
                v.knot_threshold,
            ));
            checks.push(
                sys.boundary_matching_check(v.boundary_samples)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            checks.push(
                functional_equation_residual_2d(sys, sol, &report, v.equation_samples, seed)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            checks.push(
                empirical_contraction_ratio_2d(
                    sys,
                    &report,
                    v.contraction_pairs,
                    seed + 1,
                    (65, 65),
                )
                .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            checks.push(
                rho_theta_check_2d(sys, &report, v.metric_pairs, seed + 2)
                    .map_err(|e| CliError::Config(format!("verify: {e}")))?,
            );
            let cloud = sys
                .chaos_game(matrix, cfg.chaos.points, cfg.chaos.burn_in, chaos_seed)
                .map_err(|e| CliError::Config(format!("chaos game: {e}")))?;
            let (lo, hi) = sys.dataset().z_range();
            let mut check = cloud_vs_field_2d(
                &cloud,
                &sol.field,
                cloud_threshold(&report, v.cloud_threshold_frac, hi - lo),
            );
            if !report.certified {
                check = check.with_note("informational: system is not certified");
            }
            checks.push(check);
        }
        _ => unreachable!("solver output dimension matches the built system"),
    }

    let failed = checks.iter().filter(|c| !c.pass).count();
    let doc = VerifyDocument {
        pass: failed == 0,
        solve: summary,
        certificate: report,
        checks,
    };
    write_json(&doc, &artifact(out, base, "report.json"))?;
    for c in &doc.checks {
        println!(
            "{} {}: residual = {}, threshold = {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.check,
            c.max_residual,
            c.threshold
        );
    }
    if failed > 0 {
        return Err(CliError::Verify {
            failed,
            total: doc.checks.len(),
        });
    }
    println!("verification passed ({} checks)", doc.checks.len());
    Ok(())
}

/// Materialize a built-in example and run solve + render on it.
pub fn cmd_example(name: &str, out: &Path) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let (cfg, json) = load_example(name)?;
    let config_path = out.join(format!("{name}.config.json"));
    std::fs::write(
        &config_path,
        serde_json::to_string_pretty(&json)
            .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?
            + "\n",
    )?;

    let built = build(&cfg)?;
    let report = certificate(&built, &cfg)?;
    write_json(&report, &artifact(out, name, "certificate.json"))?;

    let (solved, summary, _) = solve(&built, &cfg)?;
    match &solved {
        Solved::One(sol) => {
            output::write_csv_field_1d(&sol.field, &artifact(out, name, "field.csv"))?;
            output::write_pgm_field_1d(&sol.field, &artifact(out, name, "field.pgm"))?;
        }
        Solved::Two(sol) => {
            output::write_csv_field_2d(&sol.field, &artifact(out, name, "field.csv"))?;
            output::write_pgm_field_2d(&sol.field, &artifact(out, name, "field.pgm"))?;
        }
    }
    write_json(
        &SolveDocument {
            solve: summary.clone(),
            certificate: report,
        },
        &artifact(out, name, "solve.json"),
    )?;
    println!(
        "example {name}: converged = {}, iterations = {}, artifacts in {}",
        summary.converged,
        summary.iterations,
        out.display()
    );
    Ok(())
}

/// Entry used by `main` and the CLI tests.
pub fn run_with_config(
    command: &str,
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let cfg = load_config(config_path)?;
    let base = basename(&cfg, "run").to_owned();
    match command {
        "validate" => cmd_validate(&cfg, out, &base),
        "solve" => cmd_solve(&cfg, out, &base),
        "chaos" => cmd_chaos(&cfg, out, &base, seed),
        "render" => cmd_render(&cfg, out, &base),
        "verify" => cmd_verify(&cfg, out, &base, seed),
        other => Err(CliError::Config(format!("unknown command {other:?}"))),
    }
}
