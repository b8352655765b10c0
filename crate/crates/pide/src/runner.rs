//! Experiment runner: dispatches a validated configuration to the solvers,
//! writes the output files, and emits a run manifest.

use crate::catalog;
use crate::cauchy::{solve_cauchy, CauchyRun};
use crate::config::{ExperimentConfig, Mode};
use crate::diagnostics::{audit_ha, audit_hb, audit_prop_h, convergence_report};
use crate::ergodic::{ergodic_residual, long_time_pair, vanishing_discount, ErgodicPair};
use crate::error::{Error, Result};
use crate::levy::{audit_jump_lipschitz, audit_m1, audit_m2, AuditReport};
use crate::scheme::ProblemSpec;
use crate::torus::{oscillation, write_field_csv, GridField};
use serde::Serialize;
use serde_json::json;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// What a completed run produced, echoed in `manifest.json`.
#[derive(Debug)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    /// `false` only for audit/reproduce runs whose checks failed.
    pub pass: bool,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let file = File::create(dir.join(name))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn write_profile(dir: &Path, name: &str, field: &GridField) -> Result<()> {
    let file = File::create(dir.join(name))?;
    write_field_csv(field, BufWriter::new(file))
}

fn write_trajectory(dir: &Path, name: &str, run: &CauchyRun) -> Result<()> {
    let file = File::create(dir.join(name))?;
    run.write_trajectory_csv(BufWriter::new(file))
}

fn write_ergodic_outputs(dir: &Path, pair: &ErgodicPair, outputs: &mut Vec<String>) -> Result<()> {
    write_json(dir, "ergodic.json", &pair.summary())?;
    write_profile(dir, "v.csv", &pair.v)?;
    outputs.push("ergodic.json".into());
    outputs.push("v.csv".into());
    Ok(())
}

/// Runs every applicable assumption audit for a problem.
pub fn run_audits(problem: &ProblemSpec) -> Result<Vec<AuditReport>> {
    let mut reports = Vec::new();
    let m2_deltas = [0.5, 0.25, 0.125, 0.0625, 0.03125];
    for term in &problem.nonlocal_terms {
        reports.push(audit_m1(&term.measure));
        reports.push(audit_m2(&term.measure, &m2_deltas)?);
        reports.push(audit_jump_lipschitz(&term.jump, term.measure.beta));
    }
    let m = problem.hamiltonian_exponent;
    let dim = problem.grid.dim();
    if m > 1.0 {
        reports.push(audit_hb(m, 0.5, 1.0, 64)?);
        reports.push(audit_prop_h(m, &[1.0, 10.0, 100.0], 64)?);
    } else {
        let mut p0 = vec![0.0; dim];
        p0[0] = 1.0;
        let samples = vec![p0, vec![0.5; dim], vec![-0.3; dim]];
        reports.push(audit_ha(m, &samples, &[1.0, 2.0, 4.0, 8.0, 16.0])?);
    }
    Ok(reports)
}

/// Executes the configured experiment and writes all artifacts to
/// `output_dir` (created if missing). Returns the run summary.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    output_dir: &Path,
    quiet: bool,
) -> Result<RunArtifacts> {
    fs::create_dir_all(output_dir)?;
    let started = Instant::now();
    let mut outputs = Vec::new();
    let mut pass = true;

    let summary = match cfg.mode {
        Mode::Cauchy => {
            let run = solve_cauchy(
                &cfg.params.u0,
                &cfg.problem,
                cfg.params.horizon,
                &cfg.params.snapshot_times,
            )?;
            write_trajectory(output_dir, "trajectory.csv", &run)?;
            outputs.push("trajectory.csv".into());
            if let Some(u) = run.final_state() {
                write_profile(output_dir, "final_state.csv", u)?;
                outputs.push("final_state.csv".into());
            }
            json!({
                "steps": run.steps,
                "horizon": run.horizon,
                "snapshots": run.snapshots.len(),
            })
        }
        Mode::ErgodicVd => {
            let pair = vanishing_discount(&cfg.problem, &cfg.params.delta_schedule, cfg.params.tol)?;
            write_ergodic_outputs(output_dir, &pair, &mut outputs)?;
            serde_json::to_value(pair.summary())?
        }
        Mode::ErgodicLt => {
            let pair = long_time_pair(
                &cfg.problem,
                &cfg.params.u0,
                cfg.params.horizon,
                cfg.params.window,
                cfg.params.tol,
            )?;
            write_ergodic_outputs(output_dir, &pair, &mut outputs)?;
            serde_json::to_value(pair.summary())?
        }
        Mode::Convergence => {
            let pair = long_time_pair(
                &cfg.problem,
                &cfg.params.u0,
                cfg.params.horizon,
                cfg.params.window,
                cfg.params.tol,
            )?;
            let run = solve_cauchy(
                &cfg.params.u0,
                &cfg.problem,
                cfg.params.horizon,
                &cfg.params.snapshot_times,
            )?;
            let report = convergence_report(&run, &pair)?;
            let file = File::create(output_dir.join("convergence.csv"))?;
            report.write_csv(BufWriter::new(file))?;
            outputs.push("convergence.csv".into());
            write_ergodic_outputs(output_dir, &pair, &mut outputs)?;
            json!({
                "lambda": pair.lambda,
                "m_bar": report.m_bar,
                "final_osc": report.osc_series.last(),
                "monotone_violation": report.monotone_violation,
            })
        }
        Mode::Audit => {
            let reports = run_audits(&cfg.problem)?;
            pass = reports.iter().all(|r| r.pass);
            write_json(output_dir, "audits.json", &reports)?;
            outputs.push("audits.json".into());
            if !quiet {
                for r in &reports {
                    println!("audit {:<28} {}", r.assumption, if r.pass { "PASS" } else { "FAIL" });
                }
            }
            json!({
                "audits": reports.len(),
                "pass": pass,
            })
        }
        Mode::Reproduce => {
            let id = cfg
                .params
                .example_id
                .as_deref()
                .ok_or_else(|| Error::Precondition("reproduce mode needs example_id".into()))?;
            let outcome = reproduce(id, output_dir, None, quiet)?;
            pass = outcome.pass;
            outputs.push("reproduce.json".into());
            serde_json::to_value(&outcome.rows)?
        }
    };

    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "mode": cfg.mode.name(),
        "seed": cfg.seed,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "outputs": outputs,
        "summary": summary,
        "config": cfg.raw,
    });
    write_json(output_dir, "manifest.json", &manifest)?;
    outputs.push("manifest.json".into());
    if !quiet {
        println!("wrote {} file(s) to {}", outputs.len(), output_dir.display());
    }
    Ok(RunArtifacts {
        output_dir: output_dir.to_path_buf(),
        outputs,
        summary: manifest,
        pass,
    })
}

/// One row of the reproduction check table.
#[derive(Debug, Clone, Serialize)]
pub struct ReproRow {
    pub metric: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug)]
pub struct ReproOutcome {
    pub id: String,
    pub rows: Vec<ReproRow>,
    pub pass: bool,
}

/// Re-runs a catalog entry and checks each expected metric. `tol_override`,
/// when given, replaces every catalog tolerance.
pub fn reproduce(
    id: &str,
    output_dir: &Path,
    tol_override: Option<f64>,
    quiet: bool,
) -> Result<ReproOutcome> {
    let entry = catalog::find(id)?;
    let cfg = entry.config()?;
    fs::create_dir_all(output_dir)?;

    let audits = run_audits(&cfg.problem)?;
    write_json(output_dir, "audits.json", &audits)?;
    if let Some(bad) = audits.iter().find(|r| !r.pass) {
        return Err(Error::Precondition(format!(
            "assumption audit '{}' failed for example '{id}'",
            bad.assumption
        )));
    }

    let vd = vanishing_discount(&cfg.problem, &cfg.params.delta_schedule, cfg.params.tol)?;
    let lt = long_time_pair(
        &cfg.problem,
        &cfg.params.u0,
        cfg.params.horizon,
        cfg.params.window,
        cfg.params.tol,
    )?;
    write_ergodic_outputs(output_dir, &vd, &mut Vec::new())?;
    write_profile(output_dir, "v_long_time.csv", &lt.v)?;

    let mut profile_gap = vd.v.clone();
    profile_gap.axpy(-1.0, &lt.v);
    let residual_vd = ergodic_residual(&vd, &cfg.problem)?;

    let mut rows = Vec::new();
    for exp in entry.expected {
        let actual = match exp.metric {
            "lambda_gap" => (vd.lambda - lt.lambda).abs(),
            "residual_vd" => residual_vd,
            "profile_osc" => oscillation(&profile_gap),
            "lambda" => vd.lambda,
            other => {
                return Err(Error::Precondition(format!(
                    "catalog entry '{id}' references unknown metric '{other}'"
                )))
            }
        };
        let tolerance = tol_override.unwrap_or(exp.tolerance);
        rows.push(ReproRow {
            metric: exp.metric.to_string(),
            expected: exp.value,
            actual,
            tolerance,
            pass: (actual - exp.value).abs() <= tolerance,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    write_json(output_dir, "reproduce.json", &rows)?;

    if !quiet {
        println!("reproduce {id}: {}", if pass { "PASS" } else { "FAIL" });
        println!("{:<14} {:>12} {:>12} {:>10} status", "metric", "expected", "actual", "tol");
        for r in &rows {
            println!(
                "{:<14} {:>12.4e} {:>12.4e} {:>10.1e} {}",
                r.metric,
                r.expected,
                r.actual,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(ReproOutcome {
        id: id.to_string(),
        rows,
        pass,
    })
}
