//! Files written by `beamsim run` and `beamsim convergence`.

use beamcontact::contact::PointKind;
use beamcontact::scenario::{ConvergenceRow, RunReport};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::CliError;

pub const SUMMARY: &str = "summary.json";
pub const STEPS: &str = "steps.csv";
pub const POINTS: &str = "points.csv";

#[derive(Serialize)]
struct DistributionRow {
    step: usize,
    s: f64,
    gap: f64,
    force: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct PointRow {
    step: usize,
    kind: &'static str,
    beam_a: usize,
    beam_b: usize,
    s_a: f64,
    s_b: f64,
    gap: f64,
    force: f64,
    alpha: f64,
}

fn kind_name(k: PointKind) -> &'static str {
    match k {
        PointKind::Bilateral => "point",
        PointKind::EndpointToLine => "endpoint_line",
        PointKind::EndpointToEndpoint => "endpoint_endpoint",
    }
}

/// Shortest round-trip form, in scientific notation for very small or large magnitudes.
fn num(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// File name of the line-contact distribution between a slave and a master beam.
pub fn distribution_file(slave: usize, master: usize) -> String {
    format!("distribution_b{slave}_b{master}.csv")
}

/// Write the JSON summary, the per-step table, one CSV per line-contact beam pair and the point contacts.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let summary = dir.join(SUMMARY);
    fs::write(&summary, serde_json::to_string_pretty(report)?).map_err(|e| CliError::io(&summary, e))?;
    write_steps(&dir.join(STEPS), report)?;

    let mut pairs: BTreeMap<(usize, usize), Vec<DistributionRow>> = BTreeMap::new();
    let mut points = Vec::new();
    for d in &report.distributions {
        for l in &d.line {
            pairs
                .entry((l.slave_beam, l.master_beam))
                .or_default()
                .push(DistributionRow { step: d.step, s: l.s, gap: l.gap, force: l.force, alpha: l.alpha_deg });
        }
        points.extend(d.points.iter().map(|p| PointRow {
            step: d.step,
            kind: kind_name(p.kind),
            beam_a: p.beams[0],
            beam_b: p.beams[1],
            s_a: p.s[0],
            s_b: p.s[1],
            gap: p.gap,
            force: p.force,
            alpha: p.alpha_deg,
        }));
    }
    for ((s, m), rows) in pairs {
        write_rows::<DistributionRow>(&dir.join(distribution_file(s, m)), &rows, &["step", "s", "gap", "force", "alpha"])?;
    }
    write_rows::<PointRow>(
        &dir.join(POINTS),
        &points,
        &["step", "kind", "beam_a", "beam_b", "s_a", "s_b", "gap", "force", "alpha"],
    )?;
    Ok(())
}

/// Serialize rows; the header is written explicitly so empty tables keep their columns.
fn write_rows<R: Serialize>(path: &Path, rows: &[R], header: &[&str]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn write_steps(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let reactions: Vec<String> = report.steps.first().map(|s| s.reactions.iter().map(|r| r.name.clone()).collect()).unwrap_or_default();
    let mut header: Vec<String> = [
        "step",
        "iterations",
        "halvings",
        "residual",
        "active_line_points",
        "point_contacts",
        "endpoint_line_contacts",
        "endpoint_endpoint_contacts",
        "failed_projections",
        "segmented_elements",
        "max_penetration",
        "min_contact_angle_deg",
        "alpha_min_deg",
        "gap_error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for r in &reactions {
        header.extend(["fx", "fy", "fz", "torque"].iter().map(|c| format!("{r}_{c}")));
    }
    w.write_record(&header)?;
    for s in &report.steps {
        let mut rec = vec![
            s.step.to_string(),
            s.iterations.to_string(),
            s.halvings.to_string(),
            opt(s.residuals.last().copied()),
            s.active_line_points.to_string(),
            s.point_contacts.to_string(),
            s.endpoint_line_contacts.to_string(),
            s.endpoint_endpoint_contacts.to_string(),
            s.failed_projections.to_string(),
            s.segmented_elements.to_string(),
            num(s.max_penetration),
            opt(s.min_contact_angle_deg),
            opt(s.alpha_min_deg),
            opt(s.gap_error),
        ];
        for r in &s.reactions {
            rec.extend(r.force.iter().copied().map(num));
            rec.push(num(r.torque));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    scenario: &'a str,
    beam: usize,
    rows: &'a [ConvergenceRow],
    fitted_order: Option<f64>,
}

/// Write `convergence.csv` and `convergence.json`.
pub fn write_convergence(dir: &Path, scenario: &str, beam: usize, rows: &[ConvergenceRow], fitted: Option<f64>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record(["elements", "error", "order"])?;
    for r in rows {
        w.write_record([r.elements.to_string(), num(r.error), opt(r.order)])?;
    }
    w.flush().map_err(|e| CliError::io(dir, e))?;
    let json = dir.join("convergence.json");
    let summary = ConvergenceSummary { scenario, beam, rows, fitted_order: fitted };
    fs::write(&json, serde_json::to_string_pretty(&summary)?).map_err(|e| CliError::io(&json, e))?;
    Ok(())
}
