//! `run` outputs: trajectory CSV, text report and JSON report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lrmech::diagnostics::{conservation_report, max_constraint_residuals, QuantityDrift};
use lrmech::integrators::Trajectory;
use lrmech::phase::{NoetherLaw, Quantity, SystemKind};
use serde::Serialize;

use crate::error::CliError;
use crate::setup::{Built, Typed};

#[derive(Debug, Serialize)]
pub struct ConstraintEntry {
    pub name: String,
    pub max_abs: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub system: String,
    pub n: usize,
    pub method: String,
    pub h: f64,
    pub steps: usize,
    pub final_time: f64,
    pub rows: usize,
    pub quantities: Vec<QuantityDrift>,
    pub constraints: Vec<ConstraintEntry>,
}

/// Quantities reported for every run of this system, followed by the scenario's extras.
pub fn default_quantities(b: &Built) -> Vec<Quantity> {
    let n = b.scenario.n;
    let mut qs = vec![Quantity::Energy];
    match &b.typed {
        Typed::Lr(_) if b.constraints.is_empty() => qs.push(Quantity::MomentumNorm),
        Typed::Lr(_) => qs.push(Quantity::Noether(NoetherLaw::SpatialMomentum)),
        Typed::LplusR(_) if b.scenario.system == SystemKind::Lplusr => qs.push(Quantity::MomentumNorm),
        Typed::Coupled(_) => {
            qs.push(Quantity::Noether(NoetherLaw::PeripheralKernel));
            qs.push(Quantity::Noether(NoetherLaw::SpatialMomentum));
        }
        Typed::CoupledReduced(_) => qs.push(Quantity::Noether(NoetherLaw::SpatialMomentum)),
        Typed::Support(_) => {
            qs.push(Quantity::MomentumNorm);
            qs.extend((1..=n).map(|k| Quantity::TraceCoefficients { k }));
        }
        Typed::Gsr(_) => {
            qs.push(Quantity::MomentumNorm);
            qs.push(Quantity::OrbitNorm);
        }
        _ => {}
    }
    for q in &b.scenario.diagnostics.quantities {
        if !qs.contains(q) {
            qs.push(q.clone());
        }
    }
    qs
}

pub fn build_report(b: &Built, traj: &Trajectory) -> Result<RunReport, CliError> {
    let sys = b.system();
    let quantities = conservation_report(sys, traj, &default_quantities(b))?.entries;
    let constraints = max_constraint_residuals(sys, traj)?
        .into_iter()
        .map(|(name, max_abs)| ConstraintEntry { name, max_abs })
        .collect();
    Ok(RunReport {
        system: b.scenario.system.name().to_string(),
        n: b.scenario.n,
        method: b.cfg.method.name().to_string(),
        h: b.cfg.h,
        steps: b.cfg.steps,
        final_time: traj.final_time(),
        rows: traj.len(),
        quantities,
        constraints,
    })
}

/// Header `t` plus the layout's column names; values at 17 significant digits.
pub fn trajectory_csv(b: &Built, traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in b.system().layout().column_names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        write!(out, "{t:.16e}").expect("writing to a String");
        for v in x.to_row() {
            write!(out, ",{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn report_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system: {} (n = {})", r.system, r.n);
    let _ = writeln!(out, "integrator: {}, h = {:e}, steps = {}, final t = {}", r.method, r.h, r.steps, r.final_time);
    let _ = writeln!(out, "rows: {}", r.rows);
    let _ = writeln!(out);
    let _ = writeln!(out, "conserved quantities (max drift over the run):");
    let width = r.quantities.iter().map(|q| q.name.len()).max().unwrap_or(0);
    for q in &r.quantities {
        let initial = if q.initial.len() == 1 {
            format!("{:.6e}", q.initial[0])
        } else {
            format!("[{} values]", q.initial.len())
        };
        let _ = writeln!(
            out,
            "  {:width$}  initial {initial}  abs drift {:.3e}  rel drift {:.3e}",
            q.name, q.max_abs_drift, q.max_rel_drift
        );
    }
    let _ = writeln!(out);
    if r.constraints.is_empty() {
        let _ = writeln!(out, "constraints: none");
    } else {
        let _ = writeln!(out, "constraints (max |residual|):");
        let width = r.constraints.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &r.constraints {
            let _ = writeln!(out, "  {:width$}  {:.3e}", c.name, c.max_abs);
        }
    }
    out
}

pub fn write_outputs(dir: &Path, csv: &str, report: Option<&RunReport>) -> Result<(), CliError> {
    let io = |e: std::io::Error, what: &str| CliError::Io(format!("cannot write {what}: {e}"));
    fs::create_dir_all(dir).map_err(|e| io(e, &dir.display().to_string()))?;
    fs::write(dir.join("trajectory.csv"), csv).map_err(|e| io(e, "trajectory.csv"))?;
    if let Some(r) = report {
        fs::write(dir.join("report.txt"), report_text(r)).map_err(|e| io(e, "report.txt"))?;
        let json = serde_json::to_string_pretty(r).map_err(|e| CliError::Io(format!("cannot encode report: {e}")))?;
        fs::write(dir.join("report.json"), json + "\n").map_err(|e| io(e, "report.json"))?;
    }
    Ok(())
}
