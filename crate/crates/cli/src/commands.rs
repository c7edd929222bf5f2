use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};
use triality_core::atlas::{
    boundary_to_interior_ratio, chart_to_triality, locate_extrema, paint_regularized_curvature,
    quarter_sphere_mesh, ChartPoint, Extremum, ExtremumKind, QuarterSphereMesh,
};
use triality_core::bloch::{bloch_rhs, ness_closed_form, phase_of_ness, steady_state_constraint, to_triality};
use triality_core::geometry::{curvature_closed_form, curvature_fd, DEFAULT_FD_STEP};
use triality_core::transport::{
    adiabatic_convergence_study, adiabatic_convergence_study_gibbs, stokes_check, stokes_check_gibbs,
    ControlPath, ConvergenceStudy,
};
use triality_core::{Controls, Error as CoreError, ScalarField2D};

use crate::config::{PathShape, RunConfig};
use crate::error::CliError;
use crate::output::{csv_bytes, number, sci, OutputDir, Timings};
use crate::render::{cell_position, png_bytes, Heatmap, Overlay};

/// Pixels per grid cell edge in rendered heatmaps.
const CELL_PX: u32 = 6;

pub fn steady_state(cfg: &RunConfig, out: &mut OutputDir, timings: &mut Timings) -> Result<String, CliError> {
    let (c, b) = (cfg.controls(), cfg.bath());
    let report = timings.time("compute", || -> Result<Value, CliError> {
        let r = ness_closed_form(&c, &b);
        let t = to_triality(&r)?;
        let (phase, phase_error, phase_residual) = match phase_of_ness(&c, &b) {
            Ok(phi) => {
                let residual = if c.omega != 0.0 { number((phi.tan() + b.gamma2 / c.omega).abs()) } else { Value::Null };
                (number(phi), Value::Null, residual)
            }
            Err(CoreError::DegenerateCoherence) => (Value::Null, json!("DegenerateCoherence"), Value::Null),
            Err(e) => return Err(e.into()),
        };
        Ok(json!({
            "bloch": {"x": r.x, "y": r.y, "z": r.z},
            "constraint_residual": steady_state_constraint(&t, &b).abs(),
            "phase": phase,
            "phase_error": phase_error,
            "phase_relation_residual": phase_residual,
            "stationarity_residual": bloch_rhs(&r, &c, &b).max_abs(),
            "triality": {"C": t.c, "P": t.p, "E": t.e, "phi": t.phi, "identity_residual": t.identity_residual().abs()},
        }))
    })?;
    timings.time("write", || out.write_json("ness.json", &report))?;
    let r = &report["bloch"];
    Ok(format!("steady state (x, y, z) = ({}, {}, {})", r["x"], r["y"], r["z"]))
}

pub fn curvature_map(cfg: &RunConfig, out: &mut OutputDir, timings: &mut Timings) -> Result<String, CliError> {
    let b = cfg.bath();
    let (n1, n2) = cfg.grid;
    let omegas = linspace(cfg.omega_range, n1);
    let gs = linspace(cfg.g_range, n2);
    // rows[j][i] = (F_fd, F_closed) at (omegas[i], gs[j])
    let rows: Vec<Vec<(f64, f64)>> = timings.time("compute", || {
        gs.par_iter()
            .map(|&g| {
                omegas
                    .iter()
                    .map(|&w| {
                        let c = Controls::new(w, g);
                        (curvature_fd(&c, &b, DEFAULT_FD_STEP).f_omega_g, curvature_closed_form(&c, &b).f_omega_g)
                    })
                    .collect()
            })
            .collect()
    });
    let mut max_diff = 0.0_f64;
    let mut closed = Vec::with_capacity(n1 * n2);
    let mut records = Vec::with_capacity(n1 * n2);
    for (j, row) in rows.iter().enumerate() {
        for (i, &(fd, cf)) in row.iter().enumerate() {
            let diff = (fd - cf).abs();
            max_diff = max_diff.max(diff);
            closed.push(cf);
            records.push(vec![omegas[i], gs[j], fd, cf, diff]);
        }
    }
    timings.time("write", || -> Result<(), CliError> {
        out.write("curvature_grid.csv", &csv_bytes(&["omega", "g", "F_fd", "F_closed", "abs_diff"], records)?)?;
        let img = Heatmap { values: &closed, n1, n2, cell: CELL_PX }.render(&[]);
        out.write("curvature_grid.png", &png_bytes(&img)?)
    })?;
    Ok(format!("curvature map {n1}x{n2}, max |F_fd - F_closed| = {max_diff:.3e}"))
}

pub fn cycle(cfg: &RunConfig, out: &mut OutputDir, timings: &mut Timings) -> Result<String, CliError> {
    let center = Controls::new(cfg.center.0, cfg.center.1);
    let path = match cfg.path {
        PathShape::Rect => ControlPath::rectangle(center, cfg.size)?,
        PathShape::Ellipse => ControlPath::ellipse(center, cfg.size)?,
    }
    .with_orientation(cfg.orientation)
    .with_density(cfg.samples_per_unit);
    let b = cfg.bath();
    let (check, study) = timings.time("compute", || -> Result<_, CliError> {
        let check = if cfg.gibbs {
            stokes_check_gibbs(&path, cfg.beta, cfg.flux_grid)?
        } else {
            stokes_check(&path, &b, cfg.flux_grid)?
        };
        let study = if cfg.adiabatic.is_empty() {
            None
        } else if cfg.gibbs {
            Some(adiabatic_convergence_study_gibbs(&path, cfg.beta, &cfg.adiabatic)?)
        } else {
            Some(adiabatic_convergence_study(&path, &b, &cfg.adiabatic)?)
        };
        Ok((check, study))
    })?;
    if let Some(s) = &study {
        if !s.converges() {
            return Err(CliError::Numerical(format!(
                "adiabatic study does not converge: error {:.3e} at T = {} vs {:.3e} at T = {}",
                s.rows[s.rows.len() - 1].error,
                s.rows[s.rows.len() - 1].period,
                s.rows[0].error,
                s.rows[0].period
            )));
        }
    }
    let report = json!({
        "adiabatic": study.as_ref().map(study_json),
        "connection": if cfg.gibbs { "gibbs" } else { "pointer" },
        "loop_estimated_error": check.loop_work.estimated_error,
        "loop_quadrature_nodes": check.loop_work.quadrature_nodes,
        "residual_kind": if cfg.gibbs { "absolute" } else { "relative" },
        "stokes_residual": check.residual,
        "w_flux": check.flux,
        "w_loop": check.loop_work.w_cyc,
    });
    timings.time("write", || out.write_json("cycle.json", &report))?;
    let mut msg = format!(
        "W_loop = {:.12e}, W_flux = {:.12e}, stokes residual = {:.3e}",
        check.loop_work.w_cyc, check.flux, check.residual
    );
    if let Some(slope) = study.as_ref().and_then(|s| s.slope) {
        let _ = write!(msg, ", adiabatic slope = {slope:.4}");
    }
    Ok(msg)
}

fn study_json(s: &ConvergenceStudy) -> Value {
    json!({
        "quasistatic": s.quasistatic,
        "rows": s.rows.iter().map(|r| json!({"error": r.error, "period": r.period, "work": r.work})).collect::<Vec<_>>(),
        "slope": s.slope.map_or(Value::Null, number),
    })
}

pub fn triality_map(cfg: &RunConfig, out: &mut OutputDir, timings: &mut Timings) -> Result<String, CliError> {
    let b = cfg.bath();
    let (field, mesh) = timings.time("compute", || -> Result<_, CliError> {
        let field = paint_regularized_curvature(cfg.phi, &b, cfg.grid)?;
        let mesh = quarter_sphere_mesh(cfg.phi, &b, cfg.grid)?;
        Ok((field, mesh))
    })?;
    let (extrema, report) = timings.time("analyse", || {
        let extrema = locate_extrema(&field);
        let report = extrema_report(&field, &extrema, cfg.phi);
        (extrema, report)
    });
    timings.time("write", || -> Result<(), CliError> {
        let rows = field.iter().map(|(i, j, v)| {
            let (eta, lambda) = (field.axis1.samples[i], field.axis2.samples[j]);
            let t = chart_to_triality(&ChartPoint::new(eta, lambda), cfg.phi);
            vec![eta, lambda, t.c, t.p, t.e, v]
        });
        out.write("mercator.csv", &csv_bytes(&["eta", "lambda", "C", "P", "E", "F_reg"], rows)?)?;
        let (n1, n2) = field.shape();
        let overlays = [
            Overlay::Horizontal(cell_position(&field.axis2.samples, 0.0)),
            Overlay::Vertical(cell_position(&field.axis1.samples, 0.0)),
        ];
        let img = Heatmap { values: field.values(), n1, n2, cell: CELL_PX }.render(&overlays);
        out.write("mercator.png", &png_bytes(&img)?)?;
        out.write("sphere_mesh.txt", mesh_text(&mesh).as_bytes())?;
        out.write_json("extrema.json", &report)
    })?;
    let global = extrema.iter().filter(|e| e.value.abs() == field.max_abs()).count();
    Ok(format!(
        "chart {}x{}: {} local extrema, {global} at the global |F_reg| = {:.6e}",
        cfg.grid.0,
        cfg.grid.1,
        extrema.len(),
        field.max_abs()
    ))
}

fn extrema_report(field: &ScalarField2D, extrema: &[Extremum], phi: f64) -> Value {
    let peak = field.max_abs();
    let entry = |e: &Extremum| {
        let t = chart_to_triality(&ChartPoint::new(e.coords.0, e.coords.1), phi);
        json!({
            "C": t.c,
            "E": t.e,
            "P": t.p,
            "eta": e.coords.0,
            "global": peak > 0.0 && e.value.abs() == peak,
            "index": [e.index.0, e.index.1],
            "interior": e.interior,
            "kind": match e.kind { ExtremumKind::Maximum => "maximum", ExtremumKind::Minimum => "minimum" },
            "lambda": e.coords.1,
            "value": e.value,
        })
    };
    let global: Vec<&Extremum> = extrema.iter().filter(|e| peak > 0.0 && e.value.abs() == peak).collect();
    let mirrored = global.len() == 2 && global[0].coords.0 == -global[1].coords.0;
    json!({
        "boundary_to_interior_ratio": boundary_to_interior_ratio(field).map_or(Value::Null, number),
        "extrema": extrema.iter().map(entry).collect::<Vec<_>>(),
        "global_abs_max": peak,
        "global_count": global.len(),
        "global_interior": !global.is_empty() && global.iter().all(|e| e.interior),
        "global_mirrored_in_eta": mirrored,
    })
}

/// OBJ-like text: `v C P E F_reg` vertices, 1-based `f` faces and each
/// polyline as a named group with an `l` element.
fn mesh_text(mesh: &QuarterSphereMesh) -> String {
    let mut s = String::from("# quarter-sphere mesh: v C P E F_reg; faces and lines are 1-based\n");
    for (p, v) in mesh.positions.iter().zip(&mesh.scalars) {
        let _ = writeln!(s, "v {} {} {} {}", sci(p[0]), sci(p[1]), sci(p[2]), sci(*v));
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    for line in &mesh.polylines {
        let _ = writeln!(s, "g {}", line.label);
        s.push('l');
        for v in &line.vertices {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    s
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { hi } else { lo + k as f64 * step }).collect()
}
