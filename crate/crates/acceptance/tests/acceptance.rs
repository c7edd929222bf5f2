//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use triality_core::atlas::{chart_to_triality, locate_extrema, paint_regularized_curvature, ChartPoint};
use triality_core::bloch::*;
use triality_core::geometry::*;
use triality_core::transport::*;
use triality_core::{BathSpec, BlochVector, Controls, TrialityPoint};

const AXIS: [f64; 6] = [-2.0, -1.0, -0.3, 0.3, 1.0, 2.0];
const RATES: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
const Z0S: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

fn ness_grid() -> Vec<(Controls, BathSpec)> {
    let mut out = Vec::new();
    for &w in &AXIS {
        for &g in &AXIS {
            for &r in &RATES {
                for &z0 in &Z0S {
                    out.push((Controls::new(w, g), BathSpec::new(r, r, z0).unwrap()));
                }
            }
        }
    }
    out
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ness_exactness() -> Outcome {
    let start = Instant::now();
    let (mut rhs, mut solve, mut relax) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (c, b) in ness_grid() {
        let r = ness_closed_form(&c, &b);
        rhs = rhs.max(bloch_rhs(&r, &c, &b).max_abs());
        solve = solve.max(r.max_abs_diff(&ness_linear_solve(&c, &b).unwrap()));
        let t = 60.0 / b.min_rate();
        let relaxed = relax_to_ness(&BlochVector::default(), &c, &b, t, stable_step(&c, &b)).unwrap();
        relax = relax.max(r.max_abs_diff(&relaxed));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rhs < 1e-12 && solve < 1e-12 && relax < 1e-8 && secs < 5.0,
        format!("max|rhs| {rhs:.2e}, solve {solve:.2e}, relax {relax:.2e}, {secs:.2} s"),
    )
}

fn triality_and_constraint() -> Outcome {
    let (mut id, mut con) = (0.0_f64, 0.0_f64);
    for (c, b) in ness_grid() {
        let t = to_triality(&ness_closed_form(&c, &b)).unwrap();
        id = id.max(t.identity_residual().abs());
        con = con.max(steady_state_constraint(&t, &b).abs());
    }
    outcome(id < 1e-12 && con < 1e-12, format!("identity {id:.2e}, constraint {con:.2e}"))
}

fn phase_relation() -> Outcome {
    let mut worst = 0.0_f64;
    for (c, b) in ness_grid() {
        let phi = phase_of_ness(&c, &b).unwrap();
        worst = worst.max((phi.tan() + b.gamma2 / c.omega).abs());
    }
    outcome(worst < 1e-12, format!("max|tan φ + Γ₂/ω| {worst:.2e}"))
}

fn curvature_agreement() -> Outcome {
    let (mut fd_rel, mut phase_abs) = (0.0_f64, 0.0_f64);
    for (c, b) in ness_grid() {
        let closed = curvature_closed_form(&c, &b).f_omega_g;
        let fd = curvature_fd(&c, &b, DEFAULT_FD_STEP).f_omega_g;
        fd_rel = fd_rel.max((fd - closed).abs() / closed.abs().max(1.0));
        let t = to_triality(&ness_closed_form(&c, &b)).unwrap();
        if t.p.abs() >= 1e-3 {
            let phase = curvature_phase_resolved_on_ness(&c, &b).unwrap().f_omega_g;
            phase_abs = phase_abs.max((phase - closed).abs());
        }
    }
    let (c, b) = (Controls::new(1.0, 1.0), BathSpec::new(1.0, 1.0, 1.0).unwrap());
    let spot = (curvature_closed_form(&c, &b).f_omega_g - 5.0 / 18.0)
        .abs()
        .max((curvature_phase_resolved_on_ness(&c, &b).unwrap().f_omega_g - 5.0 / 18.0).abs());
    outcome(
        fd_rel <= 1e-6 && phase_abs <= 1e-10 && spot < 1e-10,
        format!("fd rel {fd_rel:.2e}, phase abs {phase_abs:.2e}, |F(1,1) − 5/18| {spot:.2e}"),
    )
}

fn gibbs_flatness() -> Outcome {
    let (mut curv, mut grad) = (0.0_f64, 0.0_f64);
    for beta in [0.5, 1.0, 2.0] {
        for &w in &AXIS {
            for &g in &AXIS {
                let c = Controls::new(w, g);
                curv = curv.max(curvature_fd_gibbs(&c, beta, DEFAULT_FD_STEP).abs());
                let a = connection_gibbs(&c, beta);
                let d = free_energy_gradient_fd(&c, beta, 1e-4);
                grad = grad.max((a.a_omega - d.a_omega).abs()).max((a.a_g - d.a_g).abs());
            }
        }
    }
    let loops = [
        (ControlPath::rectangle(Controls::new(1.0, 1.0), (0.5, 0.5)).unwrap(), 1.0),
        (ControlPath::ellipse(Controls::new(0.5, 0.5), (0.3, 0.2)).unwrap(), 2.0),
        (
            ControlPath::polyline(vec![
                Controls::new(0.2, 0.2),
                Controls::new(1.0, 0.2),
                Controls::new(0.2, 1.0),
                Controls::new(0.2, 0.2),
            ])
            .unwrap(),
            1.0,
        ),
    ];
    let work = loops
        .iter()
        .map(|(p, beta)| loop_work_gibbs(p, *beta).unwrap().w_cyc.abs())
        .fold(0.0, f64::max);
    outcome(
        curv < 1e-8 && work < 1e-10 && grad < 1e-8,
        format!("fd curvature {curv:.2e}, loop work {work:.2e}, gradient {grad:.2e}"),
    )
}

fn stokes_consistency() -> Outcome {
    let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
    let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.5, 0.5)).unwrap();
    let base = stokes_check(&path, &b, DEFAULT_FLUX_GRID).unwrap().residual;
    let doubled_path = path.clone().with_density(2.0 * DEFAULT_SAMPLES_PER_UNIT);
    let grid = (2 * DEFAULT_FLUX_GRID.0, 2 * DEFAULT_FLUX_GRID.1);
    let doubled = stokes_check(&doubled_path, &b, grid).unwrap().residual;
    outcome(
        base < 1e-4 && doubled < base,
        format!("residual {base:.2e} at default nodes, {doubled:.2e} doubled"),
    )
}

fn slow_driving_limit() -> Outcome {
    let start = Instant::now();
    let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
    let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.5, 0.5)).unwrap();
    let periods: Vec<f64> = [1e2, 3e2, 1e3, 3e3, 1e4].iter().map(|t| t / b.min_rate()).collect();
    let study = adiabatic_convergence_study(&path, &b, &periods).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let slope = study.slope.unwrap_or(f64::NAN);
    outcome(
        (-1.3..=-0.7).contains(&slope) && secs < 30.0,
        format!("slope {slope:.4} over T = 1e2..1e4, {secs:.2} s"),
    )
}

/// Points on the quarter-sphere and a spread of phases and baths.
fn sphere_samples() -> Vec<(TrialityPoint, BathSpec)> {
    let baths = [(1.0, 1.0, 1.0), (3.0, 1.0, 0.5), (0.4, 1.7, -0.8)];
    let mut out = Vec::new();
    for (g1, g2, z0) in baths {
        let b = BathSpec::new(g1, g2, z0).unwrap();
        for i in 0..17 {
            for j in 0..9 {
                for phi in [0.1, 0.7, FRAC_PI_2, 2.9] {
                    let p = ChartPoint::new(-1.5 + 3.0 * i as f64 / 16.0, 1.5 * j as f64 / 8.0);
                    let t = chart_to_triality(&p, phi);
                    if t.p.abs() >= PREDICTABILITY_POLE {
                        out.push((t, b));
                    }
                }
            }
        }
    }
    out
}

fn aligned_limit_and_oddness() -> Outcome {
    let (mut aligned, mut odd) = (0usize, 0usize);
    let samples = sphere_samples();
    for (t, b) in &samples {
        if curvature_phase_resolved(&TrialityPoint { phi: 0.0, ..*t }, b).unwrap() != 0.0 {
            aligned += 1;
        }
        let f = curvature_phase_resolved(t, b).unwrap();
        let m = curvature_phase_resolved(&TrialityPoint { phi: -t.phi, ..*t }, b).unwrap();
        if m != -f {
            odd += 1;
        }
    }
    outcome(
        aligned == 0 && odd == 0,
        format!("{} points: {aligned} nonzero at φ = 0, {odd} not exactly odd", samples.len()),
    )
}

fn weak_mismatch_sectors() -> Outcome {
    let mut negative = 0usize;
    for (g1, g2) in [(0.1, 1.0), (1.0, 1.0), (1.9, 1.0), (0.5, 0.3)] {
        let b = BathSpec::new(g1, g2, 1.0).unwrap();
        for k in 0..720 {
            let th = 2.0 * PI * k as f64 / 720.0;
            if weak_mismatch_bracket(th.cos(), th.sin(), &b) <= 0.0 {
                negative += 1;
            }
        }
    }
    let b = BathSpec::new(3.0, 1.0, 1.0).unwrap();
    let f = |th: f64| weak_mismatch_bracket(th.cos(), th.sin(), &b);
    let (mut lo, mut hi) = (0.1_f64, 1.4_f64);
    let bracketed = f(lo) > 0.0 && f(hi) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th = 0.5 * (lo + hi);
    let ratio = th.tan().powi(2);
    outcome(
        negative == 0 && bracketed && (ratio - 1.0).abs() < 1e-10,
        format!("{negative} non-positive samples below threshold, root P²/C² = {ratio:.15}"),
    )
}

fn chart_structure() -> Outcome {
    let b = BathSpec::new(1.0, 1.0, 1.0).unwrap();
    let field = paint_regularized_curvature(FRAC_PI_2, &b, (128, 64)).unwrap();
    let (n1, n2) = field.shape();
    let mut even = 0.0_f64;
    for j in 0..n2 {
        for i in 0..n1 {
            let (a, m) = (field.get(i, j).unwrap(), field.get(n1 - 1 - i, j).unwrap());
            even = even.max((a - m).abs());
        }
    }
    let peak = field.max_abs();
    let global: Vec<_> = locate_extrema(&field).into_iter().filter(|e| e.value.abs() == peak).collect();
    let mirrored = global.len() == 2 && global[0].coords.0 == -global[1].coords.0;
    let (mut interior, mut where_) = (!global.is_empty(), String::new());
    for e in &global {
        let t = chart_to_triality(&ChartPoint::new(e.coords.0, e.coords.1), FRAC_PI_2);
        interior &= e.interior && t.c > 0.1 && t.p.abs() > 0.1 && t.e > 0.1;
        where_ = format!("C {:.3}, |P| {:.3}, E {:.3}", t.c, t.p.abs(), t.e);
    }
    outcome(
        even <= 1e-15 && mirrored && interior,
        format!(
            "even-η defect {even:.1e}; {} global extrema, mirrored {mirrored}; at {where_}; interior {interior}",
            global.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("steady-state exactness", ness_exactness),
        ("triality identity and steady-state constraint", triality_and_constraint),
        ("phase relation", phase_relation),
        ("three-way curvature agreement", curvature_agreement),
        ("thermal flatness", gibbs_flatness),
        ("Stokes consistency", stokes_consistency),
        ("holonomy as slow-driving limit", slow_driving_limit),
        ("aligned limit and oddness in φ", aligned_limit_and_oddness),
        ("weak-mismatch sector structure", weak_mismatch_sectors),
        ("chart structure at φ = π/2", chart_structure),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
