//! Closed control loops, cyclic work and the slow-driving limit.
//!
//! The quasistatic cyclic work `W = ∮ A` is a line integral of the work
//! connection; Stokes' theorem equates it with the curvature flux
//! `∬ F_ωg dω dg` through the enclosed region (counter-clockwise loops in the
//! `(ω, g)` plane, `ω` horizontal). [`stokes_check`] computes both sides
//! independently. [`dynamic_work`] drives the full time-dependent Bloch
//! equation around a loop so the quasistatic value can be recovered as the
//! period grows.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::bloch::{bloch_rhs, fastest_rate, ness_closed_form, BathSpec, BlochVector, Controls};
use crate::error::{Error, Result};
use crate::geometry::{connection_gibbs, connection_pointer, curvature_closed_form, ConnectionValue};
use crate::ode::rk4_step;
use crate::quadrature::{simpson_weights, trapezoid, GaussLegendre};

/// Gauss nodes per panel on analytic pieces.
pub const GAUSS_PANEL_NODES: usize = 32;
/// Default quadrature density, in nodes per unit length of control space.
pub const DEFAULT_SAMPLES_PER_UNIT: f64 = 64.0;
/// Default surface grid for the curvature flux.
pub const DEFAULT_FLUX_GRID: (usize, usize) = (64, 64);
/// Smallest surface grid accepted by [`curvature_flux`].
pub const MIN_FLUX_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathKind {
    Rectangle { center: Controls, half_widths: (f64, f64) },
    Ellipse { center: Controls, semi_axes: (f64, f64) },
    /// Vertices in traversal order; the last vertex must repeat the first.
    Polyline(Vec<Controls>),
}

/// A closed loop in the control plane.
///
/// Rectangles start at their lower-left corner and ellipses at `θ = 0`;
/// [`Orientation::Ccw`] runs them counter-clockwise. A polyline is traversed
/// in the given vertex order for `Ccw` and reversed for `Cw`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    pub kind: PathKind,
    pub orientation: Orientation,
    /// Quadrature nodes per unit length.
    pub samples_per_unit: f64,
}

impl ControlPath {
    pub fn rectangle(center: Controls, half_widths: (f64, f64)) -> Result<Self> {
        Self::from_kind(PathKind::Rectangle { center, half_widths })
    }

    pub fn ellipse(center: Controls, semi_axes: (f64, f64)) -> Result<Self> {
        Self::from_kind(PathKind::Ellipse { center, semi_axes })
    }

    pub fn polyline(vertices: Vec<Controls>) -> Result<Self> {
        Self::from_kind(PathKind::Polyline(vertices))
    }

    fn from_kind(kind: PathKind) -> Result<Self> {
        let path = Self {
            kind,
            orientation: Orientation::Ccw,
            samples_per_unit: DEFAULT_SAMPLES_PER_UNIT,
        };
        path.validate()?;
        Ok(path)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_density(mut self, samples_per_unit: f64) -> Self {
        self.samples_per_unit = samples_per_unit;
        self
    }

    pub fn reversed(&self) -> Self {
        self.clone().with_orientation(self.orientation.reversed())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.samples_per_unit > 0.0 && self.samples_per_unit.is_finite()) {
            return Err(Error::InvalidArgument("samples_per_unit must be positive"));
        }
        match &self.kind {
            PathKind::Rectangle { center, half_widths: (a, b) }
            | PathKind::Ellipse { center, semi_axes: (a, b) } => {
                if !(center.omega.is_finite() && center.g.is_finite()) {
                    return Err(Error::InvalidArgument("path center must be finite"));
                }
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidArgument("path sizes must be strictly positive"));
                }
                Ok(())
            }
            PathKind::Polyline(v) => {
                if v.len() < 2 {
                    return Err(Error::OpenPath);
                }
                if v.first() != v.last() {
                    return Err(Error::OpenPath);
                }
                if v.iter().any(|p| !(p.omega.is_finite() && p.g.is_finite())) {
                    return Err(Error::InvalidArgument("polyline vertices must be finite"));
                }
                Ok(())
            }
        }
    }

    /// The loop as oriented pieces, each parameterized on `τ ∈ [0, 1]`.
    pub fn pieces(&self) -> Vec<Piece> {
        let mut pieces: Vec<Piece> = match &self.kind {
            PathKind::Rectangle { center, half_widths: (a, b) } => {
                let corners = [
                    Controls::new(center.omega - a, center.g - b),
                    Controls::new(center.omega + a, center.g - b),
                    Controls::new(center.omega + a, center.g + b),
                    Controls::new(center.omega - a, center.g + b),
                ];
                (0..4)
                    .map(|k| Piece::Segment { from: corners[k], to: corners[(k + 1) % 4] })
                    .collect()
            }
            PathKind::Ellipse { center, semi_axes } => alloc::vec![Piece::Arc {
                center: *center,
                semi_axes: *semi_axes,
                theta0: 0.0,
                theta1: TAU,
            }],
            PathKind::Polyline(v) => v
                .windows(2)
                .map(|w| Piece::Segment { from: w[0], to: w[1] })
                .collect(),
        };
        if self.orientation == Orientation::Cw {
            pieces.reverse();
            for p in &mut pieces {
                *p = p.reversed();
            }
        }
        pieces
    }

    /// Largest `max(|ω|, |g|)` reached on the loop.
    pub fn max_control_magnitude(&self) -> f64 {
        match &self.kind {
            PathKind::Rectangle { center, half_widths: (a, b) }
            | PathKind::Ellipse { center, semi_axes: (a, b) } => {
                (libm::fabs(center.omega) + a).max(libm::fabs(center.g) + b)
            }
            PathKind::Polyline(v) => v
                .iter()
                .fold(0.0_f64, |m, p| m.max(libm::fabs(p.omega)).max(libm::fabs(p.g))),
        }
    }

    pub fn start(&self) -> Controls {
        self.pieces()[0].point(0.0)
    }
}

/// One analytic piece of a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment { from: Controls, to: Controls },
    Arc { center: Controls, semi_axes: (f64, f64), theta0: f64, theta1: f64 },
}

impl Piece {
    pub fn point(&self, tau: f64) -> Controls {
        match *self {
            Piece::Segment { from, to } => {
                // endpoints reproduced exactly so consecutive pieces join
                if tau == 1.0 {
                    return to;
                }
                Controls::new(
                    from.omega + tau * (to.omega - from.omega),
                    from.g + tau * (to.g - from.g),
                )
            }
            Piece::Arc { center, semi_axes: (a, b), theta0, theta1 } => {
                let th = theta0 + tau * (theta1 - theta0);
                Controls::new(center.omega + a * libm::cos(th), center.g + b * libm::sin(th))
            }
        }
    }

    /// `dλ/dτ`.
    pub fn tangent(&self, tau: f64) -> (f64, f64) {
        match *self {
            Piece::Segment { from, to } => (to.omega - from.omega, to.g - from.g),
            Piece::Arc { semi_axes: (a, b), theta0, theta1, .. } => {
                let th = theta0 + tau * (theta1 - theta0);
                let dth = theta1 - theta0;
                (-a * libm::sin(th) * dth, b * libm::cos(th) * dth)
            }
        }
    }

    /// Exact for segments; Ramanujan's approximation for a full ellipse,
    /// prorated by angle for partial arcs. Only used to size quadratures and
    /// time budgets.
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => libm::hypot(to.omega - from.omega, to.g - from.g),
            Piece::Arc { semi_axes: (a, b), theta0, theta1, .. } => {
                let full = PI * (3.0 * (a + b) - libm::sqrt((3.0 * a + b) * (a + 3.0 * b)));
                full * libm::fabs(theta1 - theta0) / TAU
            }
        }
    }

    fn reversed(&self) -> Self {
        match *self {
            Piece::Segment { from, to } => Piece::Segment { from: to, to: from },
            Piece::Arc { center, semi_axes, theta0, theta1 } => {
                Piece::Arc { center, semi_axes, theta0: theta1, theta1: theta0 }
            }
        }
    }

    /// `∫ A · dλ` over the piece using `A(λ(τ)) · λ'(τ)`.
    fn integrand<'a, F>(&'a self, connection: &'a F) -> impl Fn(f64) -> f64 + 'a
    where
        F: Fn(&Controls) -> ConnectionValue,
    {
        move |tau| {
            let a = connection(&self.point(tau));
            let (dw, dg) = self.tangent(tau);
            a.a_omega * dw + a.a_g * dg
        }
    }
}

/// Cyclic work from a line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkResult {
    pub w_cyc: f64,
    pub quadrature_nodes: usize,
    /// Difference between the reported value and the half-resolution one.
    pub estimated_error: f64,
}

/// `∮ A · dλ` for an arbitrary connection.
///
/// Rectangles and ellipses use 32-point Gauss panels; polylines use the
/// composite trapezoid rule at two resolutions, Richardson-combined.
pub fn loop_work_with<F>(path: &ControlPath, connection: F) -> Result<WorkResult>
where
    F: Fn(&Controls) -> ConnectionValue,
{
    path.validate()?;
    let pieces = path.pieces();
    match path.kind {
        PathKind::Rectangle { .. } | PathKind::Ellipse { .. } => {
            let rule = GaussLegendre::new(GAUSS_PANEL_NODES);
            let min_panels = if matches!(path.kind, PathKind::Ellipse { .. }) { 4 } else { 1 };
            let panels: Vec<usize> = pieces
                .iter()
                .map(|p| {
                    let n = libm::ceil(p.length() * path.samples_per_unit / GAUSS_PANEL_NODES as f64);
                    (n as usize).max(min_panels)
                })
                .collect();
            let integrate = |scale: usize| -> f64 {
                pieces
                    .iter()
                    .zip(&panels)
                    .map(|(p, &n)| rule.integrate_composite(0.0, 1.0, n * scale, p.integrand(&connection)))
                    .sum()
            };
            let coarse = integrate(1);
            let fine = integrate(2);
            let nodes = panels.iter().sum::<usize>() * 2 * GAUSS_PANEL_NODES;
            Ok(WorkResult {
                w_cyc: fine,
                quadrature_nodes: nodes,
                estimated_error: libm::fabs(fine - coarse),
            })
        }
        PathKind::Polyline(_) => {
            let intervals: Vec<usize> = pieces
                .iter()
                .map(|p| (libm::ceil(p.length() * path.samples_per_unit) as usize).max(1))
                .collect();
            let integrate = |scale: usize| -> f64 {
                pieces
                    .iter()
                    .zip(&intervals)
                    .map(|(p, &n)| trapezoid(0.0, 1.0, n * scale, p.integrand(&connection)))
                    .sum()
            };
            let coarse = integrate(1);
            let fine = integrate(2);
            let correction = (fine - coarse) / 3.0;
            let nodes = intervals.iter().map(|n| 2 * n + 1).sum();
            Ok(WorkResult {
                w_cyc: fine + correction,
                quadrature_nodes: nodes,
                estimated_error: libm::fabs(correction),
            })
        }
    }
}

/// Quasistatic cyclic work `½∮(P dω + C cos φ dg)` of the pointer-basis
/// steady state.
pub fn loop_work_quasistatic(path: &ControlPath, b: &BathSpec) -> Result<WorkResult> {
    b.validate()?;
    loop_work_with(path, |c| connection_pointer(c, b))
}

/// Cyclic work of the thermal connection; zero up to quadrature error.
pub fn loop_work_gibbs(path: &ControlPath, beta: f64) -> Result<WorkResult> {
    loop_work_with(path, |c| connection_gibbs(c, beta))
}

/// `∬ F dω dg` over the region enclosed by a rectangle or ellipse, signed by
/// orientation.
///
/// Rectangles use composite Simpson with `grid` intervals per axis (rounded up
/// to even). Ellipses are mapped to polar coordinates: `grid.0` Gauss nodes in
/// the radius and `grid.1` equally spaced angles (periodic trapezoid).
pub fn curvature_flux_of<F>(path: &ControlPath, curvature: F, grid: (usize, usize)) -> Result<f64>
where
    F: Fn(&Controls) -> f64,
{
    path.validate()?;
    if grid.0 < MIN_FLUX_GRID || grid.1 < MIN_FLUX_GRID {
        return Err(Error::InvalidArgument("flux grid must be at least 16 x 16"));
    }
    let unsigned = match path.kind {
        PathKind::Rectangle { center, half_widths: (a, b) } => {
            let (nw, ng) = (grid.0 + grid.0 % 2, grid.1 + grid.1 % 2);
            let (hw, hg) = (2.0 * a / nw as f64, 2.0 * b / ng as f64);
            let (ww, wg) = (simpson_weights(nw, hw), simpson_weights(ng, hg));
            let (w0, g0) = (center.omega - a, center.g - b);
            let mut total = 0.0;
            for (j, wj) in wg.iter().enumerate() {
                let g = g0 + j as f64 * hg;
                let row: f64 = ww
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| wi * curvature(&Controls::new(w0 + i as f64 * hw, g)))
                    .sum();
                total += wj * row;
            }
            total
        }
        PathKind::Ellipse { center, semi_axes: (a, b) } => {
            let radial = GaussLegendre::new(grid.0);
            let n_theta = grid.1;
            let dth = TAU / n_theta as f64;
            let mut total = 0.0;
            for k in 0..n_theta {
                let th = k as f64 * dth;
                let (s, c) = (libm::sin(th), libm::cos(th));
                total += radial.integrate(0.0, 1.0, |r| {
                    r * curvature(&Controls::new(center.omega + a * r * c, center.g + b * r * s))
                });
            }
            total * dth * a * b
        }
        PathKind::Polyline(_) => return Err(Error::UnsupportedRegion),
    };
    Ok(path.orientation.sign() * unsigned)
}

/// Curvature flux of the pointer-basis connection (closed-form curvature).
pub fn curvature_flux(path: &ControlPath, b: &BathSpec, grid: (usize, usize)) -> Result<f64> {
    b.validate()?;
    curvature_flux_of(path, |c| curvature_closed_form(c, b).f_omega_g, grid)
}

/// `|a − b| / max(|a|, |b|, 1e-15)`.
pub fn relative_residual(a: f64, b: f64) -> f64 {
    libm::fabs(a - b) / libm::fabs(a).max(libm::fabs(b)).max(1e-15)
}

/// Both sides of Stokes' theorem for one loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesCheck {
    pub loop_work: WorkResult,
    pub flux: f64,
    pub residual: f64,
}

pub fn stokes_check(path: &ControlPath, b: &BathSpec, grid: (usize, usize)) -> Result<StokesCheck> {
    if matches!(path.kind, PathKind::Polyline(_)) {
        return Err(Error::UnsupportedRegion);
    }
    let loop_work = loop_work_quasistatic(path, b)?;
    let flux = curvature_flux(path, b, grid)?;
    Ok(StokesCheck {
        loop_work,
        flux,
        residual: relative_residual(loop_work.w_cyc, flux),
    })
}

/// Relative Stokes residual at the default flux grid.
pub fn stokes_residual(path: &ControlPath, b: &BathSpec) -> Result<f64> {
    stokes_check(path, b, DEFAULT_FLUX_GRID).map(|s| s.residual)
}

/// Stokes check for the thermal connection, whose curvature vanishes
/// identically. Both sides are zero up to quadrature error, so the residual is
/// the absolute difference rather than the relative one.
pub fn stokes_check_gibbs(path: &ControlPath, beta: f64, grid: (usize, usize)) -> Result<StokesCheck> {
    if matches!(path.kind, PathKind::Polyline(_)) {
        return Err(Error::UnsupportedRegion);
    }
    let loop_work = loop_work_gibbs(path, beta)?;
    let flux = curvature_flux_of(path, |_| 0.0, grid)?;
    Ok(StokesCheck { loop_work, flux, residual: libm::fabs(loop_work.w_cyc - flux) })
}

/// Time parameterization of each piece of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Constant rate in each piece's parameter (arc length for segments,
    /// angle for the ellipse).
    UniformSpeed,
    /// `τ = 3u² − 2u³` within each piece, so the drive velocity vanishes at
    /// corners and `∂_t H` stays continuous.
    #[default]
    SmoothstepReparam,
}

impl Schedule {
    fn apply(self, u: f64) -> (f64, f64) {
        match self {
            Schedule::UniformSpeed => (u, 1.0),
            Schedule::SmoothstepReparam => (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)),
        }
    }
}

/// A loop traversed once per `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveProtocol {
    pub path: ControlPath,
    pub period: f64,
    pub schedule: Schedule,
}

impl DriveProtocol {
    pub fn new(path: ControlPath, period: f64, schedule: Schedule) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument("protocol period must be positive"));
        }
        path.validate()?;
        Ok(Self { path, period, schedule })
    }

    fn traversal(&self) -> Traversal {
        Traversal::new(self)
    }

    /// Controls and their time derivative at time `t` (periodic in `t`).
    pub fn controls_at(&self, t: f64) -> (Controls, (f64, f64)) {
        self.traversal().at(t)
    }
}

struct Traversal {
    pieces: Vec<Piece>,
    /// Fraction of the period at which each piece starts, plus a final 1.
    starts: Vec<f64>,
    period: f64,
    schedule: Schedule,
}

impl Traversal {
    fn new(p: &DriveProtocol) -> Self {
        let pieces = p.path.pieces();
        let lengths: Vec<f64> = pieces.iter().map(Piece::length).collect();
        let total: f64 = lengths.iter().sum();
        let n = pieces.len() as f64;
        let mut starts = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        for l in &lengths {
            starts.push(acc);
            acc += if total > 0.0 { l / total } else { 1.0 / n };
        }
        starts.push(1.0);
        Self { pieces, starts, period: p.period, schedule: p.schedule }
    }

    fn at(&self, t: f64) -> (Controls, (f64, f64)) {
        let s = t / self.period;
        let s = s - libm::floor(s);
        let k = self.starts[1..]
            .iter()
            .position(|&end| s < end)
            .unwrap_or(self.pieces.len() - 1);
        let width = self.starts[k + 1] - self.starts[k];
        let piece = &self.pieces[k];
        if width <= 0.0 {
            return (piece.point(0.0), (0.0, 0.0));
        }
        let u = ((s - self.starts[k]) / width).clamp(0.0, 1.0);
        let (tau, dtau_du) = self.schedule.apply(u);
        let (dw, dg) = piece.tangent(tau);
        let rate = dtau_du / (width * self.period);
        (piece.point(tau), (dw * rate, dg * rate))
    }
}

/// Largest step accepted by [`dynamic_work`] for this protocol and bath.
pub fn protocol_stable_step(path: &ControlPath, b: &BathSpec) -> f64 {
    let m = path.max_control_magnitude();
    0.1 / fastest_rate(&Controls::new(m, m), b)
}

/// Work `∫ ½(z ω̇ + x ġ) dt` done on the qubit over one period, measured after
/// a full burn-in period so the transient from `initial` has decayed.
pub fn dynamic_work(
    protocol: &DriveProtocol,
    b: &BathSpec,
    initial: &BlochVector,
    dt: f64,
) -> Result<f64> {
    b.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    let limit = protocol_stable_step(&protocol.path, b);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let traversal = protocol.traversal();
    let steps = libm::ceil(protocol.period / dt) as usize;
    let h = protocol.period / steps as f64;
    let mut rhs = |t: f64, y: &[f64; 4]| -> [f64; 4] {
        let (c, (dw, dg)) = traversal.at(t);
        let r = BlochVector::new(y[0], y[1], y[2]);
        let d = bloch_rhs(&r, &c, b);
        [d.x, d.y, d.z, 0.5 * (r.z * dw + r.x * dg)]
    };
    let mut y = [initial.x, initial.y, initial.z, 0.0];
    for cycle in 0..2 {
        y[3] = 0.0;
        let t0 = cycle as f64 * protocol.period;
        for k in 0..steps {
            y = rk4_step(&mut rhs, t0 + k as f64 * h, &y, h);
        }
    }
    Ok(y[3])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub period: f64,
    pub work: f64,
    pub error: f64,
}

/// Dynamical work against the quasistatic holonomy for a range of periods.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub quasistatic: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log period`; absent with
    /// fewer than two usable rows.
    pub slope: Option<f64>,
}

impl ConvergenceStudy {
    /// Whether the error at the longest period is below the error at the
    /// shortest one.
    pub fn converges(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(first), Some(last)) if self.rows.len() > 1 => last.error < first.error,
            _ => true,
        }
    }
}

/// [`adiabatic_convergence_study_with`] using smoothstep timing and half the
/// stability-limited step.
pub fn adiabatic_convergence_study(
    path: &ControlPath,
    b: &BathSpec,
    periods: &[f64],
) -> Result<ConvergenceStudy> {
    let dt = 0.5 * protocol_stable_step(path, b);
    adiabatic_convergence_study_with(path, b, periods, Schedule::SmoothstepReparam, dt)
}

pub fn adiabatic_convergence_study_with(
    path: &ControlPath,
    b: &BathSpec,
    periods: &[f64],
    schedule: Schedule,
    dt: f64,
) -> Result<ConvergenceStudy> {
    if periods.is_empty() {
        return Err(Error::InvalidArgument("at least one period is required"));
    }
    if periods.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("periods must be strictly ascending"));
    }
    let quasistatic = loop_work_quasistatic(path, b)?.w_cyc;
    let initial = ness_closed_form(&path.start(), b);
    let mut rows = Vec::with_capacity(periods.len());
    for &period in periods {
        let protocol = DriveProtocol::new(path.clone(), period, schedule)?;
        let work = dynamic_work(&protocol, b, &initial, dt)?;
        rows.push(ConvergenceRow { period, work, error: libm::fabs(work - quasistatic) });
    }
    let slope = log_log_slope(&rows);
    Ok(ConvergenceStudy { quasistatic, rows, slope })
}

/// The thermal (Hamiltonian-aligned) dissipator has no dynamical model here,
/// so there is no slow-driving study to run against its zero holonomy.
pub fn adiabatic_convergence_study_gibbs(
    _path: &ControlPath,
    _beta: f64,
    _periods: &[f64],
) -> Result<ConvergenceStudy> {
    Err(Error::NotSupported("no dynamics for the aligned dissipator"))
}

fn log_log_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| (libm::log(r.period), libm::log(r.error)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_bath() -> BathSpec {
        BathSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_open_and_degenerate_paths() {
        let open = ControlPath::polyline(vec![Controls::new(0.0, 0.0), Controls::new(1.0, 0.0)]);
        assert_eq!(open.unwrap_err(), Error::OpenPath);
        assert!(ControlPath::rectangle(Controls::new(1.0, 1.0), (0.0, 0.1)).is_err());
        assert!(ControlPath::ellipse(Controls::new(1.0, 1.0), (0.1, -0.1)).is_err());
    }

    #[test]
    fn pieces_close_exactly() {
        for path in [
            ControlPath::rectangle(Controls::new(0.3, -0.7), (0.1, 0.37)).unwrap(),
            ControlPath::rectangle(Controls::new(0.3, -0.7), (0.1, 0.37))
                .unwrap()
                .with_orientation(Orientation::Cw),
            ControlPath::ellipse(Controls::new(1.0, 2.0), (0.5, 0.25)).unwrap(),
        ] {
            let pieces = path.pieces();
            for w in pieces.windows(2) {
                assert_eq!(w[0].point(1.0), w[1].point(0.0));
            }
            let first = pieces[0].point(0.0);
            let last = pieces[pieces.len() - 1].point(1.0);
            assert!((first.omega - last.omega).abs() < 1e-15 && (first.g - last.g).abs() < 1e-15);
        }
    }

    #[test]
    fn small_rectangle_work_matches_curvature_times_area() {
        let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.01, 0.01)).unwrap();
        let w = loop_work_quasistatic(&path, &unit_bath()).unwrap();
        let want = 5.0 / 18.0 * 4e-4;
        assert!(((w.w_cyc - want) / want).abs() < 0.01);
        assert!(w.estimated_error >= 0.0);
    }

    #[test]
    fn unpolarized_bath_does_no_work() {
        let b = BathSpec::new(0.6, 1.4, 0.0).unwrap();
        let path = ControlPath::ellipse(Controls::new(0.4, -0.2), (0.7, 0.5)).unwrap();
        assert!(loop_work_quasistatic(&path, &b).unwrap().w_cyc.abs() < 1e-12);
        assert_eq!(curvature_flux(&path, &b, (32, 32)).unwrap(), 0.0);
    }

    #[test]
    fn retraced_path_cancels() {
        let path = ControlPath::polyline(vec![
            Controls::new(0.5, 1.0),
            Controls::new(1.5, 1.0),
            Controls::new(0.5, 1.0),
        ])
        .unwrap();
        assert!(loop_work_quasistatic(&path, &unit_bath()).unwrap().w_cyc.abs() < 1e-15);
    }

    #[test]
    fn flux_examples() {
        let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.01, 0.01)).unwrap();
        let flux = curvature_flux(&path, &unit_bath(), (16, 16)).unwrap();
        // midpoint value × area; the exact integral sits 9.9e-10 below it
        assert!((flux - 5.0 / 18.0 * 4e-4).abs() < 1e-9);

        let mirror = ControlPath::rectangle(Controls::new(1.0, -1.0), (0.3, 0.2)).unwrap();
        let upper = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.3, 0.2)).unwrap();
        let (m, u) = (
            curvature_flux(&mirror, &unit_bath(), (32, 32)).unwrap(),
            curvature_flux(&upper, &unit_bath(), (32, 32)).unwrap(),
        );
        assert!((m + u).abs() < 1e-15);

        let tri = ControlPath::polyline(vec![
            Controls::new(0.0, 0.0),
            Controls::new(1.0, 0.0),
            Controls::new(0.0, 1.0),
            Controls::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(curvature_flux(&tri, &unit_bath(), (32, 32)), Err(Error::UnsupportedRegion));
        assert!(curvature_flux(&upper, &unit_bath(), (8, 32)).is_err());
    }

    #[test]
    fn static_protocol_does_no_work() {
        let path = ControlPath::polyline(vec![Controls::new(1.0, 1.0), Controls::new(1.0, 1.0)]).unwrap();
        let protocol = DriveProtocol::new(path, 10.0, Schedule::UniformSpeed).unwrap();
        let w = dynamic_work(&protocol, &unit_bath(), &BlochVector::default(), 0.01).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn protocol_rejects_large_step() {
        let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.5, 0.5)).unwrap();
        let protocol = DriveProtocol::new(path, 10.0, Schedule::UniformSpeed).unwrap();
        let err = dynamic_work(&protocol, &unit_bath(), &BlochVector::default(), 0.5).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
    }

    #[test]
    fn protocol_positions_follow_schedule() {
        let path = ControlPath::rectangle(Controls::new(0.0, 0.0), (1.0, 1.0)).unwrap();
        for schedule in [Schedule::UniformSpeed, Schedule::SmoothstepReparam] {
            let p = DriveProtocol::new(path.clone(), 8.0, schedule).unwrap();
            let (c, _) = p.controls_at(0.0);
            assert_eq!(c, Controls::new(-1.0, -1.0));
            let (c, _) = p.controls_at(2.0);
            assert_eq!(c, Controls::new(1.0, -1.0));
            let (c, v) = p.controls_at(1.0);
            assert!((c.omega - 0.0).abs() < 1e-15 && c.g == -1.0);
            let speed = match schedule {
                Schedule::UniformSpeed => 1.0,
                Schedule::SmoothstepReparam => 1.5,
            };
            assert!((v.0 - speed).abs() < 1e-12 && v.1 == 0.0);
        }
        let p = DriveProtocol::new(path, 8.0, Schedule::SmoothstepReparam).unwrap();
        let (_, v) = p.controls_at(2.0);
        assert!(v.0.abs() < 1e-12 && v.1.abs() < 1e-12);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<ConvergenceRow> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&t| ConvergenceRow { period: t, work: 0.0, error: 3.0 / t })
            .collect();
        assert!((log_log_slope(&rows).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&rows[..1]), None);
    }

    #[test]
    fn study_rejects_unsorted_periods() {
        let path = ControlPath::rectangle(Controls::new(1.0, 1.0), (0.5, 0.5)).unwrap();
        assert!(adiabatic_convergence_study(&path, &unit_bath(), &[100.0, 50.0]).is_err());
        assert!(adiabatic_convergence_study(&path, &unit_bath(), &[]).is_err());
    }
}
