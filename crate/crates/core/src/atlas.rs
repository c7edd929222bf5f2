//! Charts on the triality quarter-sphere `{C ≥ 0, E ≥ 0, C² + P² + E² = 1}`
//! and curvature fields painted on it at fixed coherence phase.
//!
//! The Mercator-like chart `(η, λ)` uses `E = sin λ` as latitude and `η` as the
//! azimuth around the coherence–predictability circle:
//! `C = cos λ cos η`, `P = cos λ sin η`. The meridian `η = 0` is `P = 0` and the
//! equator `λ = 0` is the pure-state boundary `E = 0`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::bloch::{BathSpec, TrialityPoint};
use crate::error::{Error, Result};
use crate::field::{Axis, ScalarField2D};
use crate::geometry::regularized_curvature;

/// Smallest painted grid, `(n_eta, n_lambda)`.
pub const MIN_PAINT_GRID: (usize, usize) = (32, 16);

/// Nodes closer than this many rows/columns to a chart edge are not interior.
pub const INTERIOR_MARGIN: usize = 2;

/// A point of the `(η, λ)` chart, `η ∈ [−π/2, π/2]`, `λ ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub eta: f64,
    pub lambda: f64,
}

impl ChartPoint {
    pub fn new(eta: f64, lambda: f64) -> Self {
        Self { eta, lambda }
    }

    /// Inverse chart: `η = atan2(P, C)`, `λ = asin E`.
    pub fn from_triality(t: &TrialityPoint) -> Self {
        Self {
            eta: libm::atan2(t.p, t.c),
            lambda: libm::asin(t.e.clamp(-1.0, 1.0)),
        }
    }
}

/// Triality coordinates of a chart point, with the coherence phase supplied
/// separately.
pub fn chart_to_triality(p: &ChartPoint, phi: f64) -> TrialityPoint {
    let (sl, cl) = (libm::sin(p.lambda), libm::cos(p.lambda));
    TrialityPoint {
        c: cl * libm::cos(p.eta),
        p: cl * libm::sin(p.eta),
        e: sl,
        phi,
    }
}

/// `n` azimuths spanning `[−π/2, π/2]` including both ends, built so that
/// node `n − 1 − i` is exactly the negation of node `i`.
pub fn eta_nodes(n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![0.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| (2.0 * i as f64 - m) / m * FRAC_PI_2)
        .collect()
}

/// `n` cell-centred latitudes in `(0, π/2)`.
pub fn lambda_nodes_centered(n: usize) -> Vec<f64> {
    let h = FRAC_PI_2 / n as f64;
    (0..n).map(|j| (j as f64 + 0.5) * h).collect()
}

/// `n ≥ 2` latitudes on `[0, π/2]` including both ends.
pub fn lambda_nodes_closed(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|j| if j == n - 1 { FRAC_PI_2 } else { j as f64 / m * FRAC_PI_2 })
        .collect()
}

/// Regularized curvature `P·F_ωg` at one chart node.
pub fn regularized_at(p: &ChartPoint, phi: f64, b: &BathSpec) -> Result<f64> {
    regularized_curvature(&chart_to_triality(p, phi), b)
}

/// Paint `P·F_ωg` at fixed `phi` over an `(n_eta, n_lambda)` chart grid.
///
/// Axes are `("eta", "lambda")`; `η` includes its endpoints, `λ` is
/// cell-centred so no node sits on the pure-state boundary or the pole.
pub fn paint_regularized_curvature(
    phi: f64,
    b: &BathSpec,
    grid: (usize, usize),
) -> Result<ScalarField2D> {
    if b.z0 == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    if grid.0 < MIN_PAINT_GRID.0 || grid.1 < MIN_PAINT_GRID.1 {
        return Err(Error::InvalidArgument("chart grid must be at least 32 x 16"));
    }
    let axis1 = Axis::new("eta", eta_nodes(grid.0));
    let axis2 = Axis::new("lambda", lambda_nodes_centered(grid.1));
    ScalarField2D::from_fn(axis1, axis2, |_, _, eta, lambda| {
        regularized_at(&ChartPoint::new(eta, lambda), phi, b)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: (usize, usize),
    pub coords: (f64, f64),
    pub value: f64,
    pub kind: ExtremumKind,
    /// At least [`INTERIOR_MARGIN`] nodes from every chart edge.
    pub interior: bool,
}

/// Strict local extrema by comparison with the (up to eight) unmasked
/// neighbours. Edge nodes are compared with the neighbours they have.
pub fn locate_extrema(field: &ScalarField2D) -> Vec<Extremum> {
    let (n1, n2) = field.shape();
    let mut out = Vec::new();
    for (i, j, v) in field.iter() {
        let mut above = false;
        let mut below = false;
        let mut tied = false;
        let mut neighbours = 0;
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= n1 as i64 || nj >= n2 as i64 {
                    continue;
                }
                let Some(w) = field.get(ni as usize, nj as usize) else {
                    continue;
                };
                neighbours += 1;
                if w > v {
                    above = true;
                } else if w < v {
                    below = true;
                } else {
                    tied = true;
                }
            }
        }
        if neighbours == 0 || tied || (above && below) {
            continue;
        }
        let kind = if above { ExtremumKind::Minimum } else { ExtremumKind::Maximum };
        let interior = i >= INTERIOR_MARGIN
            && j >= INTERIOR_MARGIN
            && i + INTERIOR_MARGIN < n1
            && j + INTERIOR_MARGIN < n2;
        out.push(Extremum {
            index: (i, j),
            coords: (field.axis1.samples[i], field.axis2.samples[j]),
            value: v,
            kind,
            interior,
        });
    }
    out
}

/// Ratio of the largest `|value|` on the first `λ` row (closest to the
/// pure-state boundary) to the largest `|value|` on the remaining rows.
///
/// Returns `None` when the interior rows are identically zero.
pub fn boundary_to_interior_ratio(field: &ScalarField2D) -> Option<f64> {
    let mut boundary = 0.0_f64;
    let mut interior = 0.0_f64;
    for (_, j, v) in field.iter() {
        if j == 0 {
            boundary = boundary.max(libm::fabs(v));
        } else {
            interior = interior.max(libm::fabs(v));
        }
    }
    (interior > 0.0).then(|| boundary / interior)
}

/// A labelled polyline through mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshPolyline {
    pub label: String,
    pub vertices: Vec<usize>,
}

/// Triangle mesh of the quarter-sphere with one scalar per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterSphereMesh {
    /// `(C, P, E)` positions.
    pub positions: Vec<[f64; 3]>,
    pub scalars: Vec<f64>,
    /// Zero-based vertex triples.
    pub faces: Vec<[usize; 3]>,
    pub polylines: Vec<MeshPolyline>,
}

/// Mesh over `n_eta × n_lambda` chart nodes with `λ ∈ [0, π/2]` including
/// both ends. The `λ = π/2` row collapses onto the pole `(0, 0, 1)`, which is
/// stored once, so the mesh holds `n_eta·(n_lambda − 1) + 1` vertices. The
/// `E = 0` row is also returned as the polyline `"pure_state_boundary"`.
pub fn quarter_sphere_mesh(
    phi: f64,
    b: &BathSpec,
    grid: (usize, usize),
) -> Result<QuarterSphereMesh> {
    let (n_eta, n_lambda) = grid;
    if n_eta < 2 || n_lambda < 2 {
        return Err(Error::InvalidArgument("mesh grid must be at least 2 x 2"));
    }
    if b.z0 == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    let etas = eta_nodes(n_eta);
    let lambdas = lambda_nodes_closed(n_lambda);
    let mut positions = Vec::with_capacity(n_eta * (n_lambda - 1) + 1);
    let mut scalars = Vec::with_capacity(positions.capacity());
    for &lambda in &lambdas[..n_lambda - 1] {
        for &eta in &etas {
            let t = chart_to_triality(&ChartPoint::new(eta, lambda), phi);
            positions.push([t.c, t.p, t.e]);
            scalars.push(regularized_curvature(&t, b)?);
        }
    }
    let pole = positions.len();
    let t = TrialityPoint { c: 0.0, p: 0.0, e: 1.0, phi };
    positions.push([0.0, 0.0, 1.0]);
    scalars.push(regularized_curvature(&t, b)?);

    let vertex = |i: usize, j: usize| if j == n_lambda - 1 { pole } else { j * n_eta + i };
    let mut faces = Vec::new();
    for j in 0..n_lambda - 1 {
        for i in 0..n_eta - 1 {
            let (a, bb, c, d) = (vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1));
            faces.push([a, bb, c]);
            if j + 1 < n_lambda - 1 {
                faces.push([a, c, d]);
            }
        }
    }
    let polylines = alloc::vec![MeshPolyline {
        label: String::from("pure_state_boundary"),
        vertices: (0..n_eta).collect(),
    }];
    Ok(QuarterSphereMesh { positions, scalars, faces, polylines })
}
