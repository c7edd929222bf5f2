//! Bloch dynamics of the driven qubit, its steady state, and the maps between
//! Cartesian, cylindrical and triality coordinates.
//!
//! The equation of motion is
//!
//! ```text
//! ṙ = h × r − Γ₂ (x x̂ + y ŷ) − Γ₁ (z − z₀) ẑ,     h = (g, 0, ω)
//! ```
//!
//! with relaxation fixed in the σ_z pointer basis. All rates, `ω` and `g` share
//! one inverse-time unit (ħ = 1).

use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::ode::rk4_integrate;

/// Numerical slack on the Bloch-ball radius treated as a pure state.
pub const BALL_SLACK: f64 = 1e-12;
/// Radii beyond `1 + OUTSIDE_BALL_TOLERANCE` are rejected as unphysical.
pub const OUTSIDE_BALL_TOLERANCE: f64 = 1e-9;
/// Coherence below this is treated as zero when assigning a phase.
pub const COHERENCE_FLOOR: f64 = 1e-14;

/// A point `(ω, g)` of the control plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub omega: f64,
    pub g: f64,
}

impl Controls {
    pub const fn new(omega: f64, g: f64) -> Self {
        Self { omega, g }
    }

    /// Field vector `h = (g, 0, ω)` of the Hamiltonian.
    pub fn field(&self) -> [f64; 3] {
        [self.g, 0.0, self.omega]
    }

    /// Level splitting `ε = √(ω² + g²)`.
    pub fn splitting(&self) -> f64 {
        libm::hypot(self.omega, self.g)
    }
}

/// Pointer-basis dissipation: longitudinal rate Γ₁, transverse rate Γ₂ and
/// target polarization z₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub gamma1: f64,
    pub gamma2: f64,
    pub z0: f64,
}

impl BathSpec {
    /// Checked constructor.
    pub fn new(gamma1: f64, gamma2: f64, z0: f64) -> Result<Self> {
        let bath = Self { gamma1, gamma2, z0 };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1.is_finite() && self.gamma1 > 0.0) {
            return Err(Error::InvalidBath("gamma1 > 0 required"));
        }
        if !(self.gamma2.is_finite() && self.gamma2 > 0.0) {
            return Err(Error::InvalidBath("gamma2 > 0 required"));
        }
        if !(self.z0.is_finite() && libm::fabs(self.z0) <= 1.0) {
            return Err(Error::InvalidBath("|z0| <= 1 required"));
        }
        Ok(())
    }

    pub fn min_rate(&self) -> f64 {
        self.gamma1.min(self.gamma2)
    }
}

/// Reduced qubit state `ρ = ½(I + r·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn radius(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        libm::fabs(self.x - other.x)
            .max(libm::fabs(self.y - other.y))
            .max(libm::fabs(self.z - other.z))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::default())
    }
}

/// Complementarity coordinates of a state: coherence `c`, predictability `p`,
/// radial deficit `e`, plus the coherence phase `phi`.
///
/// Valid points satisfy `c² + p² + e² = 1` with `c, e ≥ 0`. The Bloch radius
/// `R = √(1 − e²)` is derived rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialityPoint {
    pub c: f64,
    pub p: f64,
    pub e: f64,
    pub phi: f64,
}

impl TrialityPoint {
    pub fn new(c: f64, p: f64, e: f64, phi: f64) -> Self {
        Self { c, p, e, phi }
    }

    /// `c² + p² + e² − 1`.
    pub fn identity_residual(&self) -> f64 {
        self.c * self.c + self.p * self.p + self.e * self.e - 1.0
    }

    pub fn radius(&self) -> f64 {
        libm::sqrt((1.0 - self.e * self.e).max(0.0))
    }

    /// Back to Cartesian Bloch components via `x = C cos φ, y = C sin φ, z = P`.
    pub fn to_bloch(&self) -> BlochVector {
        BlochVector::new(self.c * libm::cos(self.phi), self.c * libm::sin(self.phi), self.p)
    }
}

/// Time derivative of the Bloch vector.
pub fn bloch_rhs(state: &BlochVector, c: &Controls, b: &BathSpec) -> BlochVector {
    let BlochVector { x, y, z } = *state;
    BlochVector::new(
        -c.omega * y - b.gamma2 * x,
        c.omega * x - c.g * z - b.gamma2 * y,
        c.g * y - b.gamma1 * (z - b.z0),
    )
}

/// Analytic steady state.
///
/// With `D = Γ₂ + ω²/Γ₂ + g²/Γ₁`:
/// `x = ω g z₀ / (Γ₂ D)`, `y = −g z₀ / D`, `z = z₀ (Γ₂ + ω²/Γ₂) / D`.
pub fn ness_closed_form(c: &Controls, b: &BathSpec) -> BlochVector {
    let transverse = b.gamma2 + c.omega * c.omega / b.gamma2;
    let d = transverse + c.g * c.g / b.gamma1;
    BlochVector::new(
        c.omega * c.g * b.z0 / (b.gamma2 * d),
        -c.g * b.z0 / d,
        b.z0 * transverse / d,
    )
}

/// Steady state by direct elimination of the stationarity system `M r = −a`,
/// independent of the closed form.
pub fn ness_linear_solve(c: &Controls, b: &BathSpec) -> Result<BlochVector> {
    b.validate()?;
    let (drift, affine) = drift_system(c, b);
    let rhs = [-affine[0], -affine[1], -affine[2]];
    solve3(drift, rhs).map(BlochVector::from_array)
}

/// The affine Bloch equation as `ṙ = M r + a`.
pub fn drift_system(c: &Controls, b: &BathSpec) -> ([[f64; 3]; 3], [f64; 3]) {
    let m = [
        [-b.gamma2, -c.omega, 0.0],
        [c.omega, -b.gamma2, -c.g],
        [0.0, c.g, -b.gamma1],
    ];
    (m, [0.0, 0.0, b.gamma1 * b.z0])
}

/// Largest RK4 step accepted for the given controls and bath.
pub fn stable_step(c: &Controls, b: &BathSpec) -> f64 {
    0.1 / fastest_rate(c, b)
}

pub(crate) fn fastest_rate(c: &Controls, b: &BathSpec) -> f64 {
    libm::fabs(c.omega)
        .max(libm::fabs(c.g))
        .max(b.gamma1)
        .max(b.gamma2)
}

/// Integrate the Bloch equation from `initial` for a time `t_final` with
/// fixed-step RK4. The step is shrunk so an integer number of steps lands on
/// `t_final`.
pub fn relax_to_ness(
    initial: &BlochVector,
    c: &Controls,
    b: &BathSpec,
    t_final: f64,
    dt: f64,
) -> Result<BlochVector> {
    b.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument("t_final must be non-negative"));
    }
    let limit = stable_step(c, b);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit });
    }
    if t_final == 0.0 {
        return Ok(*initial);
    }
    let steps = libm::ceil(t_final / dt) as usize;
    let out = rk4_integrate(
        |_, r: &[f64; 3]| bloch_rhs(&BlochVector::from_array(*r), c, b).to_array(),
        0.0,
        t_final,
        initial.to_array(),
        steps,
    );
    Ok(BlochVector::from_array(out))
}

/// Cylindrical/triality coordinates of a Bloch vector.
///
/// Radii in `(1, 1 + BALL_SLACK]` are clamped to the pure-state surface
/// (`e = 0`). The phase is `atan2(y, x)` in `(−π, π]`, and `0` when the
/// coherence is below [`COHERENCE_FLOOR`].
pub fn to_triality(state: &BlochVector) -> Result<TrialityPoint> {
    let c = libm::hypot(state.x, state.y);
    let p = state.z;
    let r2 = c * c + p * p;
    let r = libm::sqrt(r2);
    if !r.is_finite() || r > 1.0 + OUTSIDE_BALL_TOLERANCE {
        return Err(Error::OutsideBall { radius: r });
    }
    let e = if r2 >= 1.0 { 0.0 } else { libm::sqrt(1.0 - r2) };
    let phi = if c < COHERENCE_FLOOR {
        0.0
    } else {
        libm::atan2(state.y, state.x)
    };
    Ok(TrialityPoint { c, p, e, phi })
}

/// Coherence phase of the pointer-basis steady state.
///
/// Satisfies `tan φ = −Γ₂/ω`; the quadrant follows `sign x = sign(ω g z₀)` and
/// `sign y = −sign(g z₀)`. At `ω = 0` the phase is `−sign(g z₀)·π/2`.
pub fn phase_of_ness(c: &Controls, b: &BathSpec) -> Result<f64> {
    if c.g == 0.0 || b.z0 == 0.0 {
        return Err(Error::DegenerateCoherence);
    }
    if c.omega == 0.0 {
        return Ok(-libm::copysign(FRAC_PI_2, c.g * b.z0));
    }
    let ness = ness_closed_form(c, b);
    Ok(libm::atan2(ness.y, ness.x))
}

/// Thermal state of `H(ω, g)` at inverse temperature `beta`:
/// `r = −tanh(βε/2) (g, 0, ω)/ε`. `beta = ∞` gives the ground state.
pub fn gibbs_state(c: &Controls, beta: f64) -> BlochVector {
    let eps = c.splitting();
    if eps == 0.0 {
        return BlochVector::default();
    }
    let scale = -thermal_polarization(beta, eps) / eps;
    BlochVector::new(scale * c.g, 0.0, scale * c.omega)
}

/// `tanh(βε/2)`, taking `β = ∞` as a pure ground state.
pub(crate) fn thermal_polarization(beta: f64, eps: f64) -> f64 {
    if beta.is_infinite() {
        return if eps > 0.0 { 1.0 } else { 0.0 };
    }
    libm::tanh(0.5 * beta * eps)
}

/// Time derivatives `(Ċ, φ̇, Ṗ)` in cylindrical coordinates:
///
/// ```text
/// Ċ = −Γ₂ C − g P sin φ
/// φ̇ =  ω − (g P / C) cos φ
/// Ṗ =  g C sin φ − Γ₁ (P − z₀)
/// ```
///
/// The `+ω` in φ̇ is what `h × r` with `h = (g, 0, ω)` produces; it is also the
/// sign for which φ̇ = 0 reproduces `tan φ = −Γ₂/ω`. Requires `C > 0`.
pub fn cylindrical_rates(t: &TrialityPoint, c: &Controls, b: &BathSpec) -> (f64, f64, f64) {
    let (s, co) = (libm::sin(t.phi), libm::cos(t.phi));
    let c_dot = -b.gamma2 * t.c - c.g * t.p * s;
    let phi_dot = c.omega - c.g * t.p / t.c * co;
    let p_dot = c.g * t.c * s - b.gamma1 * (t.p - b.z0);
    (c_dot, phi_dot, p_dot)
}

/// `E Ė = Γ₂ C² + Γ₁ P (P − z₀)`: precession leaves the deficit untouched.
pub fn deficit_balance(t: &TrialityPoint, b: &BathSpec) -> f64 {
    b.gamma2 * t.c * t.c + b.gamma1 * t.p * (t.p - b.z0)
}

/// Residual of the steady-state constraint `Γ₂ C² + Γ₁ P (P − z₀) = 0`.
pub fn steady_state_constraint(t: &TrialityPoint, b: &BathSpec) -> f64 {
    deficit_balance(t, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, PI};

    fn unit_bath() -> BathSpec {
        BathSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let b = BathSpec::new(1.0, 1.0, 0.8).unwrap();
        let r = bloch_rhs(&BlochVector::new(0.0, 0.0, 0.8), &Controls::new(1.0, 0.0), &b);
        assert_eq!(r.max_abs(), 0.0);

        let r = bloch_rhs(
            &BlochVector::new(1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0),
            &Controls::new(1.0, 1.0),
            &unit_bath(),
        );
        assert!(r.max_abs() < 1e-15);

        // h×r = (−ωy, ωx − gz, gy) = (−1, 0, 0); damping −Γ₂(0, 1, 0)
        let b = BathSpec::new(0.5, 0.25, 0.0).unwrap();
        let r = bloch_rhs(&BlochVector::new(0.0, 1.0, 0.0), &Controls::new(1.0, 0.0), &b);
        assert_eq!(r, BlochVector::new(-1.0, -0.25, 0.0));
    }

    #[test]
    fn ness_examples() {
        let n = ness_closed_form(&Controls::new(1.0, 1.0), &unit_bath());
        assert!(n.max_abs_diff(&BlochVector::new(1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0)) < 1e-15);

        let b = BathSpec::new(0.7, 0.3, -0.4).unwrap();
        let n = ness_closed_form(&Controls::new(1.7, 0.0), &b);
        assert_eq!(n, BlochVector::new(0.0, 0.0, -0.4));

        let n = ness_closed_form(&Controls::new(0.0, 1.0), &unit_bath());
        assert!(n.max_abs_diff(&BlochVector::new(0.0, -0.5, 0.5)) < 1e-15);
    }

    #[test]
    fn linear_solve_examples() {
        let n = ness_linear_solve(&Controls::new(1.0, 1.0), &unit_bath()).unwrap();
        assert!(n.max_abs_diff(&BlochVector::new(1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0)) < 1e-15);

        let b = BathSpec::new(1.0, 0.5, -0.4).unwrap();
        let n = ness_linear_solve(&Controls::new(2.0, 0.0), &b).unwrap();
        assert!(n.max_abs_diff(&BlochVector::new(0.0, 0.0, -0.4)) < 1e-15);

        let bad = BathSpec { gamma1: 1.0, gamma2: -1.0, z0: 0.0 };
        assert!(matches!(
            ness_linear_solve(&Controls::new(1.0, 1.0), &bad),
            Err(Error::InvalidBath(_)) | Err(Error::SingularDrift)
        ));
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(BathSpec::new(1.0, 0.0, 0.0).is_err());
        assert!(BathSpec::new(1.0, 1.0, 1.0 + 1e-9).is_err());
        assert!(BathSpec::new(1.0, 1.0, f64::NAN).is_err());
        assert!(BathSpec::new(1.0, 1.0, -1.0).is_ok());
    }

    #[test]
    fn relaxation_examples() {
        let c = Controls::new(1.0, 1.0);
        let b = unit_bath();
        let r = relax_to_ness(&BlochVector::default(), &c, &b, 50.0, 0.01).unwrap();
        assert!(r.max_abs_diff(&ness_closed_form(&c, &b)) < 1e-10);

        let start = ness_closed_form(&c, &b);
        let r = relax_to_ness(&start, &c, &b, 7.3, 0.01).unwrap();
        assert!(r.max_abs_diff(&start) < 1e-15);

        let top = BlochVector::new(0.0, 0.0, 1.0);
        let r = relax_to_ness(&top, &Controls::new(1.0, 0.0), &b, 50.0, 0.01).unwrap();
        assert_eq!(r, top);
    }

    #[test]
    fn relaxation_rejects_large_step() {
        let err = relax_to_ness(
            &BlochVector::default(),
            &Controls::new(2.0, 1.0),
            &unit_bath(),
            1.0,
            0.06,
        )
        .unwrap_err();
        assert_eq!(err, Error::StepTooLarge { dt: 0.06, limit: 0.05 });
    }

    #[test]
    fn triality_examples() {
        let t = to_triality(&BlochVector::new(0.0, 0.0, 0.8)).unwrap();
        assert_eq!((t.c, t.p, t.phi), (0.0, 0.8, 0.0));
        assert!((t.e - 0.6).abs() < 1e-15);

        let t = to_triality(&BlochVector::new(1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0)).unwrap();
        assert!((t.c - 2.0_f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((t.p - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.e - (1.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((t.phi + FRAC_PI_4).abs() < 1e-15);

        let t = to_triality(&BlochVector::default()).unwrap();
        assert_eq!((t.c, t.p, t.e, t.phi), (0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn triality_clamps_and_rejects() {
        let t = to_triality(&BlochVector::new(0.0, 0.0, 1.0 + 5e-13)).unwrap();
        assert_eq!(t.e, 0.0);
        let err = to_triality(&BlochVector::new(0.6, 0.0, 0.81)).unwrap_err();
        assert!(matches!(err, Error::OutsideBall { .. }));
        // phase branch reaches +π for negative x on the real axis
        let t = to_triality(&BlochVector::new(-0.5, 0.0, 0.0)).unwrap();
        assert_eq!(t.phi, PI);
    }

    #[test]
    fn phase_examples() {
        let b = unit_bath();
        let phi = phase_of_ness(&Controls::new(1.0, 1.0), &b).unwrap();
        assert!((phi + FRAC_PI_4).abs() < 1e-15);
        assert_eq!(phase_of_ness(&Controls::new(0.0, 1.0), &b).unwrap(), -FRAC_PI_2);
        assert_eq!(
            phase_of_ness(&Controls::new(1.0, 0.0), &b),
            Err(Error::DegenerateCoherence)
        );
        let b0 = BathSpec::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            phase_of_ness(&Controls::new(1.0, 1.0), &b0),
            Err(Error::DegenerateCoherence)
        );
        // ω = 0 branch follows the sign of g z₀
        let neg = BathSpec::new(1.0, 1.0, -0.5).unwrap();
        assert_eq!(phase_of_ness(&Controls::new(0.0, 1.0), &neg).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn gibbs_examples() {
        assert_eq!(
            gibbs_state(&Controls::new(1.0, 0.0), f64::INFINITY),
            BlochVector::new(0.0, 0.0, -1.0)
        );
        assert_eq!(gibbs_state(&Controls::new(0.0, 1.0), 0.0).max_abs(), 0.0);
        assert_eq!(gibbs_state(&Controls::new(0.0, 0.0), 3.0), BlochVector::default());
    }

    #[test]
    fn cylindrical_chart_round_trip() {
        let t = TrialityPoint::new(0.3, -0.4, 0.0, 2.0);
        let back = to_triality(&t.to_bloch()).unwrap();
        assert!((back.c - 0.3).abs() < 1e-15 && (back.phi - 2.0).abs() < 1e-15);
    }
}
