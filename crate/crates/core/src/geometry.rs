//! The work connection on the `(ω, g)` plane and its curvature.
//!
//! For `H = ½(ω σ_z + g σ_x)` the connection `A_i = Tr[ρ_ss ∂_i H]` has
//! components `A_ω = z/2` and `A_g = x/2`. Its curvature
//! `F_ωg = ∂_ω A_g − ∂_g A_ω` is available three ways:
//!
//! - [`curvature_fd`]: Richardson-extrapolated central differences of the
//!   connection,
//! - [`curvature_closed_form`]: analytic mixed partials of the steady state,
//! - [`curvature_phase_resolved`]: the triality/phase representation, valid on
//!   the steady-state submanifold.
//!
//! When the dissipator follows the instantaneous eigenbasis the steady state is
//! thermal, the connection is the gradient of the free energy, and the
//! curvature vanishes ([`connection_gibbs`], [`free_energy_gibbs`]).

use crate::bloch::{gibbs_state, ness_closed_form, to_triality, BathSpec, Controls, TrialityPoint};
use crate::error::{Error, Result};

/// Default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// `|P|` below this is a pole of the phase-resolved curvature.
pub const PREDICTABILITY_POLE: f64 = 1e-12;

/// Components `(A_ω, A_g)` of the work connection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConnectionValue {
    pub a_omega: f64,
    pub a_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureMethod {
    FiniteDifference,
    ClosedForm,
    PhaseResolved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub f_omega_g: f64,
    pub location: Controls,
    pub method: CurvatureMethod,
}

/// Connection of the pointer-basis steady state: `(P/2, x/2)`.
pub fn connection_pointer(c: &Controls, b: &BathSpec) -> ConnectionValue {
    let ness = ness_closed_form(c, b);
    ConnectionValue {
        a_omega: 0.5 * ness.z,
        a_g: 0.5 * ness.x,
    }
}

/// Connection of the thermal state, `−tanh(βε/2)/(2ε) · (ω, g)`.
pub fn connection_gibbs(c: &Controls, beta: f64) -> ConnectionValue {
    let r = gibbs_state(c, beta);
    ConnectionValue {
        a_omega: 0.5 * r.z,
        a_g: 0.5 * r.x,
    }
}

/// Free energy `−β⁻¹ ln(2 cosh(βε/2))` of `H(ω, g)`.
///
/// Written as `−ε/2 − β⁻¹ ln(1 + e^{−βε})` so large `βε` does not overflow;
/// `β = ∞` returns the ground-state energy.
pub fn free_energy_gibbs(c: &Controls, beta: f64) -> f64 {
    let eps = c.splitting();
    if beta.is_infinite() {
        return -0.5 * eps;
    }
    -0.5 * eps - libm::log1p(libm::exp(-beta * eps)) / beta
}

/// `∂_ω A_g − ∂_g A_ω` of an arbitrary connection by central differences with
/// absolute step `h`, Richardson-combined with step `h/2`.
pub fn curvature_fd_of<F>(connection: F, c: &Controls, h: f64) -> f64
where
    F: Fn(&Controls) -> ConnectionValue,
{
    let central = |h: f64| {
        let d_omega_ag = (connection(&Controls::new(c.omega + h, c.g)).a_g
            - connection(&Controls::new(c.omega - h, c.g)).a_g)
            / (2.0 * h);
        let d_g_aomega = (connection(&Controls::new(c.omega, c.g + h)).a_omega
            - connection(&Controls::new(c.omega, c.g - h)).a_omega)
            / (2.0 * h);
        d_omega_ag - d_g_aomega
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// Finite-difference curvature of the pointer-basis connection. The absolute
/// step is `step · max(|ω|, |g|, Γ₂)`.
pub fn curvature_fd(c: &Controls, b: &BathSpec, step: f64) -> CurvatureSample {
    let h = step * libm::fabs(c.omega).max(libm::fabs(c.g)).max(b.gamma2);
    CurvatureSample {
        f_omega_g: curvature_fd_of(|p| connection_pointer(p, b), c, h),
        location: *c,
        method: CurvatureMethod::FiniteDifference,
    }
}

/// Finite-difference curvature of the thermal connection (zero up to
/// truncation and rounding).
pub fn curvature_fd_gibbs(c: &Controls, beta: f64, step: f64) -> f64 {
    let scale = libm::fabs(c.omega).max(libm::fabs(c.g));
    let h = step * if scale > 0.0 { scale } else { 1.0 };
    curvature_fd_of(|p| connection_gibbs(p, beta), c, h)
}

/// Analytic curvature. With `D = Γ₂ + ω²/Γ₂ + g²/Γ₁` and `u = ω²/Γ₂²`:
///
/// ```text
/// F = g z₀ / (2 D²) · [1 − u + g²/(Γ₁Γ₂) + 2Γ₂(1 + u)/Γ₁]
/// ```
pub fn curvature_closed_form(c: &Controls, b: &BathSpec) -> CurvatureSample {
    let (g1, g2) = (b.gamma1, b.gamma2);
    let d = g2 + c.omega * c.omega / g2 + c.g * c.g / g1;
    let u = (c.omega / g2) * (c.omega / g2);
    let bracket = 1.0 - u + c.g * c.g / (g1 * g2) + 2.0 * g2 * (1.0 + u) / g1;
    CurvatureSample {
        f_omega_g: c.g * b.z0 / (2.0 * d * d) * bracket,
        location: *c,
        method: CurvatureMethod::ClosedForm,
    }
}

/// The two equivalent brackets of the phase-resolved curvature:
/// `Γ₂C² + 2Γ₂P² − Γ₁P² cos 2φ` and, after `C² = 1 − P² − E²`,
/// `Γ₂(1 − E² + P²) − Γ₁P² cos 2φ`.
pub fn phase_resolved_brackets(t: &TrialityPoint, b: &BathSpec) -> (f64, f64) {
    let p2 = t.p * t.p;
    let dephasing = b.gamma1 * p2 * libm::cos(2.0 * t.phi);
    let cpe = b.gamma2 * t.c * t.c + 2.0 * b.gamma2 * p2 - dephasing;
    let triality = b.gamma2 * (1.0 - t.e * t.e + p2) - dephasing;
    (cpe, triality)
}

/// `P · F_ωg = −C sin φ / (2Γ₁Γ₂z₀) · [bracket]`, evaluated without dividing
/// by `P` so it stays finite through `P = 0`.
pub fn regularized_curvature(t: &TrialityPoint, b: &BathSpec) -> Result<f64> {
    if b.z0 == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    let (bracket, _) = phase_resolved_brackets(t, b);
    Ok(-t.c * libm::sin(t.phi) / (2.0 * b.gamma1 * b.gamma2 * b.z0) * bracket)
}

/// Curvature in triality/phase variables,
/// `F_ωg = −C sin φ / (2PΓ₁Γ₂z₀) · [Γ₂C² + 2Γ₂P² − Γ₁P² cos 2φ]`.
///
/// On the steady-state submanifold this equals [`curvature_closed_form`];
/// elsewhere it is only the formula.
pub fn curvature_phase_resolved(t: &TrialityPoint, b: &BathSpec) -> Result<f64> {
    if b.z0 == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    if libm::fabs(t.p) < PREDICTABILITY_POLE {
        return Err(Error::PredictabilityPole);
    }
    Ok(regularized_curvature(t, b)? / t.p)
}

/// Phase-resolved curvature at the steady state of `c`, the third route to
/// the curvature alongside the finite-difference and closed-form ones.
pub fn curvature_phase_resolved_on_ness(c: &Controls, b: &BathSpec) -> Result<CurvatureSample> {
    let t = to_triality(&ness_closed_form(c, b))?;
    Ok(CurvatureSample {
        f_omega_g: curvature_phase_resolved(&t, b)?,
        location: *c,
        method: CurvatureMethod::PhaseResolved,
    })
}

/// `Γ₂C² + (2Γ₂ − Γ₁)P²`, the bracket controlling the sign of the curvature
/// near the aligned limit.
pub fn weak_mismatch_bracket(c: f64, p: f64, b: &BathSpec) -> f64 {
    b.gamma2 * c * c + (2.0 * b.gamma2 - b.gamma1) * p * p
}

/// `∂F/∂φ` at `φ = 0` for fixed `(C, P)`:
/// `−C / (2PΓ₁Γ₂z₀) · [Γ₂C² + (2Γ₂ − Γ₁)P²]`.
pub fn weak_mismatch_coefficient(c: f64, p: f64, b: &BathSpec) -> Result<f64> {
    if b.z0 == 0.0 {
        return Err(Error::ZeroPolarization);
    }
    if libm::fabs(p) < PREDICTABILITY_POLE {
        return Err(Error::PredictabilityPole);
    }
    Ok(-c / (2.0 * p * b.gamma1 * b.gamma2 * b.z0) * weak_mismatch_bracket(c, p, b))
}

/// `P²/C²` at which the weak-mismatch bracket changes sign, present only when
/// `Γ₁ > 2Γ₂`.
pub fn sign_change_ratio(b: &BathSpec) -> Option<f64> {
    let excess = b.gamma1 - 2.0 * b.gamma2;
    (excess > 0.0).then(|| b.gamma2 / excess)
}

/// Control-space gradient of `F_th` by central differences (used to check
/// `A = ∇F_th`).
pub fn free_energy_gradient_fd(c: &Controls, beta: f64, h: f64) -> ConnectionValue {
    let f = |w: f64, g: f64| free_energy_gibbs(&Controls::new(w, g), beta);
    ConnectionValue {
        a_omega: (f(c.omega + h, c.g) - f(c.omega - h, c.g)) / (2.0 * h),
        a_g: (f(c.omega, c.g + h) - f(c.omega, c.g - h)) / (2.0 * h),
    }
}
