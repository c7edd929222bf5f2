//! Geometric thermodynamics of a driven dissipative qubit.
//!
//! The qubit evolves under `H(ω, g) = ½(ω σ_z + g σ_x)` with relaxation and
//! dephasing fixed in the σ_z pointer basis. Its unique steady state defines a
//! work connection `A_i = Tr[ρ_ss ∂_i H]` on the `(ω, g)` control plane. This
//! crate computes:
//!
//! - steady states and their coherence/predictability/deficit coordinates
//!   ([`bloch`]),
//! - the connection, its curvature by three independent routes, the thermal
//!   (Gibbs) reference and the weak-mismatch coefficient ([`geometry`]),
//! - cyclic work around control loops, curvature flux, and the slow-driving
//!   limit of the time-dependent dynamics ([`transport`]),
//! - curvature fields painted on the `C² + P² + E² = 1` quarter-sphere
//!   ([`atlas`]).
//!
//! The crate is `no_std` and only needs `alloc`. Transcendental functions come
//! from `libm`, so results are bit-identical with and without `std`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod atlas;
pub mod bloch;
mod error;
pub mod field;
pub mod geometry;
mod linalg;
pub mod ode;
pub mod quadrature;
pub mod transport;

pub use error::{Error, Result};

pub use bloch::{BathSpec, BlochVector, Controls, TrialityPoint};
pub use field::{Axis, ScalarField2D};
pub use geometry::{ConnectionValue, CurvatureMethod, CurvatureSample};
