use thiserror::Error;

/// Failures raised by the core computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid bath parameters: {0}")]
    InvalidBath(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("drift matrix is numerically singular")]
    SingularDrift,
    #[error("time step {dt} exceeds the stability bound {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("state lies outside the Bloch ball (r = {radius})")]
    OutsideBall { radius: f64 },
    #[error("coherence vanishes, phase undefined (requires g != 0 and z0 != 0)")]
    DegenerateCoherence,
    #[error("predictability is zero, phase-resolved curvature has a pole")]
    PredictabilityPole,
    #[error("target polarization z0 is zero")]
    ZeroPolarization,
    #[error("path is not closed")]
    OpenPath,
    #[error("curvature flux is only defined for rectangle and ellipse regions")]
    UnsupportedRegion,
    #[error("not supported: {0}")]
    NotSupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
