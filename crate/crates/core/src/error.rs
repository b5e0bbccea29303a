use num_complex::Complex64;
use thiserror::Error;

use crate::field::MomentumPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `t` lies within the exclusion radius of a sech²/tanh pole.
    #[error("evaluation at t = {t} is too close to the field pole at {pole}")]
    FieldPole { t: Complex64, pole: Complex64 },

    #[error("field does not vanish at the window edge t = {t}: |E| = {field:e} exceeds cutoff {cutoff:e}")]
    AsymptoticVacuum { t: f64, field: f64, cutoff: f64 },

    /// The bosonic relation f = |R|²/(1-|R|²) breaks down once |R| reaches 1.
    #[error("supercritical regime: |R| = {abs_r} reached at t = {t}")]
    Supercritical { t: f64, abs_r: f64 },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("no turning points found in the search region")]
    NoTurningPoints,

    #[error("branch ambiguity: arctanh/sqrt argument {arg} lies on a branch cut")]
    BranchCut { arg: Complex64 },

    #[error("expected {expected} dominant turning points, found {found}")]
    TurningPointCount { expected: usize, found: usize },

    #[error("contour branch tracking failed near t = {t}")]
    BranchTracking { t: Complex64 },

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("quadrature domain too small: boundary f = {boundary:e} exceeds {eps_tail:e} x peak f = {peak:e}")]
    DomainTooSmall {
        boundary: f64,
        peak: f64,
        eps_tail: f64,
    },

    #[error("insufficient oscillation: found {found} local maxima in window, need at least 3")]
    InsufficientOscillation { found: usize },

    #[error("at k = ({}, {}): {source}", .k.k_parallel, .k.k_perp)]
    AtMomentum {
        k: MomentumPoint,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors that come from the physics of the requested computation rather
    /// than from malformed input.
    pub fn is_physics_domain(&self) -> bool {
        match self {
            Error::FieldPole { .. }
            | Error::AsymptoticVacuum { .. }
            | Error::Supercritical { .. }
            | Error::StepUnderflow { .. }
            | Error::TooManySteps { .. }
            | Error::NoTurningPoints
            | Error::TurningPointCount { .. }
            | Error::BranchCut { .. }
            | Error::BranchTracking { .. }
            | Error::Quadrature { .. }
            | Error::DomainTooSmall { .. }
            | Error::InsufficientOscillation { .. } => true,
            Error::AtMomentum { source, .. } => source.is_physics_domain(),
            _ => false,
        }
    }

    pub(crate) fn at(self, k: MomentumPoint) -> Error {
        match self {
            e @ Error::AtMomentum { .. } => e,
            e => Error::AtMomentum {
                k,
                source: Box::new(e),
            },
        }
    }
}
