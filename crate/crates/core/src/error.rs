use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atoms of opposite sign share the location {location}; reduce the model first")]
    CoincidentOppositeAtoms { location: Complex64 },

    #[error("an atom lies on the circle of radius {radius}")]
    AtomOnCircle { radius: f64 },

    #[error("a pole lies on the circle of radius {radius}")]
    PoleOnCircle { radius: f64 },

    #[error("quadrature budget exhausted: estimate {estimate} with error {error} exceeds tolerance {tolerance}")]
    ToleranceNotReached {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("the point {location} is both a zero and a pole")]
    SharedZeroPole { location: Complex64 },

    #[error("charge view contains a negative mass {mass} at radius {radius}")]
    NegativeMassInView { radius: f64, mass: f64 },

    #[error("model is not subharmonic: atom at {location} has mass {mass}")]
    NotSubharmonic { location: Complex64, mass: f64 },

    #[error("invalid radius {0}")]
    InvalidRadius(f64),

    #[error("invalid radial window: inner {inner}, outer {outer}")]
    InvalidWindow { inner: f64, outer: f64 },

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("invalid integrator: {0}")]
    InvalidIntegrator(String),

    #[error("invalid rational function: {0}")]
    InvalidRational(String),

    #[error("stabilization diameter is zero")]
    DegenerateDm,

    #[error("integrand is singular at the jump located at {location}")]
    SingularAtJump { location: f64 },

    #[error("parse error in {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
