//! Numerics for the growth of meromorphic and δ-subharmonic functions on
//! centred disks.
//!
//! * [`potentials`]: finite-atom models, circle maxima and circle means.
//! * [`characteristics`]: counting functions and the Nevanlinna-type
//!   characteristics built from them.
//! * [`integrators`]: increasing integrators, their modulus of continuity
//!   and Lebesgue–Stieltjes integrals against them.
//! * [`bounds`]: the verification harness for the integral estimates of
//!   circle maxima.
//! * [`io`]: JSON and TOML documents for models and integrators.

// `!(x > 0.0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quadrature;
pub mod potentials;
pub mod characteristics;
pub mod integrators;
pub mod bounds;
pub mod io;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use characteristics::{ChargeView, ClassicalCharacteristic};
pub use integrators::{CantorPart, Integrator, Jump, ModulusProfile, Piece};
pub use potentials::{
    from_rational, DeltaSubharmonicModel, Factor, HarmonicPart, MaxOptions, RadialWindow, Rational, RieszAtom,
};
