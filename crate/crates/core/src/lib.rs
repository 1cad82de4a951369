//! Self-adjoint extensions of the `l = 1` radial Laplacian `T = -d²/dr² + 2/r²`
//! and of its inverse square, in the scalar product
//! `⟨u, v⟩ = ∫ (ū'v' + 2ūv/r²) dr`.
//!
//! Functions are kept in closed form as sums of `c · r^p · e^{σr}` so that the
//! covariant derivatives, Taylor data at the origin and half-line integrals are
//! exact. Quadrature is used where closed forms are unavailable and as an
//! independent route for cross-checks.

pub mod error;
pub mod integrate;
pub mod inverse;
pub mod quadrature;
pub mod radial;
pub mod registry;
pub mod special;
pub mod spectral;
pub mod tkappa;
pub mod transverse;
pub mod varkappa;
pub mod verify;

pub use error::{Error, Result};
pub use radial::{RadialFunction, Term, C64};
