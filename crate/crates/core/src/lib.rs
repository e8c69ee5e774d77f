//! Exact electromagnetic Casimir interaction between a perfectly conducting
//! parabolic cylinder and a perfectly conducting plane.
//!
//! The energy per unit length is evaluated as a spectral integral of
//! `log det(1 - N(q))`, where the round-trip operator `N` combines the exact
//! scattering amplitudes of the parabolic cylinder with plane-to-parabola
//! translation elements. The crate is organised bottom-up:
//!
//! * [`specfun`]: parabolic cylinder functions and the Bateman k-function,
//!   all in a signed-logarithm representation.
//! * [`scattering`]: Dirichlet/Neumann amplitudes of the cylinder and the plane.
//! * [`translation`]: plane/parabola translation elements, closed form at zero
//!   tilt and by quadrature otherwise.
//! * [`roundtrip`]: the symmetrised truncated kernel and its log-determinant.
//! * [`energy`]: spectral integration, truncation extrapolation and
//!   Matsubara sums.
//! * [`approx`]: proximity-force baselines and the edge-coefficient fit.
//! * [`cli`]: configuration and table output for the command-line driver.
//!
//! Units: `hbar = c = 1`; energies per unit length are reported in units of
//! `hbar c / length^2`.

// Negated comparisons are used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod energy;
mod error;
pub mod quad;
pub mod roundtrip;
pub mod scattering;
pub mod specfun;
pub mod translation;

pub use error::{Error, Result};
pub use roundtrip::{Channel, TruncatedKernel};
pub use scattering::{BoundaryMode, Geometry};
pub use specfun::SignedLog;
