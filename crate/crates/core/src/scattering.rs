//! Scattering amplitudes of the parabolic cylinder and of the plane.
//!
//! The cylinder is the surface `mu = mu0 = sqrt(R)` in parabolic cylinder
//! coordinates `x = mu lambda`, `y = (lambda^2 - mu^2)/2`. Its amplitudes for
//! the two scalar polarisations are
//!
//! ```text
//! Dirichlet: F_n = -i^n D_n(i m) / D_(-n-1)(m)
//! Neumann:   F_n = -i^(n+1) D_n'(i m) / D_(-n-1)'(m)
//! ```
//!
//! with `m = mu0 sqrt(2q)`. Both are real. At `m = 0` the channel whose
//! parity matches `n` (even for Dirichlet, odd for Neumann) reduces to
//! `-n! sqrt(2/pi)`; the other one vanishes.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::specfun::{outgoing_table, regular_imag_table, SignedLog};
use crate::{Error, Result};

/// Scalar polarisation of the electromagnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryMode {
    Dirichlet,
    Neumann,
}

impl BoundaryMode {
    pub const BOTH: [BoundaryMode; 2] = [BoundaryMode::Dirichlet, BoundaryMode::Neumann];
}

/// Parabolic cylinder above a plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Radius of curvature at the tip.
    pub radius: f64,
    /// Distance from the tip to the plane.
    pub separation: f64,
    /// Tilt of the symmetry axis away from the plane normal, radians.
    pub theta: f64,
}

impl Geometry {
    pub fn new(radius: f64, separation: f64, theta: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "radius must be finite and >= 0, got {radius}"
            )));
        }
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::domain(format!(
                "separation must be finite and > 0, got {separation}"
            )));
        }
        if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!(
                "tilt must lie in (-pi/2, pi/2), got {theta}"
            )));
        }
        Ok(Geometry {
            radius,
            separation,
            theta,
        })
    }

    /// Zero-thickness half-plane perpendicular to the plane.
    pub fn knife_edge(separation: f64, theta: f64) -> Result<Self> {
        Self::new(0.0, separation, theta)
    }

    /// Distance from the focus to the plane, `H + R/2`.
    pub fn focus_distance(&self) -> f64 {
        self.separation + 0.5 * self.radius
    }

    /// Surface coordinate `mu0 = sqrt(R)`.
    pub fn mu0(&self) -> f64 {
        self.radius.sqrt()
    }

    /// `mu0 sqrt(2q)` at wavenumber `q`.
    pub fn mu0_scaled(&self, q: f64) -> f64 {
        (2.0 * q * self.radius).sqrt()
    }

    pub fn is_knife_edge(&self) -> bool {
        self.radius == 0.0
    }
}

/// Reflection amplitude of the perfectly conducting plane.
pub fn plane_amplitude(mode: BoundaryMode) -> f64 {
    match mode {
        BoundaryMode::Dirichlet => -1.0,
        BoundaryMode::Neumann => 1.0,
    }
}

/// The polarisation that couples to order `n` at zero radius.
pub fn knife_edge_channel(n: usize) -> BoundaryMode {
    if n.is_multiple_of(2) {
        BoundaryMode::Dirichlet
    } else {
        BoundaryMode::Neumann
    }
}

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

fn half_ln_two_over_pi() -> f64 {
    0.5 * FRAC_2_PI.ln()
}

/// `F_n` for `n = 0..=n_max`.
pub fn amplitude_table(
    n_max: usize,
    mode: BoundaryMode,
    mu0_scaled: f64,
) -> Result<Vec<SignedLog>> {
    if !(mu0_scaled >= 0.0 && mu0_scaled.is_finite()) {
        return Err(Error::domain(format!(
            "scaled surface coordinate must be >= 0, got {mu0_scaled}"
        )));
    }
    if mu0_scaled == 0.0 {
        return Ok((0..=n_max)
            .map(|n| {
                if knife_edge_channel(n) == mode {
                    SignedLog::new(-1, ln_factorial(n) + half_ln_two_over_pi())
                } else {
                    SignedLog::ZERO
                }
            })
            .collect());
    }
    let regular = regular_imag_table(n_max, mu0_scaled)?;
    let outgoing = outgoing_table(n_max, mu0_scaled)?;
    (0..=n_max)
        .map(|n| {
            let (num, den) = match mode {
                BoundaryMode::Dirichlet => (regular.values[n], outgoing.values[n]),
                BoundaryMode::Neumann => (regular.derivatives[n], outgoing.derivatives[n]),
            };
            if den.is_zero() || !den.logmag().is_finite() {
                return Err(Error::SingularDenominator {
                    context: "cylinder amplitude",
                    n,
                    argument: mu0_scaled,
                });
            }
            Ok(-(num / den))
        })
        .collect()
}

/// Amplitude `F_n` of the cylinder for one order.
pub fn parabolic_amplitude(n: i64, mode: BoundaryMode, mu0_scaled: f64) -> Result<SignedLog> {
    let n =
        usize::try_from(n).map_err(|_| Error::domain(format!("order must be >= 0, got {n}")))?;
    Ok(amplitude_table(n, mode, mu0_scaled)?[n])
}

/// `ln g_n` with `g_n = |F_n| / (n! sqrt(2/pi))`; `-inf` marks an order
/// that does not couple.
///
/// `g_n` is 1 or 0 at the knife edge and grows with the radius; it is the
/// only piece of the amplitude that survives into the symmetric kernel.
pub fn reduced_log_amplitudes(
    n_max: usize,
    mode: BoundaryMode,
    mu0_scaled: f64,
) -> Result<Vec<f64>> {
    Ok(amplitude_table(n_max, mode, mu0_scaled)?
        .into_iter()
        .enumerate()
        .map(|(n, f)| f.logmag() - ln_factorial(n) - half_ln_two_over_pi())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knife(n: usize) -> f64 {
        -(ln_factorial(n) + half_ln_two_over_pi()).exp()
    }

    #[test]
    fn plane_signs() {
        assert_eq!(plane_amplitude(BoundaryMode::Neumann), 1.0);
        assert_eq!(plane_amplitude(BoundaryMode::Dirichlet), -1.0);
    }

    #[test]
    fn amplitude_examples() {
        let f0 = parabolic_amplitude(0, BoundaryMode::Dirichlet, 0.0)
            .unwrap()
            .to_f64();
        assert!((f0 + 0.797_884_560_802_865_4).abs() < 1e-15);
        let f1 = parabolic_amplitude(1, BoundaryMode::Neumann, 0.0)
            .unwrap()
            .to_f64();
        assert!((f1 + 0.797_884_560_802_865_4).abs() < 1e-15);
        let f5 = parabolic_amplitude(5, BoundaryMode::Neumann, 0.0)
            .unwrap()
            .to_f64();
        assert!((f5 + 95.746_147_296_343_85).abs() < 1e-10);
        assert!(parabolic_amplitude(5, BoundaryMode::Dirichlet, 0.0)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn generic_path_reproduces_the_knife_edge_limit() {
        // The closed form at zero must agree with the ratio of special
        // functions evaluated at zero argument.
        for mode in BoundaryMode::BOTH {
            let regular = regular_imag_table(60, 0.0).unwrap();
            let outgoing = outgoing_table(60, 0.0).unwrap();
            for n in 0..=60 {
                let ratio = match mode {
                    BoundaryMode::Dirichlet => -(regular.values[n] / outgoing.values[n]),
                    BoundaryMode::Neumann => -(regular.derivatives[n] / outgoing.derivatives[n]),
                };
                if knife_edge_channel(n) == mode {
                    let expected = SignedLog::from_f64(knife(0)).scale_log(ln_factorial(n));
                    assert!(ratio.rel_diff(expected) < 1e-10, "{mode:?} n = {n}");
                } else {
                    assert!(ratio.is_zero(), "{mode:?} n = {n}");
                }
            }
        }
    }

    #[test]
    fn continuity_at_the_knife_edge() {
        for mode in BoundaryMode::BOTH {
            let at_zero = amplitude_table(60, mode, 0.0).unwrap();
            let near = amplitude_table(60, mode, 1e-8).unwrap();
            for n in (0..=60).filter(|&n| knife_edge_channel(n) == mode) {
                assert!(near[n].rel_diff(at_zero[n]) < 1e-6, "{mode:?} n = {n}");
            }
        }
    }

    #[test]
    fn combined_sign_alternates() {
        for mode in BoundaryMode::BOTH {
            for x in [0.3, 2.0, 9.0] {
                let table = amplitude_table(30, mode, x).unwrap();
                for (n, f) in table.iter().enumerate() {
                    let sign = f64::from(f.sign()) * plane_amplitude(mode);
                    assert_eq!(
                        sign,
                        if n % 2 == 0 { 1.0 } else { -1.0 },
                        "{mode:?} x = {x} n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_amplitudes_at_zero_radius() {
        let g = reduced_log_amplitudes(10, BoundaryMode::Dirichlet, 0.0).unwrap();
        for (n, v) in g.iter().enumerate() {
            if n % 2 == 0 {
                assert!(v.abs() < 1e-12);
            } else {
                assert_eq!(*v, f64::NEG_INFINITY);
            }
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(1.0, 0.0, 0.0).is_err());
        assert!(Geometry::new(-1.0, 1.0, 0.0).is_err());
        assert!(Geometry::new(1.0, 1.0, 1.6).is_err());
        let g = Geometry::new(2.0, 1.0, 0.0).unwrap();
        assert_eq!(g.focus_distance() - g.radius / 2.0, g.separation);
        assert_eq!(g.mu0(), 2f64.sqrt());
    }
}
