//! Closed-form baselines and the near-parallel edge fit.
//!
//! * proximity force approximation (PFA) for the parabolic cylinder,
//! * edge PFA for the rim of a thin disk, built from the knife-edge constant,
//! * the parallel-plate energy,
//! * a weighted straight-line fit of `c(theta)` near `theta = pi/2`, whose
//!   slope is the edge coefficient and whose intercept should be `pi^2/1440`.
//!
//! The PFA value for a parabolic cylinder also holds for a circular cylinder
//! of the same tip radius, since only the curvature at the tip enters.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::quad;
use crate::{Error, Result};

/// PFA energy per unit length, `E/(hbar c L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaEnergy {
    pub value: f64,
    /// Set at zero radius, where the PFA vanishes and gives no estimate.
    pub vanishes: bool,
}

/// `-pi^3 / (960 sqrt 2) sqrt(R / H^5)`.
pub fn pfa_energy(separation: f64, radius: f64) -> Result<PfaEnergy> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::domain(format!(
            "separation must be > 0, got {separation}"
        )));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius must be >= 0, got {radius}")));
    }
    if radius == 0.0 {
        return Ok(PfaEnergy {
            value: 0.0,
            vanishes: true,
        });
    }
    let value = -PI.powi(3) / (960.0 * 2f64.sqrt()) * (radius / separation.powi(5)).sqrt();
    Ok(PfaEnergy {
        value,
        vanishes: false,
    })
}

/// Parallel plates, `E/(hbar c A) = -pi^2 / (720 H^3)`.
pub fn parallel_plates(separation: f64) -> Result<f64> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::domain(format!(
            "separation must be > 0, got {separation}"
        )));
    }
    Ok(-PI * PI / (720.0 * separation.powi(3)))
}

/// Edge PFA for a disk of radius `r` whose rim sits at distance `H` from
/// the plane.
///
/// Returns `(exact, asymptote)` where `exact = -C int_{-r}^{r}
/// (H + r - sqrt(r^2 - x^2))^-2 dx` and `asymptote = -C pi sqrt(r/(2 H^3))`,
/// both in units of `hbar c`. The integral is taken in `x = r sin(phi)`,
/// which removes the endpoint square roots.
pub fn edge_pfa_disk(separation: f64, disk_radius: f64, c_perp: f64) -> Result<(f64, f64)> {
    if !(separation > 0.0 && separation.is_finite() && disk_radius > 0.0 && disk_radius.is_finite())
    {
        return Err(Error::domain(format!(
            "need H > 0 and r > 0, got H = {separation}, r = {disk_radius}"
        )));
    }
    let (h, r) = (separation, disk_radius);
    // gap(phi) = H + r (1 - cos phi) = H + 2 r sin^2(phi/2)
    let integrand = |phi: f64| {
        let gap = h + 2.0 * r * (0.5 * phi).sin().powi(2);
        r * phi.cos() / (gap * gap)
    };
    // geometric breakpoints resolve the peak of width sqrt(H/r) at phi = 0
    let mut breaks = vec![0.0];
    let mut edge = (h / r).sqrt().min(FRAC_PI_2);
    while edge < FRAC_PI_2 {
        breaks.push(edge);
        edge *= 4.0;
    }
    breaks.push(FRAC_PI_2);
    let mut half = 0.0;
    for pair in breaks.windows(2) {
        half += quad::adaptive(integrand, pair[0], pair[1], 0.0, 1e-13)?.value;
    }
    let exact = -c_perp * 2.0 * half;
    let asymptote = -c_perp * PI * (r / (2.0 * h.powi(3))).sqrt();
    Ok((exact, asymptote))
}

/// Default fit window near the parallel endpoint, radians.
pub const DEFAULT_EDGE_WINDOW: (f64, f64) = (80.0 * PI / 180.0, 88.0 * PI / 180.0);

/// Straight line `c(theta) = c_parallel_half + (theta - pi/2) c_edge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFit {
    /// Fitted intercept at `theta = pi/2`; the exact value is `pi^2/1440`.
    pub c_parallel_half: f64,
    /// Fitted slope.
    pub c_edge: f64,
    /// Standard error of the slope from the sample errors.
    pub c_edge_error: f64,
    /// Smallest and largest tilt used, radians.
    pub fit_window: (f64, f64),
    /// Largest absolute deviation of a sample from the line.
    pub residual: f64,
}

/// One `c(theta)` value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSample {
    pub theta: f64,
    pub value: f64,
    pub error: f64,
}

impl From<(f64, f64)> for EdgeSample {
    fn from((theta, value): (f64, f64)) -> Self {
        EdgeSample {
            theta,
            value,
            error: 0.0,
        }
    }
}

/// Weighted least-squares line through `c(theta)` samples.
///
/// Weights are `1/error^2`; errors below `1e-12` are floored so that exact
/// samples get equal, finite weights.
pub fn edge_coefficient_fit(samples: &[EdgeSample]) -> Result<EdgeFit> {
    if samples.len() < 4 {
        return Err(Error::domain(format!(
            "edge fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples
        .iter()
        .find(|s| !(s.theta > 0.0 && s.theta <= FRAC_PI_2 && s.value.is_finite()))
    {
        return Err(Error::domain(format!(
            "edge sample outside (0, pi/2]: {bad:?}"
        )));
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let w = s.error.max(1e-12).powi(-2);
        let x = s.theta - FRAC_PI_2;
        sw += w;
        sx += w * x;
        sy += w * s.value;
        sxx += w * x * x;
        sxy += w * x * s.value;
    }
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::domain(
            "edge samples need at least two distinct tilts",
        ));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let residual = samples
        .iter()
        .map(|s| (s.value - intercept - slope * (s.theta - FRAC_PI_2)).abs())
        .fold(0.0, f64::max);
    let lo = samples
        .iter()
        .map(|s| s.theta)
        .fold(f64::INFINITY, f64::min);
    let hi = samples
        .iter()
        .map(|s| s.theta)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EdgeFit {
        c_parallel_half: intercept,
        c_edge: slope,
        c_edge_error: (sw / det).sqrt(),
        fit_window: (lo, hi),
        residual,
    })
}

/// Fits restricted to each window `(theta_min, theta_max)`; windows with
/// fewer than four samples are skipped.
pub fn window_sensitivity(samples: &[EdgeSample], windows: &[(f64, f64)]) -> Vec<EdgeFit> {
    windows
        .iter()
        .filter_map(|&(lo, hi)| {
            let inside: Vec<EdgeSample> = samples
                .iter()
                .copied()
                .filter(|s| s.theta >= lo - 1e-12 && s.theta <= hi + 1e-12)
                .collect();
            edge_coefficient_fit(&inside).ok()
        })
        .collect()
}
