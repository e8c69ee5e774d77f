//! Oracle and identity checks behind the `validate` command.
//!
//! Each check compares two independent routes to the same quantity and
//! reports the worst discrepancy against its tolerance.

use std::f64::consts::FRAC_2_PI;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;

use crate::energy::{energy_per_length, QuadratureSpec};
use crate::roundtrip::{build_kernel, logdet_ladder, logdet_one_minus, Channel};
use crate::scattering::{knife_edge_channel, BoundaryMode, Geometry};
use crate::specfun::{fixtures, outgoing_table, regular_imag_table};
use crate::translation::testing::{green_free, green_parabolic, ParabolicPoint};
use crate::translation::{theta0_element, tilted_element};
use crate::Result;

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst discrepancy found; NaN when the check could not run.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Check {
        Check {
            name,
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }

    fn from_result(name: &'static str, tolerance: f64, result: Result<Check>) -> Check {
        result.unwrap_or_else(|e| Check {
            name,
            passed: false,
            measured: f64::NAN,
            tolerance,
            detail: format!("{}: {e}", e.kind()),
        })
    }
}

/// Special functions against the arbitrary-precision reference table.
pub fn specfun_fixtures(tolerance: f64) -> Result<Check> {
    let report = fixtures::validate_reference(tolerance)?;
    let detail = format!(
        "{} values, {} failures",
        report.checked,
        report.failures.len()
    );
    let mut check = Check::new("specfun-fixtures", report.max_log_error, tolerance, detail);
    check.passed = report.passed();
    Ok(check)
}

/// Zero-tilt translation elements: adaptive quadrature against the Bateman
/// closed form on seeded random `(n, n2, q, d)` with `n + n2` even.
pub fn bateman_identity(cases: usize, seed: u64, tolerance: f64) -> Result<Check> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n: usize = rng.random_range(0..12);
        let n2 = 2 * rng.random_range(0..6) + n % 2;
        let q = rng.random_range(0.05..3.0);
        let d = rng.random_range(0.2..2.2);
        let closed = theta0_element(n, n2, q, d)?.to_f64();
        let quadrature = tilted_element(n, n2, q, d, 0.0)?;
        worst = worst.max((quadrature / closed - 1.0).abs());
    }
    Ok(Check::new(
        "bateman-identity",
        worst,
        tolerance,
        format!("{cases} cases, seed {seed}"),
    ))
}

/// Truncated parabolic mode sum of the free Green's function against
/// `exp(-kappa r)/(4 pi r)` for two points at unit distance.
pub fn green_function_oracle(nu_max: usize, tolerance: f64) -> Result<Check> {
    let inner = ParabolicPoint::new(0.0, 0.2, 0.0);
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ParabolicPoint::new(mid, 1.2, 0.0).distance(&inner) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let outer = ParabolicPoint::new(0.5 * (lo + hi), 1.2, 0.0);
    let exact = green_free(&inner, &outer, 1.0);
    let series = green_parabolic(&inner, &outer, 1.0, nu_max)?;
    Ok(Check::new(
        "green-function",
        (series / exact - 1.0).abs(),
        tolerance,
        format!("nu_max {nu_max}, exact {exact:.9}"),
    ))
}

/// Zero-tilt elements with odd `n + n2` vanish by parity; the quadrature
/// route must reproduce that.
pub fn odd_parity_elements(tolerance: f64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (n, n2, q, d) in [
        (0, 1, 0.7, 1.3),
        (3, 4, 0.7, 1.3),
        (7, 2, 0.3, 0.8),
        (5, 10, 1.5, 0.5),
    ] {
        if !theta0_element(n, n2, q, d)?.is_zero() {
            worst = f64::INFINITY;
        }
        worst = worst.max(tilted_element(n, n2, q, d, 0.0)?.abs());
    }
    Ok(Check::new(
        "odd-parity-elements",
        worst,
        tolerance,
        "4 cases".into(),
    ))
}

/// Knife-edge amplitudes from the special-function ratio against
/// `-n! sqrt(2/pi)` for `n <= 60`.
pub fn knife_edge_amplitudes(tolerance: f64) -> Result<Check> {
    let regular = regular_imag_table(60, 0.0)?;
    let outgoing = outgoing_table(60, 0.0)?;
    let mut worst: f64 = 0.0;
    for n in 0..=60 {
        let ratio = match knife_edge_channel(n) {
            BoundaryMode::Dirichlet => -(regular.values[n] / outgoing.values[n]),
            BoundaryMode::Neumann => -(regular.derivatives[n] / outgoing.derivatives[n]),
        };
        let log_expected = libm::lgamma(n as f64 + 1.0) + 0.5 * FRAC_2_PI.ln();
        if ratio.sign() >= 0 {
            worst = f64::INFINITY;
        }
        worst = worst.max((ratio.logmag() - log_expected).exp_m1().abs());
    }
    Ok(Check::new(
        "knife-edge-amplitudes",
        worst,
        tolerance,
        "n <= 60".into(),
    ))
}

/// `log det` of the electromagnetic kernel equals the sum over polarisations.
pub fn block_additivity(tolerance: f64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (radius, theta) in [(0.5, 0.0), (0.0, 0.0), (1.0, 0.6)] {
        let geom = Geometry::new(radius, 1.0, theta)?;
        for q in [0.05, 0.4, 2.0] {
            let full = build_kernel(&geom, q, 20, Channel::Full)?;
            let parts = logdet_one_minus(&full.restrict(Channel::Dirichlet))?
                + logdet_one_minus(&full.restrict(Channel::Neumann))?;
            worst = worst.max((logdet_one_minus(&full)? - parts).abs());
        }
    }
    Ok(Check::new(
        "block-additivity",
        worst,
        tolerance,
        "3 geometries x 3 wavenumbers".into(),
    ))
}

/// `H^2 E` of the knife edge does not depend on `H`.
pub fn scale_invariance(tolerance: f64) -> Result<Check> {
    let spec = QuadratureSpec {
        tolerance: 1e-5,
        ..QuadratureSpec::default()
    };
    let mut worst: f64 = 0.0;
    for theta in [0.0, 0.5] {
        let scaled = |h: f64| -> Result<f64> {
            let geom = Geometry::knife_edge(h, theta)?;
            Ok(h * h * energy_per_length(&geom, &spec, 10, Channel::Full)?.value)
        };
        let reference = scaled(1.0)?;
        for h in [0.5, 2.0] {
            worst = worst.max((scaled(h)? / reference - 1.0).abs());
        }
    }
    Ok(Check::new(
        "scale-invariance",
        worst,
        tolerance,
        "H in {0.5, 1, 2}, two tilts".into(),
    ))
}

fn cofactor3(m: &DMatrix<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// The three-mode knife-edge kernel against cofactor expansion.
pub fn brute_force_determinant(tolerance: f64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for theta in [0.0, 0.7] {
        let geom = Geometry::knife_edge(1.0, theta)?;
        for q in [0.1, 0.5] {
            let kernel = build_kernel(&geom, q, 2, Channel::Full)?;
            let one_minus = DMatrix::identity(3, 3) - &kernel.entries;
            let exact = cofactor3(&one_minus).ln();
            let direct = logdet_one_minus(&kernel)?;
            let ladder = logdet_ladder(&kernel, &[2])?[0];
            worst = worst
                .max((direct / exact - 1.0).abs())
                .max((ladder / exact - 1.0).abs());
        }
    }
    Ok(Check::new(
        "brute-force-3x3",
        worst,
        tolerance,
        "knife edge, nu_max 2".into(),
    ))
}

/// Every check at its acceptance tolerance.
pub fn identity_suite(seed: u64) -> Vec<Check> {
    vec![
        Check::from_result("specfun-fixtures", 1e-10, specfun_fixtures(1e-10)),
        Check::from_result("bateman-identity", 1e-8, bateman_identity(20, seed, 1e-8)),
        Check::from_result("green-function", 1e-6, green_function_oracle(40, 1e-6)),
        Check::from_result("odd-parity-elements", 1e-12, odd_parity_elements(1e-12)),
        Check::from_result("knife-edge-amplitudes", 1e-10, knife_edge_amplitudes(1e-10)),
        Check::from_result("block-additivity", 1e-12, block_additivity(1e-12)),
        Check::from_result("scale-invariance", 1e-10, scale_invariance(1e-10)),
        Check::from_result("brute-force-3x3", 1e-13, brute_force_determinant(1e-13)),
    ]
}
