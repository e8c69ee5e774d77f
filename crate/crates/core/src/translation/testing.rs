//! Validation oracles for the wave expansions.
//!
//! These are not used by the energy pipeline; they test that the regular and
//! outgoing parabolic waves, the plane-wave expansion and the translation
//! elements fit together.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad;
use crate::specfun::{outgoing_table, regular_imag_table, regular_table, SignedLog};
use crate::{Error, Result};

fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// A point given by its parabolic coordinates and axial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPoint {
    pub lambda: f64,
    pub mu: f64,
    pub z: f64,
}

impl ParabolicPoint {
    pub fn new(lambda: f64, mu: f64, z: f64) -> Self {
        ParabolicPoint { lambda, mu, z }
    }

    /// Cartesian `(x, y, z)` with `x = mu lambda`, `y = (lambda^2 - mu^2)/2`.
    pub fn cartesian(&self) -> [f64; 3] {
        [
            self.mu * self.lambda,
            0.5 * (self.lambda * self.lambda - self.mu * self.mu),
            self.z,
        ]
    }

    pub fn distance(&self, other: &ParabolicPoint) -> f64 {
        let (a, b) = (self.cartesian(), other.cartesian());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

/// The two-dimensional mode sum at fixed `q`:
/// `sum_n |i^n D_n(i m<)| D_(-n-1)(m>) D_n(l<) D_n(l>) / (n! sqrt(2 pi))`.
fn mode_sum(inner: &ParabolicPoint, outer: &ParabolicPoint, q: f64, nu_max: usize) -> Result<f64> {
    let s = (2.0 * q).sqrt();
    let reg_mu = regular_imag_table(nu_max, inner.mu * s)?;
    let out_mu = outgoing_table(nu_max, outer.mu * s)?;
    let reg_l1 = regular_table(nu_max, inner.lambda * s)?;
    let reg_l2 = regular_table(nu_max, outer.lambda * s)?;
    let norm = 0.5 * (2.0 * PI).ln();
    let mut total = SignedLog::ZERO;
    for n in 0..=nu_max {
        let term = reg_mu.values[n].abs() * out_mu.values[n] * reg_l1.values[n] * reg_l2.values[n];
        total = total + term.scale_log(-ln_factorial(n) - norm);
    }
    Ok(total.to_f64())
}

/// Free Green's function of `(-nabla^2 + kappa^2)` from the truncated
/// parabolic mode expansion, with the `k_z` integral done numerically.
pub fn green_parabolic(
    r1: &ParabolicPoint,
    r2: &ParabolicPoint,
    kappa: f64,
    nu_max: usize,
) -> Result<f64> {
    if r1.distance(r2) == 0.0 {
        return Err(Error::domain("Green's function at coincident points"));
    }
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be > 0, got {kappa}")));
    }
    let (inner, outer) = if r1.mu <= r2.mu { (r1, r2) } else { (r2, r1) };
    let dz = r1.z - r2.z;
    // Integrand decays at least like exp(-q (mu> - mu<)^2 / 2) in q.
    let gap = (outer.mu - inner.mu).max(1e-3);
    let kz_max = (80.0 / (gap * gap)).max(40.0 / gap).max(10.0 * kappa);
    let mut failure = None;
    let est = quad::adaptive(
        |kz| {
            let q = kappa.hypot(kz);
            match mode_sum(inner, outer, q, nu_max) {
                Ok(v) => v * (kz * dz).cos(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        kz_max,
        1e-16,
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value / PI)
}

/// Closed-form free Green's function `exp(-kappa r) / (4 pi r)`.
pub fn green_free(r1: &ParabolicPoint, r2: &ParabolicPoint, kappa: f64) -> f64 {
    let r = r1.distance(r2);
    (-kappa * r).exp() / (4.0 * PI * r)
}

/// Partial sum of the regular-wave expansion of the evanescent plane wave
/// `exp(-beta x - gamma y)`, `gamma = sqrt(q^2 - beta^2)`, at a point.
///
/// Requires `|beta| < q`; the expansion angle `phi = atan(beta/gamma)` is real.
pub fn plane_wave_partial_sum(
    beta: f64,
    q: f64,
    point: &ParabolicPoint,
    nu_max: usize,
) -> Result<f64> {
    if !(beta.abs() < q) {
        return Err(Error::domain(format!(
            "need |beta| < q, got beta = {beta}, q = {q}"
        )));
    }
    let gamma = (q * q - beta * beta).sqrt();
    let half = 0.5 * (beta / gamma).atan();
    let s = (2.0 * q).sqrt();
    let reg_l = regular_table(nu_max, point.lambda * s)?;
    let reg_mu = regular_imag_table(nu_max, point.mu * s)?;
    let tan_half = SignedLog::from_f64(half.tan());
    let mut power = SignedLog::ONE;
    let mut total = SignedLog::ZERO;
    for n in 0..=nu_max {
        let term = power * reg_l.values[n] * reg_mu.values[n];
        total = total + term.scale_log(-ln_factorial(n));
        power = power * tan_half;
    }
    Ok(total.to_f64() / half.cos())
}

/// Exact plane wave matching [`plane_wave_partial_sum`].
pub fn plane_wave(beta: f64, q: f64, point: &ParabolicPoint) -> f64 {
    let gamma = (q * q - beta * beta).sqrt();
    let [x, y, _] = point.cartesian();
    (-beta * x - gamma * y).exp()
}

/// The raw element `int dk_x U_n(d, theta) U_n2(d, -theta)` with its
/// factorial normalisation, integrated literally over `k_x`.
pub fn raw_translation_integral(
    n: usize,
    n2: usize,
    q: f64,
    d: f64,
    theta: f64,
) -> Result<Complex64> {
    let factor = |nu: usize, ky: Complex64| {
        let norm = (ln_factorial(nu).exp() * (2.0 * PI).sqrt()) * 2.0;
        (Complex64::i() / (ky * norm)).sqrt()
    };
    let integrand = |kx: f64| {
        let ky = Complex64::new(0.0, q.hypot(kx));
        let phi = (Complex64::new(kx, 0.0) / ky).atan();
        let plus = (phi + theta) * 0.5;
        let minus = (phi - theta) * 0.5;
        let u1 = factor(n, ky) * plus.tan().powi(n as i32) / plus.cos()
            * (Complex64::i() * ky * d).exp();
        let u2 = factor(n2, ky) * minus.tan().powi(n2 as i32) / minus.cos()
            * (Complex64::i() * ky * d).exp();
        u1 * u2
    };
    let limit = q + 25.0 / d;
    let peak = (0..=400)
        .map(|j| integrand(limit * (j as f64 / 200.0 - 1.0)).norm())
        .fold(0.0, f64::max);
    let floor = 1e-14 * peak * limit;
    let re = quad::adaptive(|kx| integrand(kx).re, -limit, limit, floor, 1e-13)?;
    let im = quad::adaptive(|kx| integrand(kx).im, -limit, limit, floor, 1e-13)?;
    Ok(Complex64::new(re.value, im.value))
}
