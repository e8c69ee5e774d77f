//! Plane-to-parabola translation elements.
//!
//! All elements are produced in the symmetric gauge
//!
//! ```text
//! K_{n n2}(q, d, theta) = sqrt(2/pi) sqrt(n! n2!) int dk_x U_n(d, theta) U_n2(d, -theta)
//!                       = (1/2pi) int du  t_+^n t_-^n2 / (cos_+ cos_-)  exp(-2qd cosh u)
//! ```
//!
//! where `k_x = q sinh u`, `t_pm = tan((phi pm theta)/2)`, `cos_pm =
//! cos((phi pm theta)/2)` and `tan(phi/2) = -i tanh(u/2)`. The factorials of
//! the raw elements never appear. At zero tilt the element is the Bateman
//! function `k_(-n-n2-1)(2qd)`.
//!
//! With `T = tan(theta/2)` and `s = tanh(u/2)` the tangent addition formula
//! gives `t_+ = (T - i s)/(1 + i s T)` and `t_- = -conj(t_+)`, so the
//! element folds onto the half line as `(-1)^n2 S_{n n2}` with
//!
//! ```text
//! S_{n n2} = (1+T^2)/pi int_0^inf du Re(t_+^n conj(t_+)^n2) sech^2(u/2) / (1 + s^2 T^2) exp(-2qd cosh u),
//! ```
//!
//! a symmetric positive semidefinite Gram matrix. The batch path evaluates
//! it as one matrix product over a shared node set.

pub mod testing;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad::{self, gl16};
use crate::specfun::{bateman_k_log, bateman_odd_sequence, SignedLog};
use crate::{Error, Result};

/// Relative accuracy target for translation elements.
pub const ELEMENT_TOLERANCE: f64 = 1e-10;

/// A point of the `(kappa, k_z, k_x)` spectral domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub kappa: f64,
    pub kz: f64,
    pub q: f64,
    pub kx: f64,
}

impl SpectralPoint {
    pub fn new(kappa: f64, kz: f64, kx: f64) -> Self {
        SpectralPoint {
            kappa,
            kz,
            q: kappa.hypot(kz),
            kx,
        }
    }

    /// The point with `k_x = q sinh u`.
    pub fn from_rapidity(kappa: f64, kz: f64, u: f64) -> Self {
        let q = kappa.hypot(kz);
        SpectralPoint {
            kappa,
            kz,
            q,
            kx: q * u.sinh(),
        }
    }

    /// `|k_y| = sqrt(q^2 + k_x^2)`; the wave vector is `k_y = i |k_y|`.
    pub fn ky_decay(&self) -> f64 {
        self.q.hypot(self.kx)
    }

    /// `tan(phi/2)` with `tan(phi) = k_x / k_y`.
    pub fn half_angle_tan(&self) -> Complex64 {
        let ratio = Complex64::new(0.0, -self.kx / self.ky_decay());
        (ratio.atan() * 0.5).tan()
    }

    /// `exp(i k_y d)`.
    pub fn propagation(&self, d: f64) -> f64 {
        (-self.ky_decay() * d).exp()
    }
}

fn check_spectral(q: f64, d: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() && d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "translation needs q > 0 and d > 0, got q = {q}, d = {d}"
        )))
    }
}

/// Zero-tilt element `k_(-n-n2-1)(2qd)`; exactly zero for odd `n + n2`.
pub fn theta0_element(n: usize, n2: usize, q: f64, d: f64) -> Result<SignedLog> {
    check_spectral(q, d)?;
    bateman_k_log(-((n + n2) as i64) - 1, 2.0 * q * d)
}

/// `k_(-m-1)(2qd)` for `m = 0..=2 n_max`, indexed by `n + n2`.
pub fn theta0_table(n_max: usize, q: f64, d: f64) -> Result<Vec<SignedLog>> {
    check_spectral(q, d)?;
    let odd = bateman_odd_sequence(n_max, 2.0 * q * d)?;
    Ok((0..=2 * n_max)
        .map(|m| {
            if m % 2 == 0 {
                odd[m / 2]
            } else {
                SignedLog::ZERO
            }
        })
        .collect())
}

/// Full-line integrand of the symmetric-gauge element at rapidity `u`.
fn full_line_integrand(n: usize, n2: usize, a: f64, theta: f64, u: f64) -> Complex64 {
    let half_phi = Complex64::new(0.0, -0.5 * u);
    let plus = half_phi + 0.5 * theta;
    let minus = half_phi - 0.5 * theta;
    let tp = plus.tan();
    let tm = minus.tan();
    tp.powi(n as i32) * tm.powi(n2 as i32) / (plus.cos() * minus.cos()) * (-a * u.cosh()).exp()
        / (2.0 * PI)
}

/// Rapidity beyond which `4 exp(-u) exp(-2a sinh^2(u/2))` drops below `floor`.
fn rapidity_cutoff(a: f64, floor: f64) -> f64 {
    let f = |u: f64| (4.0f64).ln() - u - 2.0 * a * (0.5 * u).sinh().powi(2) - floor.ln();
    let (mut lo, mut hi) = (0.0, 60.0);
    if f(hi) > 0.0 {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One tilted element by adaptive quadrature of the complex integrand over
/// the full line.
///
/// The imaginary part must cancel between `u` and `-u`; a residue above
/// `1e-10` of the real part (or of the peak integrand, when the real part
/// itself vanishes) is reported as an accuracy error.
pub fn tilted_element(n: usize, n2: usize, q: f64, d: f64, theta: f64) -> Result<f64> {
    check_spectral(q, d)?;
    if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!(
            "tilt must lie in (-pi/2, pi/2), got {theta}"
        )));
    }
    let a = 2.0 * q * d;
    let cutoff = rapidity_cutoff(a, 1e-18);
    let peak = (0..=200)
        .map(|j| full_line_integrand(n, n2, a, theta, cutoff * (j as f64 / 100.0 - 1.0)).norm())
        .fold(0.0, f64::max);
    let abs_tol = 1e-13 * peak;
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for (lo, hi) in [(-cutoff, 0.0), (0.0, cutoff)] {
        let re = quad::adaptive(
            |u| full_line_integrand(n, n2, a, theta, u).re,
            lo,
            hi,
            abs_tol,
            1e-12,
        )?;
        let im = quad::adaptive(
            |u| full_line_integrand(n, n2, a, theta, u).im,
            lo,
            hi,
            abs_tol,
            1e-12,
        )?;
        total += Complex64::new(re.value, im.value);
        error += re.error;
    }
    let reference = total.re.abs().max(peak);
    if total.im.abs() > ELEMENT_TOLERANCE * reference || error > ELEMENT_TOLERANCE * reference {
        return Err(Error::Accuracy {
            context: format!("tilted element ({n}, {n2}) at q = {q}, d = {d}, theta = {theta}"),
            estimate: total.im.abs().max(error),
            tolerance: ELEMENT_TOLERANCE * reference,
        });
    }
    Ok(total.re)
}

/// Symmetric-gauge elements for all `n, n2 <= n_max` at one spectral point:
/// `K_{n n2} = exp(log_scale) * values[n * dim + n2]`.
#[derive(Debug, Clone)]
pub struct TiltedBlock {
    pub dim: usize,
    pub log_scale: f64,
    pub values: Vec<f64>,
    pub node_count: usize,
}

impl TiltedBlock {
    pub fn get(&self, n: usize, n2: usize) -> f64 {
        self.values[n * self.dim + n2]
    }
}

/// Folded half-line weight without the `exp(-2qd)` factor.
fn folded_weight(a: f64, t: f64, u: f64) -> f64 {
    let s = (0.5 * u).tanh();
    let sh = (0.5 * u).sinh();
    let sech2 = 1.0 - s * s;
    (1.0 + t * t) / PI * sech2 / (1.0 + s * s * t * t) * (-2.0 * a * sh * sh).exp()
}

fn tan_plus(t: f64, u: f64) -> Complex64 {
    let s = (0.5 * u).tanh();
    Complex64::new(t, -s) / Complex64::new(1.0, s * t)
}

/// Orders at which the node set is checked for convergence.
fn probe_orders(n_max: usize) -> Vec<usize> {
    let mut p = vec![
        0,
        1,
        2,
        n_max / 4,
        n_max / 2,
        3 * n_max / 4,
        n_max.saturating_sub(1),
        n_max,
    ];
    p.retain(|&v| v <= n_max);
    p.sort_unstable();
    p.dedup();
    p
}

/// Probe integrals `S_{a b}` over one panel, weighted.
fn probe_values(
    lo: f64,
    hi: f64,
    a: f64,
    t: f64,
    probes: &[usize],
    pair_weight: &[f64],
) -> Vec<f64> {
    let p = probes.len();
    let mut out = vec![0.0; p * p];
    for (u, w) in gl16().on(lo, hi) {
        let base = w * folded_weight(a, t, u);
        let z = tan_plus(t, u);
        let powers: Vec<Complex64> = probes.iter().map(|&n| z.powi(n as i32)).collect();
        for i in 0..p {
            for j in i..p {
                let v = powers[i].re * powers[j].re + powers[i].im * powers[j].im;
                out[i * p + j] += base * v;
            }
        }
    }
    for (o, w) in out.iter_mut().zip(pair_weight) {
        *o *= w;
    }
    out
}

/// Panel breakpoints for the folded integral, refined until every probe
/// element agrees between a panel and its halves.
fn tilted_breaks(a: f64, t: f64, n_max: usize, log_weights: Option<&[f64]>) -> Result<Vec<f64>> {
    const WIDTH: f64 = 0.5;
    const MAX_DEPTH: u32 = 14;
    let cutoff = rapidity_cutoff(a, 1e-17);
    let mut initial = vec![0.0];
    if t != 0.0 {
        let mut s = t.abs() / 16.0;
        while s < WIDTH.min(cutoff) {
            initial.push(s);
            s *= 2.0;
        }
    }
    let mut x = *initial.last().unwrap();
    while x < cutoff {
        x = (x + WIDTH).min(cutoff);
        initial.push(x);
    }

    let probes = probe_orders(n_max);
    let p = probes.len();
    let weight = |n: usize| log_weights.map_or(0.0, |w| w[n]);
    let top = probes
        .iter()
        .map(|&n| weight(n))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut pair_weight = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            pair_weight[i * p + j] = (0.5 * (weight(probes[i]) + weight(probes[j])) - top).exp();
        }
    }

    let whole: Vec<Vec<f64>> = initial
        .windows(2)
        .map(|w| probe_values(w[0], w[1], a, t, &probes, &pair_weight))
        .collect();
    let mut scale = 0.0f64;
    for i in 0..p {
        let total: f64 = whole.iter().map(|v| v[i * p + i]).sum();
        scale = scale.max(total.abs());
    }
    let tol = 0.1 * ELEMENT_TOLERANCE * scale.max(f64::MIN_POSITIVE);

    let mut breaks = vec![0.0];
    let mut stack: Vec<(f64, f64, Vec<f64>, u32)> = initial
        .windows(2)
        .zip(whole)
        .rev()
        .map(|(w, v)| (w[0], w[1], v, 0))
        .collect();
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = probe_values(lo, mid, a, t, &probes, &pair_weight);
        let right = probe_values(mid, hi, a, t, &probes, &pair_weight);
        let diff = coarse
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(c, (l, r))| (l + r - c).abs())
            .fold(0.0, f64::max);
        if diff <= tol {
            breaks.push(hi);
        } else if depth >= MAX_DEPTH {
            return Err(Error::Accuracy {
                context: format!("tilted translation nodes at 2qd = {a}, tan(theta/2) = {t}"),
                estimate: diff,
                tolerance: tol,
            });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(breaks)
}

/// All symmetric-gauge elements with `n, n2 <= n_max` at tilt `theta`.
///
/// `log_weights`, when given, holds `ln g_n` for the orders that will
/// multiply the block; node refinement then targets the weighted entries.
pub fn tilted_block(
    n_max: usize,
    q: f64,
    d: f64,
    theta: f64,
    log_weights: Option<&[f64]>,
) -> Result<TiltedBlock> {
    check_spectral(q, d)?;
    if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!(
            "tilt must lie in (-pi/2, pi/2), got {theta}"
        )));
    }
    let a = 2.0 * q * d;
    let t = (0.5 * theta).tan();
    let breaks = tilted_breaks(a, t, n_max, log_weights)?;
    let (nodes, weights) = quad::composite(&breaks, gl16());
    let dim = n_max + 1;
    let rows = 2 * nodes.len();
    // B = [sqrt(w) Re Z ; sqrt(w) Im Z], so S = B^T B.
    let mut b = vec![0.0; rows * dim];
    for (j, (&u, &w)) in nodes.iter().zip(&weights).enumerate() {
        let root = (w * folded_weight(a, t, u)).sqrt();
        let z = tan_plus(t, u);
        let mut power = Complex64::new(root, 0.0);
        let (re_row, im_row) = b[2 * j * dim..(2 * j + 2) * dim].split_at_mut(dim);
        for n in 0..dim {
            re_row[n] = power.re;
            im_row[n] = power.im;
            power *= z;
        }
    }
    let mut values = vec![0.0; dim * dim];
    // SAFETY: the slices have exactly the extents described by the strides.
    unsafe {
        matrixmultiply::dgemm(
            dim,
            rows,
            dim,
            1.0,
            b.as_ptr(),
            1,
            dim as isize,
            b.as_ptr(),
            dim as isize,
            1,
            0.0,
            values.as_mut_ptr(),
            dim as isize,
            1,
        );
    }
    for row in values.chunks_mut(dim) {
        for v in row.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(TiltedBlock {
        dim,
        log_scale: -a,
        values,
        node_count: nodes.len(),
    })
}
