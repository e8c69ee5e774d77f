//! Bateman k-function `k_l(u) = U(-l/2, 0, 2u) exp(-u) / Gamma(1 - l/2)`
//! for negative integer `l`.
//!
//! Only odd `l = -2n-1` carries information: `Gamma(1 - l/2)` has a pole for
//! even negative `l`, so those values vanish identically. With
//! `g_n = (-1)^n k_(-2n-1)(u) > 0` the three-term relation
//!
//! ```text
//! (2n+3) g_(n+1) = 2 (2n+1+2u) g_n - (2n-1) g_(n-1)
//! ```
//!
//! has `g_n` as its minimal solution, so it is only run upward while
//! `sqrt(2 n u)` is small. Elsewhere the ratios `g_n / g_(n-1)` come from the
//! backward continued fraction. Both regimes are seeded with closed forms in
//! `K_0(u)` and `K_1(u)`.

use std::f64::consts::FRAC_2_PI;

use super::SignedLog;
use crate::{Error, Result};

/// Upward recurrence is used while `4 sqrt(2 n_max u)` stays below this.
const FORWARD_LIMIT: f64 = 3.0;

/// `exp(u) K_0(u)` and `exp(u) K_1(u)` for `u > 0`.
///
/// Trapezoid rule on `int_0^inf exp(-2u sinh^2(t/2)) cosh(nu t) dt`; the
/// integrand is analytic in a strip, so the error decays like
/// `exp(-pi^2 / h)` once `h` also resolves the Gaussian core of width
/// `1/sqrt(u)`.
pub fn bessel_k01_scaled(u: f64) -> (f64, f64) {
    let step = 0.1f64.min(0.5 / u.sqrt());
    let peak = (1.0 / u).max(1.0).acosh();
    let mut k0 = 0.5;
    let mut k1 = 0.5;
    for j in 1..200_000 {
        let t = j as f64 * step;
        let s = (0.5 * t).sinh();
        let e = (-2.0 * u * s * s).exp();
        let c = t.cosh();
        k0 += e;
        k1 += e * c;
        if t > peak && e * c < 1e-18 * k1 {
            break;
        }
    }
    (k0 * step, k1 * step)
}

/// `g_0` and `g_1` as signed logs.
fn seeds(u: f64) -> (SignedLog, SignedLog) {
    let (ek0, ek1) = bessel_k01_scaled(u);
    let g0 = FRAC_2_PI * u * (ek1 - ek0);
    let g1 = FRAC_2_PI * ((u / 3.0 + 4.0 * u * u / 3.0) * ek1 - (u + 4.0 * u * u / 3.0) * ek0);
    (
        SignedLog::from_f64(g0).scale_log(-u),
        SignedLog::from_f64(g1).scale_log(-u),
    )
}

fn check_argument(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Bateman k-function needs u > 0, got {u}"
        )))
    }
}

/// `k_(-2n-1)(u)` for `n = 0..=n_max`.
pub fn bateman_odd_sequence(n_max: usize, u: f64) -> Result<Vec<SignedLog>> {
    check_argument(u)?;
    let (g0, g1) = seeds(u);
    let mut g = Vec::with_capacity(n_max + 1);
    g.push(g0);
    if n_max >= 1 {
        if 4.0 * (2.0 * n_max as f64 * u).sqrt() <= FORWARD_LIMIT {
            forward(&mut g, g1, n_max, u);
        } else {
            backward(&mut g, n_max, u);
        }
    }
    Ok(g.into_iter()
        .enumerate()
        .map(|(n, v)| if n % 2 == 0 { v } else { -v })
        .collect())
}

fn forward(g: &mut Vec<SignedLog>, g1: SignedLog, n_max: usize, u: f64) {
    // Values stay within a few orders of magnitude of g_0 in this regime.
    let scale = g[0].logmag();
    let mut prev = 1.0;
    let mut cur = g1.scale_log(-scale).to_f64();
    g.push(g1);
    for n in 1..n_max {
        let nf = n as f64;
        let next =
            (2.0 * (2.0 * nf + 1.0 + 2.0 * u) * cur - (2.0 * nf - 1.0) * prev) / (2.0 * nf + 3.0);
        prev = cur;
        cur = next;
        g.push(SignedLog::from_f64(cur).scale_log(scale));
    }
}

fn backward(g: &mut Vec<SignedLog>, n_max: usize, u: f64) {
    let root = |n: usize| {
        let nf = n as f64;
        (2.0 * nf - 1.0)
            / ((2.0 * nf + 1.0 + 2.0 * u) + 2.0 * (1.0 + u * (2.0 * nf + 1.0) + u * u).sqrt())
    };
    let span = (2.0 * n_max as f64 * u).sqrt() + 10.0;
    let start = ((span * span / (2.0 * u)).ceil() as usize).clamp(n_max + 10, 50_000_000);
    let mut r = root(start + 1);
    let mut ratios = vec![0.0; n_max + 1];
    for n in (1..=start).rev() {
        let nf = n as f64;
        r = (2.0 * nf - 1.0) / (2.0 * (2.0 * nf + 1.0 + 2.0 * u) - (2.0 * nf + 3.0) * r);
        if n <= n_max {
            ratios[n] = r;
        }
    }
    let mut cur = g[0];
    for &ratio in &ratios[1..] {
        cur = cur.scale_log(ratio.ln());
        g.push(cur);
    }
}

/// `k_l(u)` for negative integer `l` and `u > 0`, as a signed log.
pub fn bateman_k_log(ell: i64, u: f64) -> Result<SignedLog> {
    if ell >= 0 {
        return Err(Error::UnsupportedOrder(ell));
    }
    check_argument(u)?;
    if ell % 2 == 0 {
        return Ok(SignedLog::ZERO);
    }
    let n = ((-ell - 1) / 2) as usize;
    Ok(bateman_odd_sequence(n, u)?[n])
}

/// `k_l(u)` for negative integer `l` and `u > 0`.
pub fn bateman_k(ell: i64, u: f64) -> Result<f64> {
    bateman_k_log(ell, u).map(SignedLog::to_f64)
}

/// `int_0^inf exp(-u cosh t) dt`, used by tests as an independent check of
/// `K_0`.
#[cfg(test)]
fn k0_by_quadrature(u: f64) -> f64 {
    crate::quad::adaptive(
        |t| (-u * t.cosh()).exp(),
        0.0,
        60.0f64.min((60.0 / u).acosh() + 1.0),
        1e-300,
        1e-14,
    )
    .unwrap()
    .value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values() {
        // K_0(1), K_1(1)
        let (k0, k1) = bessel_k01_scaled(1.0);
        let e = 1f64.exp();
        assert!((k0 / e - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k1 / e - 0.601_907_230_197_234_6).abs() < 1e-15);
        for u in [1e-3, 0.05, 2.0, 30.0] {
            let direct = k0_by_quadrature(u);
            let (k0, _) = bessel_k01_scaled(u);
            assert!(((k0 * (-u).exp()) / direct - 1.0).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn closed_form_at_half() {
        assert!((bateman_k(-1, 0.5).unwrap() - 0.233_009_8).abs() < 1e-7);
        assert!((bateman_k(-3, 0.5).unwrap() + 0.036_842).abs() < 1e-6);
    }

    #[test]
    fn even_orders_vanish_and_bad_input_fails() {
        assert_eq!(bateman_k(-2, 0.7).unwrap(), 0.0);
        assert!(matches!(bateman_k(0, 1.0), Err(Error::UnsupportedOrder(0))));
        assert!(matches!(bateman_k(3, 1.0), Err(Error::UnsupportedOrder(3))));
        assert!(matches!(bateman_k(-1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bateman_k(-1, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn regimes_agree() {
        // Force both strategies on the same data and compare.
        for &(n_max, u) in &[(30usize, 0.004), (12, 0.02), (5, 0.05)] {
            let (g0, g1) = seeds(u);
            let mut up = vec![g0];
            forward(&mut up, g1, n_max, u);
            let mut down = vec![g0];
            backward(&mut down, n_max, u);
            for n in 0..=n_max {
                assert!(up[n].rel_diff(down[n]) < 1e-12, "n = {n}, u = {u}");
            }
        }
    }

    #[test]
    fn recurrence_residual_is_small() {
        for u in [0.01, 0.3, 4.0, 60.0] {
            let k = bateman_odd_sequence(120, u).unwrap();
            for n in 1..120 {
                let nf = n as f64;
                let g = |m: usize| if m.is_multiple_of(2) { k[m] } else { -k[m] };
                let lhs = SignedLog::from_f64(2.0 * nf + 3.0) * g(n + 1);
                let rhs = SignedLog::from_f64(2.0 * (2.0 * nf + 1.0 + 2.0 * u)) * g(n)
                    - SignedLog::from_f64(2.0 * nf - 1.0) * g(n - 1);
                let scale = (SignedLog::from_f64(2.0 * (2.0 * nf + 1.0 + 2.0 * u)) * g(n)).logmag();
                let residual = (lhs - rhs).logmag() - scale;
                assert!(residual < (1e-12f64).ln(), "u = {u}, n = {n}");
            }
        }
    }
}
