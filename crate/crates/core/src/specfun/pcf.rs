//! Parabolic cylinder functions `D_nu` of integer order.
//!
//! Three families are needed:
//!
//! * regular, `D_n(x)` for real `x`, through `D_n(x) = exp(-x^2/4) He_n(x)`;
//! * regular at imaginary argument, the real combinations `i^n D_n(ix)` and
//!   `i^(n+1) D_n'(ix)`, through the modified Hermite recurrence
//!   `h_(k+1) = x h_k + k h_(k-1)` whose terms are all positive;
//! * outgoing, `D_(-n-1)(x)` for `x >= 0`.
//!
//! The outgoing family is the minimal solution of the order recurrence as
//! `n` grows, so the forward recurrence amplifies rounding roughly like
//! `exp(2 x sqrt(n))`. Below `x sqrt(n) <= OUTGOING_FORWARD_LIMIT` it is run
//! forward from `D_0 = exp(-x^2/4)` and `D_(-1) = exp(x^2/4) sqrt(pi/2)
//! erfc(x/sqrt 2)`; above it the ratios `D_(-k-1)/D_(-k)` come from the
//! backward continued fraction and are anchored to `D_0`.

use super::SignedLog;
use crate::{Error, Result};

/// Switch-over for the outgoing family, in units of `x * sqrt(n_max + 1)`.
pub const OUTGOING_FORWARD_LIMIT: f64 = 4.0;

const LN2: f64 = std::f64::consts::LN_2;
const RESCALE_EXP: i32 = 500;

/// A value together with its optional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcfValue {
    pub value: SignedLog,
    pub derivative: Option<SignedLog>,
}

/// Values and derivatives for orders `0..=n_max` of one family at one argument.
#[derive(Debug, Clone)]
pub struct PcfTable {
    pub values: Vec<SignedLog>,
    pub derivatives: Vec<SignedLog>,
}

impl PcfTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn pick(&self, n: usize, with_derivative: bool) -> PcfValue {
        PcfValue {
            value: self.values[n],
            derivative: with_derivative.then(|| self.derivatives[n]),
        }
    }
}

/// Runs `y_(k+1) = step(k, y_(k-1), y_k)` from `y_0, y_1`, rescaling by powers
/// of two so that neither overflow nor underflow can occur.
fn forward_scaled<F>(first: f64, second: f64, len: usize, step: F) -> Vec<SignedLog>
where
    F: Fn(usize, f64, f64) -> f64,
{
    let big = 2f64.powi(RESCALE_EXP);
    let small = 2f64.powi(-RESCALE_EXP);
    let mut out = Vec::with_capacity(len);
    out.push(SignedLog::from_f64(first));
    if len == 1 {
        return out;
    }
    out.push(SignedLog::from_f64(second));
    let (mut prev, mut cur, mut log_scale) = (first, second, 0.0);
    for k in 1..len - 1 {
        let next = step(k, prev, cur);
        prev = cur;
        cur = next;
        if cur.abs() > big {
            prev *= small;
            cur *= small;
            log_scale += f64::from(RESCALE_EXP) * LN2;
        } else if cur != 0.0 && cur.abs() < small && prev.abs() < small {
            prev *= big;
            cur *= big;
            log_scale -= f64::from(RESCALE_EXP) * LN2;
        }
        out.push(SignedLog::from_f64(cur).scale_log(log_scale));
    }
    out
}

fn check_order(n: i64) -> Result<usize> {
    usize::try_from(n)
        .map_err(|_| Error::domain(format!("order must be a non-negative integer, got {n}")))
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("argument must be finite, got {x}")))
    }
}

/// Picks whichever of two exact expressions for the same quantity suffers
/// less cancellation.
fn better_difference(a: (SignedLog, SignedLog), b: (SignedLog, SignedLog)) -> SignedLog {
    let ra = a.0 - a.1;
    let rb = b.0 - b.1;
    let loss = |terms: (SignedLog, SignedLog), r: SignedLog| {
        terms.0.logmag().max(terms.1.logmag()) - r.logmag()
    };
    if loss(a, ra) <= loss(b, rb) {
        ra
    } else {
        rb
    }
}

/// `D_n(x)` and `D_n'(x)` for `n = 0..=n_max`.
pub fn regular_table(n_max: usize, x: f64) -> Result<PcfTable> {
    check_finite(x)?;
    let he = forward_scaled(1.0, x, n_max + 2, |k, prev, cur| x * cur - k as f64 * prev);
    let gauss = -0.25 * x * x;
    let d: Vec<SignedLog> = he.iter().map(|v| v.scale_log(gauss)).collect();
    let half_x = SignedLog::from_f64(0.5 * x);
    let derivatives = (0..=n_max)
        .map(|n| {
            // D_n' = n D_(n-1) - (x/2) D_n = (x/2) D_n - D_(n+1)
            let lowered = if n == 0 {
                SignedLog::ZERO
            } else {
                SignedLog::from_f64(n as f64) * d[n - 1]
            };
            better_difference((lowered, half_x * d[n]), (half_x * d[n], d[n + 1]))
        })
        .collect();
    Ok(PcfTable {
        values: d[..=n_max].to_vec(),
        derivatives,
    })
}

/// `i^n D_n(ix)` and `i^(n+1) D_n'(ix)` for `n = 0..=n_max`, `x >= 0`.
pub fn regular_imag_table(n_max: usize, x: f64) -> Result<PcfTable> {
    check_finite(x)?;
    if x < 0.0 {
        return Err(Error::domain(format!(
            "imaginary-argument family needs x >= 0, got {x}"
        )));
    }
    let h = forward_scaled(1.0, x, n_max + 1, |k, prev, cur| x * cur + k as f64 * prev);
    let gauss = 0.25 * x * x;
    let parity = |n: usize| {
        if n.is_multiple_of(2) {
            SignedLog::ONE
        } else {
            -SignedLog::ONE
        }
    };
    let values = (0..=n_max)
        .map(|n| parity(n) * h[n].scale_log(gauss))
        .collect();
    let half_x = SignedLog::from_f64(0.5 * x);
    let derivatives = (0..=n_max)
        .map(|n| {
            // i^(n+1) D_n'(ix) = (-1)^n exp(x^2/4) [ (x/2) h_n + n h_(n-1) ]
            let lowered = if n == 0 {
                SignedLog::ZERO
            } else {
                SignedLog::from_f64(n as f64) * h[n - 1]
            };
            parity(n) * (half_x * h[n] + lowered).scale_log(gauss)
        })
        .collect();
    Ok(PcfTable {
        values,
        derivatives,
    })
}

/// `D_(-n-1)(x)` and `D_(-n-1)'(x)` for `n = 0..=n_max`, `x >= 0`.
pub fn outgoing_table(n_max: usize, x: f64) -> Result<PcfTable> {
    check_finite(x)?;
    if x < 0.0 {
        return Err(Error::domain(format!(
            "outgoing solutions are defined for x >= 0, got {x}"
        )));
    }
    // y_j = D_(-j) for j = 0..=n_max + 2
    let top = n_max + 2;
    let y = if x * ((n_max + 1) as f64).sqrt() <= OUTGOING_FORWARD_LIMIT {
        let d0 = (-0.25 * x * x).exp();
        let d1 = (0.25 * x * x).exp()
            * (0.5 * std::f64::consts::PI).sqrt()
            * libm::erfc(x / std::f64::consts::SQRT_2);
        forward_scaled(d0, d1, top + 1, |j, prev, cur| (prev - x * cur) / j as f64)
    } else {
        outgoing_by_ratios(top, x)
    };
    let half_x = SignedLog::from_f64(0.5 * x);
    let values = (0..=n_max).map(|n| y[n + 1]).collect();
    let derivatives = (0..=n_max)
        .map(|n| {
            // D_(-n-1)' = -[(x/2) D_(-n-1) + (n+1) D_(-n-2)]
            -(half_x * y[n + 1] + SignedLog::from_f64((n + 1) as f64) * y[n + 2])
        })
        .collect();
    Ok(PcfTable {
        values,
        derivatives,
    })
}

/// `D_(-j)(x)` for `j = 0..=top` from the continued fraction
/// `r_k = 1 / (x + (k+1) r_(k+1))`, `r_k = D_(-k-1)/D_(-k)`.
fn outgoing_by_ratios(top: usize, x: f64) -> Vec<SignedLog> {
    let n = top as f64;
    let start = ((n.sqrt() + 20.0 / x).powi(2).ceil() as usize).clamp(top + 16, 20_000_000);
    let asymptotic = |k: usize| {
        let k1 = (k + 1) as f64;
        2.0 / (x + (x * x + 4.0 * k1).sqrt())
    };
    let mut r = asymptotic(start);
    let mut ratios = vec![0.0; top];
    for k in (0..start).rev() {
        r = 1.0 / (x + (k + 1) as f64 * r);
        if k < top {
            ratios[k] = r;
        }
    }
    let mut out = Vec::with_capacity(top + 1);
    let mut log = -0.25 * x * x;
    out.push(SignedLog::exp(log));
    for ratio in ratios {
        log += ratio.ln();
        out.push(SignedLog::exp(log));
    }
    out
}

/// `D_n(x)` for integer `n >= 0`; the derivative on request.
///
/// Orders are integers by construction of the argument type; negative
/// orders are rejected with a domain error.
pub fn pcf_regular(n: i64, x: f64, with_derivative: bool) -> Result<PcfValue> {
    let n = check_order(n)?;
    Ok(regular_table(n, x)?.pick(n, with_derivative))
}

/// The real number `i^n D_n(ix)`; with the derivative, `i^(n+1) D_n'(ix)`.
pub fn pcf_regular_imag(n: i64, x: f64, with_derivative: bool) -> Result<PcfValue> {
    let n = check_order(n)?;
    Ok(regular_imag_table(n, x)?.pick(n, with_derivative))
}

/// `D_(-n-1)(x)` for `x >= 0`; the derivative on request.
pub fn pcf_outgoing(n: i64, x: f64, with_derivative: bool) -> Result<PcfValue> {
    let n = check_order(n)?;
    Ok(outgoing_table(n, x)?.pick(n, with_derivative))
}
