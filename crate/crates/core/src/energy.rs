//! Spectral integration, truncation extrapolation and Matsubara sums.
//!
//! The zero-temperature energy per unit length is
//!
//! ```text
//! E / (hbar c L) = int_0^inf q dq / (4 pi)  log det(1 - N(q))
//! ```
//!
//! after combining the `kappa` and `k_z` integrals in polar form. The
//! integrand peaks near `q = 0.3 / H`; the default mapping `q = (0.3/H) e^t`
//! spreads Gauss-Legendre panels evenly in `t`. The error estimate compares
//! the panel set with one of half as many panels; panels are doubled until
//! the estimate meets the tolerance.
//!
//! Every spectral node evaluates the log-determinant for a ladder of
//! truncation orders from one factorisation, giving the series that
//! [`extrapolate_numax`] turns into a limit.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad::Rule;
use crate::roundtrip::{build_kernel, logdet_ladder, Channel};
use crate::scattering::Geometry;
use crate::{Error, Result};

/// Centre of the spectral mapping, in units of `1/H`.
pub const SPECTRAL_PEAK: f64 = 0.3;
/// Minimum truncation order for tilts beyond 80 degrees.
pub const NEAR_PARALLEL_FLOOR: usize = 200;
const POINTS_PER_PANEL: usize = 8;
const MAX_DOUBLINGS: usize = 3;

/// Placement of spectral nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mapping {
    /// Uniform panels in `q` on `[0, qmax]`.
    LinearPanels,
    /// Uniform panels in `t` with `q = 0.3 e^t / H`.
    ExpMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes in the primary panel set; rounded up to whole 8-point panels.
    pub node_count: usize,
    /// Upper cutoff, `q H`.
    pub qmax_scaled: f64,
    /// Lower cutoff of the exponential map, `q H`; the remainder below it
    /// is added from the integrand's small-`q` limit.
    pub qmin_scaled: f64,
    pub mapping: Mapping,
    /// Relative tolerance on the quadrature error estimate.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 96,
            qmax_scaled: 25.0,
            qmin_scaled: 1e-5,
            mapping: Mapping::ExpMap,
            tolerance: 1e-6,
        }
    }
}

impl QuadratureSpec {
    fn panels(&self) -> usize {
        self.node_count.div_ceil(POINTS_PER_PANEL).max(2)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.node_count > 0
            && self.qmax_scaled > self.qmin_scaled
            && self.qmin_scaled > 0.0
            && self.tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid quadrature specification {self:?}"
            )))
        }
    }
}

/// An energy (or a coefficient derived from one) with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    /// Value at the largest truncation order.
    pub value: f64,
    /// `(nu_max, value)` for the truncation ladder.
    pub series: Vec<(usize, f64)>,
    pub extrapolated: f64,
    pub trunc_error: f64,
    pub quad_error: f64,
    pub channel: Channel,
}

impl EnergyResult {
    /// Multiplies every value and error by `factor`.
    pub fn scaled(&self, factor: f64) -> EnergyResult {
        EnergyResult {
            value: self.value * factor,
            series: self.series.iter().map(|&(n, v)| (n, v * factor)).collect(),
            extrapolated: self.extrapolated * factor,
            trunc_error: self.trunc_error * factor.abs(),
            quad_error: self.quad_error * factor.abs(),
            channel: self.channel,
        }
    }

    pub fn total_error(&self) -> f64 {
        self.trunc_error + self.quad_error
    }
}

/// Truncation orders `nu_max/8, nu_max/4, nu_max/2, nu_max`.
pub fn truncation_ladder(nu_max: usize) -> Vec<usize> {
    let mut ladder: Vec<usize> = [nu_max / 8, nu_max / 4, nu_max / 2, nu_max]
        .into_iter()
        .filter(|&n| n > 0)
        .collect();
    ladder.dedup();
    if ladder.is_empty() {
        ladder.push(nu_max);
    }
    ladder
}

/// Weighted nodes `(q, w)` in physical units for `panels` panels; `power`
/// selects the measure `q^power dq`.
fn spectral_nodes(
    spec: &QuadratureSpec,
    separation: f64,
    panels: usize,
    rule: &Rule,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * rule.len());
    match spec.mapping {
        Mapping::ExpMap => {
            let t0 = (spec.qmin_scaled / SPECTRAL_PEAK).ln();
            let t1 = (spec.qmax_scaled / SPECTRAL_PEAK).ln();
            let h = (t1 - t0) / panels as f64;
            for p in 0..panels {
                let a = t0 + h * p as f64;
                for (t, w) in rule.on(a, a + h) {
                    let q = SPECTRAL_PEAK * t.exp() / separation;
                    out.push((q, w * q));
                }
            }
        }
        Mapping::LinearPanels => {
            let h = spec.qmax_scaled / separation / panels as f64;
            for p in 0..panels {
                let a = h * p as f64;
                out.extend(rule.on(a, a + h));
            }
        }
    }
    out
}

/// `sum_j w_j m(q_j) f(q_j)` componentwise, nodes evaluated in parallel and
/// summed in a fixed order.
fn weighted_sum<F, M>(nodes: &[(f64, f64)], measure: M, eval: &F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
    M: Fn(f64) -> f64,
{
    let values: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(q, _)| eval(q))
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; values.first().map_or(0, Vec::len)];
    for (&(q, w), v) in nodes.iter().zip(&values) {
        let weight = w * measure(q);
        for (t, x) in total.iter_mut().zip(v) {
            *t += weight * x;
        }
    }
    Ok(total)
}

/// Integral over the spectral domain with measure `q^power dq`, returning
/// values and error estimates for every component of `eval`.
fn spectral_integral<F>(
    spec: &QuadratureSpec,
    separation: f64,
    power: i32,
    eval: &F,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    spec.validate()?;
    let rule = Rule::new(POINTS_PER_PANEL);
    let measure = |q: f64| q.powi(power);
    let tail = match spec.mapping {
        Mapping::ExpMap => {
            // below qmin the log-determinant is frozen at its small-q limit
            let q0 = spec.qmin_scaled / separation;
            let at_q0 = eval(q0)?;
            let factor = q0.powi(power + 1) / f64::from(power + 1);
            at_q0.iter().map(|v| v * factor).collect()
        }
        Mapping::LinearPanels => Vec::new(),
    };
    let add_tail = |mut v: Vec<f64>| {
        for (x, t) in v.iter_mut().zip(&tail) {
            *x += t;
        }
        v
    };
    let mut panels = spec.panels();
    let mut coarse = add_tail(weighted_sum(
        &spectral_nodes(spec, separation, panels / 2, &rule),
        measure,
        eval,
    )?);
    for attempt in 0..=MAX_DOUBLINGS {
        let fine = add_tail(weighted_sum(
            &spectral_nodes(spec, separation, panels, &rule),
            measure,
            eval,
        )?);
        let errors: Vec<f64> = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (f - c).abs())
            .collect();
        let converged = fine
            .iter()
            .zip(&errors)
            .all(|(f, e)| *e <= spec.tolerance * f.abs().max(f64::MIN_POSITIVE));
        if converged {
            return Ok((fine, errors));
        }
        if attempt == MAX_DOUBLINGS {
            let (i, e) = errors.iter().enumerate().fold((0, 0.0), |acc, (i, &e)| {
                if e / fine[i].abs() > acc.1 {
                    (i, e / fine[i].abs())
                } else {
                    acc
                }
            });
            return Err(Error::Accuracy {
                context: format!("spectral integral with {panels} panels (component {i})"),
                estimate: e,
                tolerance: spec.tolerance,
            });
        }
        log::debug!("spectral quadrature not converged with {panels} panels; doubling");
        coarse = fine;
        panels *= 2;
    }
    unreachable!()
}

/// Ladder log-determinants at one wavenumber for each channel, flattened
/// channel-major.
fn ladder_logdets(
    geom: &Geometry,
    q: f64,
    ladder: &[usize],
    channels: &[Channel],
) -> Result<Vec<f64>> {
    let nu_max = *ladder.last().expect("non-empty ladder");
    let wide = if channels.len() == 1 {
        channels[0]
    } else {
        Channel::Full
    };
    let kernel = build_kernel(geom, q, nu_max, wide)?;
    let mut out = Vec::with_capacity(ladder.len() * channels.len());
    for &channel in channels {
        let values = if channel == wide {
            logdet_ladder(&kernel, ladder)?
        } else {
            logdet_ladder(&kernel.restrict(channel), ladder)?
        };
        out.extend(values);
    }
    Ok(out)
}

fn assemble(
    ladder: &[usize],
    channels: &[Channel],
    values: &[f64],
    errors: &[f64],
) -> Vec<EnergyResult> {
    channels
        .iter()
        .enumerate()
        .map(|(c, &channel)| {
            let block = &values[c * ladder.len()..(c + 1) * ladder.len()];
            let series: Vec<(usize, f64)> =
                ladder.iter().copied().zip(block.iter().copied()).collect();
            let value = *block.last().unwrap();
            let quad_error = errors[(c + 1) * ladder.len() - 1];
            let (extrapolated, trunc_error) = match extrapolate_numax(&series) {
                Ok(fit) => fit,
                Err(e) => {
                    log::warn!(
                        "{} channel: {e}; reporting the largest truncation",
                        channel.name()
                    );
                    let spread = if series.len() > 1 {
                        (value - series[series.len() - 2].1).abs()
                    } else {
                        f64::INFINITY
                    };
                    (value, spread)
                }
            };
            EnergyResult {
                value,
                series,
                extrapolated,
                trunc_error,
                quad_error,
                channel,
            }
        })
        .collect()
}

/// Energies per unit length for several channels on a shared node set.
pub fn energy_channels(
    geom: &Geometry,
    spec: &QuadratureSpec,
    nu_max: usize,
    channels: &[Channel],
) -> Result<Vec<EnergyResult>> {
    let ladder = truncation_ladder(nu_max);
    let eval = |q: f64| ladder_logdets(geom, q, &ladder, channels);
    let (mut values, errors) = spectral_integral(spec, geom.separation, 1, &eval)?;
    for v in &mut values {
        *v /= 4.0 * PI;
    }
    let errors: Vec<f64> = errors.iter().map(|e| e / (4.0 * PI)).collect();
    Ok(assemble(&ladder, channels, &values, &errors))
}

/// `E / (hbar c L)` for one channel.
pub fn energy_per_length(
    geom: &Geometry,
    spec: &QuadratureSpec,
    nu_max: usize,
    channel: Channel,
) -> Result<EnergyResult> {
    Ok(energy_channels(geom, spec, nu_max, &[channel])?.remove(0))
}

/// `C = -H^2 E/(hbar c L)` for the knife edge perpendicular to the plane.
pub fn c_perp(nu_max: usize, spec: &QuadratureSpec, channel: Channel) -> Result<EnergyResult> {
    let geom = Geometry::knife_edge(1.0, 0.0)?;
    Ok(energy_per_length(&geom, spec, nu_max, channel)?.scaled(-1.0))
}

/// Solves `f(x) = target` for monotone `f` on `[lo, hi]` by bisection.
fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo) - target, f(hi) - target);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) - target) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// A tail model `v(n) = v_inf + A * phi(n)` through three points.
fn fit_tail(
    points: &[(usize, f64)],
    shape: &dyn Fn(f64, f64) -> f64,
    lo: f64,
    hi: f64,
) -> Option<(f64, f64, f64)> {
    let [(n1, v1), (n2, v2), (n3, v3)] = [points[0], points[1], points[2]];
    let (n1, n2, n3) = (n1 as f64, n2 as f64, n3 as f64);
    let target = (v2 - v1) / (v3 - v2);
    let ratio = |p: f64| (shape(n2, p) - shape(n1, p)) / (shape(n3, p) - shape(n2, p));
    let p = bisect(ratio, target, lo, hi)?;
    let amplitude = (v3 - v2) / (shape(n3, p) - shape(n2, p));
    let limit = v3 - amplitude * shape(n3, p);
    limit.is_finite().then_some((limit, amplitude, p))
}

/// Limit and error estimate of a truncation series.
///
/// Two tail laws are fitted through the last three points: geometric,
/// `v_inf + A rho^n`, and algebraic, `v_inf + B n^-p`. The model that better
/// predicts the preceding point wins; the error is the spread between the
/// two limits plus the winner's prediction miss.
pub fn extrapolate_numax(series: &[(usize, f64)]) -> Result<(f64, f64)> {
    if series.len() < 4 {
        return Err(Error::FitRejected(format!(
            "need at least 4 points, got {}",
            series.len()
        )));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::FitRejected("truncation orders must increase".into()));
    }
    let last = series[series.len() - 1].1;
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let tail = &diffs[diffs.len() - 3..];
    let scale = series.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if tail.iter().all(|d| d.abs() <= 1e-15 * scale) {
        return Ok((last, 0.0));
    }
    let same_sign = tail.iter().all(|d| d * tail[2] > 0.0);
    let shrinking = tail[2].abs() < tail[1].abs();
    if !same_sign || !shrinking {
        return Err(Error::FitRejected(format!(
            "non-monotone tail (last differences {:e}, {:e}, {:e})",
            tail[0], tail[1], tail[2]
        )));
    }
    let pts = &series[series.len() - 3..];
    let held = series[series.len() - 4];
    let geometric = |n: f64, rho: f64| rho.powf(n);
    let algebraic = |n: f64, p: f64| n.powf(-p);
    let fits = [
        fit_tail(pts, &geometric, 1e-12, 1.0 - 1e-12)
            .map(|(v, a, r)| (v, (a * geometric(held.0 as f64, r) + v - held.1).abs())),
        fit_tail(pts, &algebraic, 1e-3, 60.0)
            .map(|(v, a, p)| (v, (a * algebraic(held.0 as f64, p) + v - held.1).abs())),
    ];
    match fits {
        [Some(g), Some(a)] => {
            let (best, other) = if g.1 <= a.1 { (g, a) } else { (a, g) };
            Ok((best.0, (best.0 - other.0).abs() + best.1))
        }
        [Some(only), None] | [None, Some(only)] => Ok((only.0, only.1 + (only.0 - last).abs())),
        [None, None] => Err(Error::FitRejected(
            "neither tail model fits the last three points".into(),
        )),
    }
}

/// `c(theta) = cos(theta) C(theta)` for the knife edge, per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CTheta {
    pub theta: f64,
    pub nu_max: usize,
    /// Electromagnetic, Dirichlet and Neumann, in that order.
    pub channels: Vec<EnergyResult>,
    pub warning: Option<String>,
}

impl CTheta {
    pub fn get(&self, channel: Channel) -> &EnergyResult {
        self.channels
            .iter()
            .find(|r| r.channel == channel)
            .expect("all channels present")
    }
}

/// `pi^2/1440`, the electromagnetic `c(theta)` at `theta = pi/2`.
pub fn c_parallel_half() -> f64 {
    PI * PI / 1440.0
}

fn exact_endpoint(theta: f64) -> CTheta {
    let exact = |channel, value: f64| EnergyResult {
        value,
        series: Vec::new(),
        extrapolated: value,
        trunc_error: 0.0,
        quad_error: 0.0,
        channel,
    };
    let half = 0.5 * c_parallel_half();
    CTheta {
        theta,
        nu_max: 0,
        channels: vec![
            exact(Channel::Full, c_parallel_half()),
            exact(Channel::Dirichlet, half),
            exact(Channel::Neumann, half),
        ],
        warning: None,
    }
}

/// `c(theta)` for the knife edge at unit separation.
///
/// `|theta| = pi/2` returns the exact parallel-plate endpoint. Beyond 80
/// degrees the truncation order is raised to [`NEAR_PARALLEL_FLOOR`];
/// beyond 85 degrees a request below the floor is flagged.
pub fn c_theta(theta: f64, nu_max: usize, spec: &QuadratureSpec) -> Result<CTheta> {
    if theta.abs() == FRAC_PI_2 {
        return Ok(exact_endpoint(theta));
    }
    if !(theta.abs() < FRAC_PI_2) {
        return Err(Error::domain(format!(
            "tilt must lie in [-pi/2, pi/2], got {theta}"
        )));
    }
    let degrees = theta.abs().to_degrees();
    let mut used = nu_max;
    let mut warning = None;
    if degrees > 80.0 && nu_max < NEAR_PARALLEL_FLOOR {
        used = NEAR_PARALLEL_FLOOR;
        if degrees > 85.0 {
            warning = Some(format!(
                "theta = {degrees:.2} deg needs nu_max >= {NEAR_PARALLEL_FLOOR}; raised from {nu_max}"
            ));
        }
    }
    let geom = Geometry::knife_edge(1.0, theta)?;
    let results = energy_channels(&geom, spec, used, &Channel::ALL)?;
    let factor = -theta.cos();
    Ok(CTheta {
        theta,
        nu_max: used,
        channels: results.iter().map(|r| r.scaled(factor)).collect(),
        warning,
    })
}

/// Finite-temperature energy per unit length, `T_scaled = T H / (hbar c)`.
///
/// Matsubara terms are added until one falls below `1e-3 * tolerance` of the
/// running sum; each term integrates over `k_z` at fixed `kappa_n = 2 pi n T`.
pub fn thermal_energy(
    geom: &Geometry,
    t_scaled: f64,
    nu_max: usize,
    spec: &QuadratureSpec,
    channel: Channel,
) -> Result<EnergyResult> {
    if !(t_scaled > 0.0 && t_scaled.is_finite()) {
        return Err(Error::domain(format!(
            "temperature must be > 0, got {t_scaled}"
        )));
    }
    let h = geom.separation;
    let temperature = t_scaled / h;
    let ladder = truncation_ladder(nu_max);
    let channels = [channel];
    let eval = |q: f64| ladder_logdets(geom, q, &ladder, &channels);

    // n = 0: (T/2) (1/pi) int_0^inf dq L(q)
    let (static_term, static_err) = spectral_integral(spec, h, 0, &eval)?;
    let mut total: Vec<f64> = static_term
        .iter()
        .map(|v| 0.5 * temperature / PI * v)
        .collect();
    let mut error: Vec<f64> = static_err
        .iter()
        .map(|v| 0.5 * temperature / PI * v)
        .collect();

    let q_max = spec.qmax_scaled / h;
    let rule = Rule::new(POINTS_PER_PANEL);
    for n in 1.. {
        let kappa = 2.0 * PI * n as f64 * temperature;
        if kappa >= q_max {
            break;
        }
        // k_z = kappa sinh s, so q = kappa cosh s
        let s_max = (q_max / kappa).acosh();
        let term_on = |panels: usize| -> Result<Vec<f64>> {
            let width = s_max / panels as f64;
            let nodes: Vec<(f64, f64)> = (0..panels)
                .flat_map(|p| {
                    rule.on(width * p as f64, width * (p + 1) as f64)
                        .collect::<Vec<_>>()
                })
                .map(|(s, w)| (kappa * s.cosh(), w * kappa * s.cosh()))
                .collect();
            weighted_sum(&nodes, |_| 1.0, &eval)
        };
        let panels = ((s_max / 0.5).ceil() as usize).max(2);
        let fine = term_on(panels)?;
        let coarse = term_on(panels / 2)?;
        let mut small = true;
        for i in 0..total.len() {
            let term = temperature / PI * fine[i];
            total[i] += term;
            error[i] += temperature / PI * (fine[i] - coarse[i]).abs();
            small &= term.abs() < 1e-3 * spec.tolerance * total[i].abs();
        }
        if small {
            break;
        }
    }
    Ok(assemble(&ladder, &channels, &total, &error).remove(0))
}

/// `C_{T=inf}` in `E/L = -T C / H`, from the static Matsubara term alone.
pub fn classical_coefficient(
    geom: &Geometry,
    nu_max: usize,
    spec: &QuadratureSpec,
    channel: Channel,
) -> Result<EnergyResult> {
    let ladder = truncation_ladder(nu_max);
    let channels = [channel];
    let eval = |q: f64| ladder_logdets(geom, q, &ladder, &channels);
    let (values, errors) = spectral_integral(spec, geom.separation, 0, &eval)?;
    let factor = -geom.separation / (2.0 * PI);
    let values: Vec<f64> = values.iter().map(|v| v * factor).collect();
    let errors: Vec<f64> = errors.iter().map(|v| v * factor.abs()).collect();
    Ok(assemble(&ladder, &channels, &values, &errors).remove(0))
}
