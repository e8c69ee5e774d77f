//! The truncated round-trip operator and `log det(1 - N)`.
//!
//! In the symmetric gauge the kernel reads
//!
//! ```text
//! N_{n n2} = (-1)^n sqrt(g_n g_n2) K_{n n2}(q, d, theta)
//! ```
//!
//! with `g_n` the reduced cylinder amplitudes and `K` the symmetric-gauge
//! translation elements. It is a diagonal similarity transform of the raw
//! operator `F_n F^P int U_n U_n2`, so the determinant is unchanged. With
//! `P = diag((-1)^n)` one has `N = P G S G P` for the Gram matrix `S`, so
//! `1 - N` is similar to a symmetric positive definite matrix whenever the
//! spectral radius stays below one; its unpivoted elimination then yields the
//! log-determinants of every leading truncation at once.
//!
//! Rows are labelled by `(mode, n)` and sorted by `n`, so truncating at a
//! smaller order is a leading principal submatrix. Polarisations never mix:
//! the electromagnetic kernel is the direct sum of the Dirichlet and Neumann
//! kernels. At zero radius only one polarisation couples to each order
//! (even orders Dirichlet, odd orders Neumann) and the rows of the other are
//! dropped.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::scattering::{knife_edge_channel, reduced_log_amplitudes, BoundaryMode, Geometry};
use crate::translation::{theta0_table, tilted_block};
use crate::{Error, Result};

/// Which polarisations enter the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Electromagnetic: Dirichlet plus Neumann.
    #[serde(rename = "em", alias = "full")]
    Full,
    Dirichlet,
    Neumann,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Full, Channel::Dirichlet, Channel::Neumann];

    pub fn includes(self, mode: BoundaryMode) -> bool {
        match self {
            Channel::Full => true,
            Channel::Dirichlet => mode == BoundaryMode::Dirichlet,
            Channel::Neumann => mode == BoundaryMode::Neumann,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Full => "em",
            Channel::Dirichlet => "dirichlet",
            Channel::Neumann => "neumann",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "em" | "full" => Ok(Channel::Full),
            "dirichlet" | "d" => Ok(Channel::Dirichlet),
            "neumann" | "n" => Ok(Channel::Neumann),
            other => Err(Error::Config(format!(
                "unknown channel '{other}' (expected em, dirichlet or neumann)"
            ))),
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl From<BoundaryMode> for Channel {
    fn from(mode: BoundaryMode) -> Self {
        match mode {
            BoundaryMode::Dirichlet => Channel::Dirichlet,
            BoundaryMode::Neumann => Channel::Neumann,
        }
    }
}

/// Truncated symmetric-gauge round-trip operator at one spectral point.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    pub nu_max: usize,
    /// `q H`.
    pub q_scaled: f64,
    pub channel: Channel,
    /// Row and column labels, sorted by order.
    pub labels: Vec<(BoundaryMode, usize)>,
    pub entries: DMatrix<f64>,
}

impl TruncatedKernel {
    /// Wraps an arbitrary matrix; rows are labelled as Dirichlet orders
    /// `0..dim`.
    pub fn from_matrix(entries: DMatrix<f64>, q_scaled: f64) -> Self {
        assert!(entries.is_square(), "kernel must be square");
        let dim = entries.nrows();
        TruncatedKernel {
            nu_max: dim.saturating_sub(1),
            q_scaled,
            channel: Channel::Dirichlet,
            labels: (0..dim).map(|n| (BoundaryMode::Dirichlet, n)).collect(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// The sub-kernel of one channel.
    pub fn restrict(&self, channel: Channel) -> TruncatedKernel {
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| channel.includes(self.labels[i].0))
            .collect();
        let entries = DMatrix::from_fn(keep.len(), keep.len(), |i, j| {
            self.entries[(keep[i], keep[j])]
        });
        TruncatedKernel {
            nu_max: self.nu_max,
            q_scaled: self.q_scaled,
            channel,
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            entries,
        }
    }

    /// Number of leading rows with order `<= cutoff`.
    pub fn leading_rows(&self, cutoff: usize) -> usize {
        self.labels.partition_point(|&(_, n)| n <= cutoff)
    }
}

/// Row labels for a channel.
fn channel_labels(geom: &Geometry, nu_max: usize, channel: Channel) -> Vec<(BoundaryMode, usize)> {
    let mut labels = Vec::new();
    for n in 0..=nu_max {
        for mode in BoundaryMode::BOTH {
            let coupled = !geom.is_knife_edge() || knife_edge_channel(n) == mode;
            if channel.includes(mode) && coupled {
                labels.push((mode, n));
            }
        }
    }
    labels
}

/// Assembles the symmetric-gauge kernel for `geom` at wavenumber `q`.
pub fn build_kernel(
    geom: &Geometry,
    q: f64,
    nu_max: usize,
    channel: Channel,
) -> Result<TruncatedKernel> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::domain(format!("q must be finite and > 0, got {q}")));
    }
    let labels = channel_labels(geom, nu_max, channel);
    let x = geom.mu0_scaled(q);
    let d = geom.focus_distance();
    let mut log_g = [
        vec![f64::NEG_INFINITY; nu_max + 1],
        vec![f64::NEG_INFINITY; nu_max + 1],
    ];
    for (slot, mode) in BoundaryMode::BOTH.into_iter().enumerate() {
        if channel.includes(mode) {
            log_g[slot] = reduced_log_amplitudes(nu_max, mode, x)?;
        }
    }
    let slot = |mode: BoundaryMode| mode as usize;
    let dim = labels.len();
    let mut entries = DMatrix::zeros(dim, dim);
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };

    if geom.theta == 0.0 {
        let k = theta0_table(nu_max, q, d)?;
        for (i, &(mi, ni)) in labels.iter().enumerate() {
            for (j, &(mj, nj)) in labels.iter().enumerate() {
                let element = k[ni + nj];
                if mi != mj || element.is_zero() {
                    continue;
                }
                let lg = 0.5 * (log_g[slot(mi)][ni] + log_g[slot(mj)][nj]);
                entries[(i, j)] = sign(ni) * element.scale_log(lg).to_f64();
            }
        }
    } else {
        let weights: Vec<f64> = (0..=nu_max).map(|n| log_g[0][n].max(log_g[1][n])).collect();
        let block = tilted_block(nu_max, q, d, geom.theta, Some(&weights))?;
        for (i, &(mi, ni)) in labels.iter().enumerate() {
            for (j, &(mj, nj)) in labels.iter().enumerate() {
                if mi != mj {
                    continue;
                }
                let lg = 0.5 * (log_g[slot(mi)][ni] + log_g[slot(mj)][nj]) + block.log_scale;
                entries[(i, j)] = sign(ni) * lg.exp() * block.get(ni, nj);
            }
        }
    }
    if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
        return Err(Error::Accuracy {
            context: format!("kernel assembly at q = {q}"),
            estimate: *bad,
            tolerance: f64::MAX,
        });
    }
    Ok(TruncatedKernel {
        nu_max,
        q_scaled: q * geom.separation,
        channel,
        labels,
        entries,
    })
}

fn regime_error(kernel: &TruncatedKernel, pivot: usize, value: f64) -> Error {
    Error::PhysicalRegime {
        q_scaled: kernel.q_scaled,
        pivot,
        value,
    }
}

/// `log det(1 - N)` by LU factorisation with partial pivoting.
///
/// A determinant that is not strictly positive means an eigenvalue of `N`
/// has crossed one, which is reported as a physical-regime error.
pub fn logdet_one_minus(kernel: &TruncatedKernel) -> Result<f64> {
    let dim = kernel.dim();
    if dim == 0 {
        return Ok(0.0);
    }
    let a = DMatrix::identity(dim, dim) - &kernel.entries;
    let lu = a.lu();
    let u = lu.u();
    let mut sign = lu.p().determinant::<f64>();
    let mut log = 0.0;
    for i in 0..dim {
        let p = u[(i, i)];
        if p == 0.0 || !p.is_finite() {
            return Err(regime_error(kernel, i, p));
        }
        sign *= p.signum();
        log += p.abs().ln();
    }
    if sign <= 0.0 {
        return Err(regime_error(kernel, dim - 1, sign * log.exp()));
    }
    Ok(log)
}

/// `log det(1 - N)` of every leading truncation `n <= cutoff`, from one
/// unpivoted elimination.
pub fn logdet_ladder(kernel: &TruncatedKernel, cutoffs: &[usize]) -> Result<Vec<f64>> {
    let dim = kernel.dim();
    let mut a = DMatrix::identity(dim, dim) - &kernel.entries;
    let mut partial = Vec::with_capacity(dim + 1);
    partial.push(0.0);
    let mut log = 0.0;
    for k in 0..dim {
        let p = a[(k, k)];
        if !(p > 0.0) || !p.is_finite() {
            return Err(regime_error(kernel, k, p));
        }
        log += p.ln();
        partial.push(log);
        for j in k + 1..dim {
            let factor = a[(k, j)] / p;
            if factor == 0.0 {
                continue;
            }
            for i in k + 1..dim {
                let v = a[(i, k)];
                a[(i, j)] -= v * factor;
            }
        }
    }
    Ok(cutoffs
        .iter()
        .map(|&c| partial[kernel.leading_rows(c)])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{amplitude_table, plane_amplitude};
    use crate::specfun::bateman_k;
    use crate::translation::testing::raw_translation_integral;

    fn knife(theta: f64) -> Geometry {
        Geometry::knife_edge(1.0, theta).unwrap()
    }

    #[test]
    fn knife_edge_kernel_is_the_bateman_matrix() {
        let q = 0.37;
        let k = build_kernel(&knife(0.0), q, 0, Channel::Full).unwrap();
        assert_eq!(k.dim(), 1);
        assert!((k.entries[(0, 0)] - bateman_k(-1, 2.0 * q).unwrap()).abs() < 1e-15);

        let k = build_kernel(&knife(0.0), q, 9, Channel::Full).unwrap();
        for (i, &(_, n)) in k.labels.iter().enumerate() {
            for (j, &(_, n2)) in k.labels.iter().enumerate() {
                let expected = if (n + n2) % 2 == 1 {
                    0.0
                } else {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    sign * bateman_k(-((n + n2) as i64) - 1, 2.0 * q).unwrap()
                };
                assert!((k.entries[(i, j)] - expected).abs() < 1e-14, "({n}, {n2})");
            }
        }
        assert_eq!(k.entries[(0, 1)], 0.0);
    }

    #[test]
    fn brute_force_assembly_at_low_order() {
        let geom = Geometry::new(0.8, 0.6, 0.0).unwrap();
        let q = 0.9;
        let x = geom.mu0_scaled(q);
        let d = geom.focus_distance();
        for mode in BoundaryMode::BOTH {
            let kernel = build_kernel(&geom, q, 2, mode.into()).unwrap();
            let f = amplitude_table(2, mode, x).unwrap();
            let log_g = reduced_log_amplitudes(2, mode, x).unwrap();
            for n in 0..=2usize {
                for n2 in 0..=2usize {
                    let raw = raw_translation_integral(n, n2, q, d, 0.0).unwrap().re;
                    let unsym = f[n].to_f64() * plane_amplitude(mode) * raw;
                    // conjugate by diag(sqrt(n! g_n))
                    let fact = |m: usize| libm::lgamma(m as f64 + 1.0);
                    let conj = (0.5 * (fact(n2) + log_g[n2] - fact(n) - log_g[n])).exp();
                    let expected = unsym * conj;
                    let got = kernel.entries[(n, n2)];
                    assert!(
                        (got - expected).abs() < 1e-9 * got.abs().max(1e-12),
                        "{mode:?} ({n}, {n2}): {got} vs {expected}"
                    );
                }
            }
        }
    }

    fn cofactor3(m: &DMatrix<f64>) -> f64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    #[test]
    fn small_determinants() {
        let zero = TruncatedKernel::from_matrix(DMatrix::zeros(4, 4), 1.0);
        assert_eq!(logdet_one_minus(&zero).unwrap(), 0.0);
        let one = TruncatedKernel::from_matrix(DMatrix::from_element(1, 1, 0.3), 1.0);
        assert!((logdet_one_minus(&one).unwrap() - 0.7f64.ln()).abs() < 1e-15);
        let m = DMatrix::from_row_slice(3, 3, &[0.2, -0.1, 0.05, 0.3, 0.1, -0.2, 0.02, 0.15, 0.4]);
        let k = TruncatedKernel::from_matrix(m.clone(), 1.0);
        let exact = cofactor3(&(DMatrix::identity(3, 3) - m)).ln();
        assert!((logdet_one_minus(&k).unwrap() / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unphysical_kernel_is_rejected() {
        let k = TruncatedKernel::from_matrix(DMatrix::from_element(1, 1, 1.5), 2.0);
        assert!(matches!(
            logdet_one_minus(&k),
            Err(Error::PhysicalRegime { .. })
        ));
        assert!(matches!(
            logdet_ladder(&k, &[0]),
            Err(Error::PhysicalRegime { .. })
        ));
    }

    #[test]
    fn block_additivity_at_zero_tilt() {
        let geom = Geometry::new(0.5, 1.0, 0.0).unwrap();
        for q in [0.05, 0.4, 2.0] {
            let full = build_kernel(&geom, q, 30, Channel::Full).unwrap();
            let d = build_kernel(&geom, q, 30, Channel::Dirichlet).unwrap();
            let n = build_kernel(&geom, q, 30, Channel::Neumann).unwrap();
            let sum = logdet_one_minus(&d).unwrap() + logdet_one_minus(&n).unwrap();
            assert!((logdet_one_minus(&full).unwrap() - sum).abs() < 1e-12);
        }
        let knife_full = build_kernel(&knife(0.0), 0.3, 30, Channel::Full).unwrap();
        let even = knife_full.restrict(Channel::Dirichlet);
        let odd = knife_full.restrict(Channel::Neumann);
        let sum = logdet_one_minus(&even).unwrap() + logdet_one_minus(&odd).unwrap();
        assert!((logdet_one_minus(&knife_full).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn similarity_invariance() {
        let mut k = build_kernel(&knife(0.7), 0.3, 20, Channel::Full).unwrap();
        let base = logdet_one_minus(&k).unwrap();
        let dim = k.dim();
        for i in 0..dim {
            for j in 0..dim {
                k.entries[(i, j)] *= (0.3 * i as f64 - 0.3 * j as f64).exp();
            }
        }
        assert!((logdet_one_minus(&k).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn ladder_matches_direct_truncations() {
        for geom in [
            knife(0.0),
            knife(1.1),
            Geometry::new(1.0, 0.5, 0.0).unwrap(),
        ] {
            let big = build_kernel(&geom, 0.4, 24, Channel::Full).unwrap();
            let cutoffs = [3, 6, 12, 24];
            let ladder = logdet_ladder(&big, &cutoffs).unwrap();
            for (&c, &v) in cutoffs.iter().zip(&ladder) {
                let small = build_kernel(&geom, 0.4, c, Channel::Full).unwrap();
                let direct = logdet_one_minus(&small).unwrap();
                assert!(
                    (v - direct).abs() < 1e-11 * direct.abs(),
                    "cutoff {c}: {v} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_wavenumber_and_truncation() {
        let geom = knife(0.0);
        let values: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&q| {
                logdet_one_minus(&build_kernel(&geom, q, 20, Channel::Full).unwrap()).unwrap()
            })
            .collect();
        assert!(values.iter().all(|v| *v <= 0.0));
        assert!(values.windows(2).all(|w| w[1].abs() < w[0].abs()));
        for geom in [
            knife(0.0),
            knife(1.2),
            Geometry::new(2.0, 1.0, 0.0).unwrap(),
        ] {
            let k = build_kernel(&geom, 0.3, 40, Channel::Full).unwrap();
            let ladder = logdet_ladder(&k, &(0..=40).collect::<Vec<_>>()).unwrap();
            assert!(ladder.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn entries_vanish_at_large_wavenumber() {
        let k = build_kernel(
            &Geometry::new(1.0, 1.0, 0.3).unwrap(),
            40.0,
            10,
            Channel::Full,
        )
        .unwrap();
        assert!(k.entries.iter().all(|v| v.abs() < 1e-20));
    }
}
