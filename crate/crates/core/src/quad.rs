//! Gauss-Legendre panel quadrature.
//!
//! Rules come from `gauss-quad`; this module adds composite panels and a
//! bisection-driven adaptive integrator whose error estimate is the
//! difference between a panel and its two halves.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::{Error, Result};

/// Nodes and weights of a Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(points: usize) -> Self {
        let points = NonZeroUsize::new(points.max(1)).unwrap();
        let gl = GaussLegendre::new(points);
        let (nodes, weights) = gl.as_node_weight_pairs().iter().copied().unzip();
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maps the rule onto `[a, b]`, yielding `(node, weight)` pairs.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Shared 16-point rule used by the adaptive integrators.
pub fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::new(16))
}

/// Composite nodes and weights for a sequence of panel breakpoints.
pub fn composite(breaks: &[f64], rule: &Rule) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(rule.len() * breaks.len());
    let mut weights = Vec::with_capacity(rule.len() * breaks.len());
    for pair in breaks.windows(2) {
        for (x, w) in rule.on(pair[0], pair[1]) {
            nodes.push(x);
            weights.push(w);
        }
    }
    (nodes, weights)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Gauss-Legendre integration over `[a, b]`.
///
/// A panel is accepted once the 16-point value and the sum over its halves
/// agree to within `max(abs_tol, rel_tol * |running total|)` scaled by the
/// panel's share of the interval.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    const MAX_DEPTH: u32 = 40;
    let rule = gl16();
    let span = (b - a).abs();
    if span == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let coarse = rule.integrate(a, b, &mut f);
    let mut stack = vec![(a, b, coarse, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    let scale = coarse.abs();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let diff = (left + right - whole).abs();
        let share = (hi - lo).abs() / span;
        let tol = abs_tol.max(rel_tol * scale.max((value + left + right).abs())) * share;
        if diff <= tol || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && diff > tol {
                return Err(Error::Accuracy {
                    context: format!("adaptive quadrature on [{a}, {b}]"),
                    estimate: diff,
                    tolerance: tol,
                });
            }
            value += left + right;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(Estimate { value, error })
}
