use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Gauss-Chebyshev (first kind) rule with `n` nodes `cos((2i-1) pi / 2n)`.
///
/// [`integrate`](Self::integrate) uses it for plain integrals over `[-1, 1]`
/// by folding `sqrt(1 - x^2)` into the integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevRule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", 0.0, "a Chebyshev rule needs at least one node"));
        }
        let nodes: Vec<f64> = (1..=n)
            .map(|i| (PI * (2 * i - 1) as f64 / (2 * n) as f64).cos())
            .collect();
        let weights = nodes.iter().map(|x| (1.0 - x * x).sqrt()).collect();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The factors `sqrt(1 - x_i^2)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `int_{-1}^{1} f(x) / sqrt(1 - x^2) dx`; exact for
    /// polynomials of degree below `2n`.
    pub fn integrate_weighted(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self.nodes.iter().map(|&x| f(x)).sum();
        PI / self.len() as f64 * sum
    }

    /// Approximates `int_{-1}^{1} f(x) dx` as `(pi/n) sum f(x_i) sqrt(1 - x_i^2)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum();
        PI / self.len() as f64 * sum
    }
}
