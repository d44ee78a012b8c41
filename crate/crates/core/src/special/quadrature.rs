use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;


use crate::error::{invalid, Result};

/// Nodes and weights of an interpolatory quadrature on `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre P_n and its derivative at x, by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss-Legendre rule on `(a, b)`; exact for polynomials of degree `2n-1`.
///
/// Roots of P_n are found by Newton iteration from the Tricomi-type initial
/// guess `cos(pi (i - 1/4) / (n + 1/2))`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(invalid("Gauss-Legendre rule needs at least one node"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid("Gauss-Legendre interval must satisfy a < b"));
    }
    let mut ref_nodes = alloc::vec![0.0; n];
    let mut ref_weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th root from the top; store ascending.
        ref_nodes[n - 1 - i] = x;
        ref_nodes[i] = -x;
        ref_weights[n - 1 - i] = w;
        ref_weights[i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: ref_nodes.iter().map(|&x| mid + half * x).collect(),
        weights: ref_weights.iter().map(|&w| half * w).collect(),
        interval: (a, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre(1, 0.0, 2.0).unwrap();
        assert_eq!(r.nodes, [1.0]);
        assert_eq!(r.weights, [2.0]);
    }

    #[test]
    fn two_point_rule() {
        // Roots of P_2 = (3x^2 - 1)/2 are ±1/sqrt(3).
        let r = gauss_legendre(2, -1.0, 1.0).unwrap();
        let root = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + root).abs() < 3e-16);
        assert!((r.nodes[1] - root).abs() < 3e-16);
        assert!((r.nodes[1] - 0.5773502691896257).abs() < 3e-16);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
        assert!(r.integrate(|x| x * x * x).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(3, 1.0, 1.0).is_err());
        assert!(gauss_legendre(3, 2.0, 1.0).is_err());
    }

    #[test]
    fn polynomial_exactness() {
        let (a, b) = (0.5, 2.0);
        for &n in &[2usize, 4, 8, 16] {
            let r = gauss_legendre(n, a, b).unwrap();
            let total: f64 = r.weights.iter().sum();
            assert!((total - (b - a)).abs() <= 1e-12 * (b - a));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes[0] > a && r.nodes[n - 1] < b);
            for k in 0..2 * n as i32 {
                let exact = (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
                let got = r.integrate(|x| x.powi(k));
                assert!((got - exact).abs() <= 1e-12 * exact.abs(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn large_rules_stay_accurate() {
        let r = gauss_legendre(200, -1.0, 1.0).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
        assert!((r.integrate(|x| x.cos()) - 2.0 * 1f64.sin()).abs() < 1e-13);
    }
}
