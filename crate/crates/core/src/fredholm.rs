//! `det(I - λ K_Airy)` on `L^2(s, ∞)` by Nyström discretisation.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::special::{airy, gauss_legendre};

/// Default scale of the map from `(-1, 1)` onto `(s, ∞)`.
pub const DEFAULT_MAP_SCALE: f64 = 10.0;
pub const DEFAULT_NODES: usize = 60;

/// `(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)`, with the diagonal limit
/// `Ai'(x)^2 - x Ai(x)^2` used when `|x - y| <= 1e-6`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    if (x - y).abs() <= 1e-6 {
        let m = 0.5 * (x + y);
        let a = airy(m);
        return a.ai_prime * a.ai_prime - m * a.ai * a.ai;
    }
    let (a, b) = (airy(x), airy(y));
    (a.ai * b.ai_prime - a.ai_prime * b.ai) / (x - y)
}

/// Change of variables taking Gauss-Legendre nodes on `(-1, 1)` to `(s, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainMap {
    /// `x = s + L (1 + u) / (1 - u)`
    Rational { scale: f64 },
    /// `x = s - L ln((1 - u) / 2)`
    Exponential { scale: f64 },
}

impl Default for DomainMap {
    fn default() -> Self {
        DomainMap::Rational { scale: DEFAULT_MAP_SCALE }
    }
}

impl DomainMap {
    /// Image of `u` and the Jacobian `dx/du`.
    fn apply(self, s: f64, u: f64) -> (f64, f64) {
        match self {
            DomainMap::Rational { scale } => {
                let d = 1.0 - u;
                (s + scale * (1.0 + u) / d, 2.0 * scale / (d * d))
            }
            DomainMap::Exponential { scale } => {
                let d = 1.0 - u;
                (s - scale * (0.5 * d).ln(), scale / d)
            }
        }
    }
}

/// Symmetrised samples `√w_i K(x_i, x_j) √w_j` of the Airy kernel on `(s, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedKernel {
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `n × n`.
    pub matrix: Vec<f64>,
}

impl DiscretizedKernel {
    pub fn new(s: f64, n_nodes: usize, map: DomainMap) -> Result<Self> {
        if !s.is_finite() {
            return Err(invalid("s must be finite"));
        }
        if n_nodes < 8 {
            return Err(invalid("the Nyström oracle needs at least 8 nodes"));
        }
        let rule = gauss_legendre(n_nodes, -1.0, 1.0)?;
        let (nodes, weights): (Vec<f64>, Vec<f64>) = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| {
                let (x, jac) = map.apply(s, u);
                (x, w * jac)
            })
            .unzip();
        let pairs: Vec<_> = nodes.iter().map(|&x| airy(x)).collect();
        let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let n = n_nodes;
        let mut matrix = alloc::vec![0.0; n * n];
        for i in 0..n {
            let (xi, ai) = (nodes[i], pairs[i]);
            matrix[i * n + i] = roots[i] * roots[i] * (ai.ai_prime * ai.ai_prime - xi * ai.ai * ai.ai);
            for j in 0..i {
                let (xj, aj) = (nodes[j], pairs[j]);
                let k = if (xi - xj).abs() <= 1e-6 {
                    airy_kernel(xi, xj)
                } else {
                    (ai.ai * aj.ai_prime - ai.ai_prime * aj.ai) / (xi - xj)
                };
                let v = roots[i] * k * roots[j];
                matrix[i * n + j] = v;
                matrix[j * n + i] = v;
            }
        }
        Ok(DiscretizedKernel { s, nodes, weights, matrix })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// `det(I - λ K̂)`.
    pub fn det(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        if lambda == 0.0 {
            return Ok(1.0);
        }
        let n = self.size();
        let mut a: Vec<f64> = self.matrix.iter().map(|v| -lambda * v).collect();
        for i in 0..n {
            a[i * n + i] += 1.0;
        }
        lu_det(&mut a, n)
    }
}

/// Determinant by LU factorisation with partial pivoting (destroys `a`).
pub(crate) fn lu_det(a: &mut [f64], n: usize) -> Result<f64> {
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = f64::EPSILON * norm;
    let mut det = 1.0;
    for col in 0..n {
        let (mut best, mut row) = (a[col * n + col].abs(), col);
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                row = r;
            }
        }
        if !(best > threshold) {
            return Err(Error::Singular { column: col, pivot: best });
        }
        if row != col {
            for c in 0..n {
                a.swap(col * n + c, row * n + c);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        for r in col + 1..n {
            let f = a[r * n + col] / pivot;
            if f != 0.0 {
                for c in col + 1..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    Ok(det)
}

/// `det(I - λ K_Airy)` on `(s, ∞)` with the default rational map.
pub fn fredholm_det(s: f64, lambda: f64, n_nodes: usize) -> Result<f64> {
    DiscretizedKernel::new(s, n_nodes, DomainMap::default())?.det(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_origin() {
        // Ai'(0)^2 from the high-precision value of Ai'(0).
        assert!((airy_kernel(0.0, 0.0) - 0.06698748377966397).abs() < 1e-16);
    }

    #[test]
    fn diagonal_limit_matches_quotient() {
        for x in [-3.0, -0.4, 0.0, 1.7] {
            let near = (airy(x).ai * airy(x + 1e-7).ai_prime - airy(x).ai_prime * airy(x + 1e-7).ai) / -1e-7;
            assert!((near - airy_kernel(x, x)).abs() < 1e-6);
            assert!((airy_kernel(x, x + 1e-7) - airy_kernel(x, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn kernel_is_symmetric() {
        for (x, y) in [(-2.0, 1.0), (0.3, 4.0), (-7.5, -7.0)] {
            assert_eq!(airy_kernel(x, y), airy_kernel(y, x));
        }
    }

    #[test]
    fn matrix_is_symmetric_with_finite_diagonal() {
        let k = DiscretizedKernel::new(-3.0, 40, DomainMap::default()).unwrap();
        let n = k.size();
        for i in 0..n {
            assert!(k.matrix[i * n + i].is_finite());
            for j in 0..n {
                assert!((k.matrix[i * n + j] - k.matrix[j * n + i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(fredholm_det(-2.0, 0.0, 60).unwrap(), 1.0);
        assert!((fredholm_det(5.0, 1.0, 60).unwrap() - 1.0).abs() < 1e-8);
        assert!(fredholm_det(0.0, 1.0, 7).is_err());
    }

    #[test]
    fn self_convergence_at_minus_four() {
        let a = fredholm_det(-4.0, 1.0, 40).unwrap();
        let b = fredholm_det(-4.0, 1.0, 80).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn maps_agree() {
        for s in [-5.0, -1.0, 2.0] {
            let a = fredholm_det(s, 1.0, 80).unwrap();
            let b = DiscretizedKernel::new(s, 80, DomainMap::Exponential { scale: 3.0 })
                .unwrap()
                .det(1.0)
                .unwrap();
            assert!((a - b).abs() < 1e-10, "{s}: {a} {b}");
        }
    }

    #[test]
    fn nonincreasing_in_lambda() {
        for s in [-4.0, -1.0, 1.5] {
            let k = DiscretizedKernel::new(s, 60, DomainMap::default()).unwrap();
            let mut prev = f64::INFINITY;
            for j in 0..=10 {
                let d = k.det(j as f64 / 10.0).unwrap();
                assert!(d <= prev + 1e-15);
                prev = d;
            }
        }
    }
}
