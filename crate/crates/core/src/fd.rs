//! Finite-difference stencils in λ and Richardson extrapolation.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Weights `w[k][j]` such that `Σ_j w[k][j] f(x_j) ≈ f^(k)(z)` for `k <= max_order`.
pub fn fornberg_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = alloc::vec![alloc::vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Which side of λ = 1 a stencil samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StencilKind {
    /// Nodes `1, 1 - h, 1 - 2h, ...`; error expands in `h^2, h^3, ...`.
    Backward,
    /// Nodes `1 - p h, ..., 1 + p h`; error expands in `h^2, h^4, ...`.
    Central,
}

/// Unit-spacing derivative stencil of second-order accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub kind: StencilKind,
    pub order: usize,
    pub offsets: Vec<i32>,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn new(kind: StencilKind, order: usize) -> Self {
        let offsets: Vec<i32> = match kind {
            StencilKind::Backward => (0..=order as i32 + 1).map(|j| -j).collect(),
            StencilKind::Central => {
                let p = order.div_ceil(2).max(1) as i32;
                (-p..=p).collect()
            }
        };
        let xs: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let weights = fornberg_weights(0.0, &xs, order).swap_remove(order);
        Stencil { kind, order, offsets, weights }
    }

    /// Largest `|offset|`.
    pub fn reach(&self) -> i32 {
        self.offsets.iter().map(|o| o.abs()).max().unwrap_or(0)
    }

    /// Applies the stencil to samples `f(offset)` at spacing `h`.
    pub fn apply(&self, h: f64, mut f: impl FnMut(i32) -> f64) -> f64 {
        let sum: f64 = self
            .offsets
            .iter()
            .zip(&self.weights)
            .map(|(&o, &w)| if w == 0.0 { 0.0 } else { w * f(o) })
            .sum();
        sum / h.powi(self.order as i32)
    }
}

/// Spacings `h, h/2, h/4, ...` used for `levels` Richardson levels.
pub fn level_spacings(h: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|l| h / (1u32 << l) as f64).collect()
}

/// Error exponents removed by successive Richardson levels.
pub fn richardson_exponents(kind: StencilKind, levels: usize) -> Vec<i32> {
    (0..levels.saturating_sub(1) as i32)
        .map(|k| match kind {
            StencilKind::Backward => 2 + k,
            StencilKind::Central => 2 + 2 * k,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonEstimate {
    pub value: f64,
    /// Difference between the two most refined estimates of the last column.
    pub error: f64,
}

/// Extrapolates estimates at spacings `h, h/2, h/4, ...` (coarsest first),
/// removing error terms `h^p` for the given exponents in turn.
pub fn richardson(estimates: &[f64], exponents: &[i32]) -> RichardsonEstimate {
    assert!(!estimates.is_empty() && exponents.len() + 1 >= estimates.len());
    let mut column = estimates.to_vec();
    let mut error = f64::NAN;
    for &p in exponents.iter().take(estimates.len() - 1) {
        let factor = 2f64.powi(p);
        let next: Vec<f64> = column
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        error = (next[next.len() - 1] - column[column.len() - 1]).abs();
        column = next;
    }
    if estimates.len() == 1 {
        error = f64::NAN;
    }
    RichardsonEstimate { value: column[column.len() - 1], error }
}
