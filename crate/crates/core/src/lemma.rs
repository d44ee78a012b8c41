//! The coefficient lemma for `√(λ/(2-λ))` at λ = 1 and the identity satisfied
//! by `f(s, λ) = 1 - √(λ/(2-λ)) tanh(μ(s, λ̃)/2)`, which together give the
//! interlacing of β = 1 and β = 4.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_rational::Ratio;

use crate::distributions::{mu_at, stencil_state_lambda, LambdaFamily};
use crate::error::{invalid, Result};
use crate::fd::{level_spacings, richardson, richardson_exponents, Stencil, StencilKind};

/// Residual tolerances for `n = 0` and `n = 1`.
pub const FLEMMA_TOLERANCE: [f64; 2] = [1e-4, 5e-3];

/// Largest index for which `a_j` fits `i128` with room to spare.
pub const LEMMA_MAX_INDEX: usize = 20;

pub type Rational = Ratio<i128>;

/// `a_j = d^j/dλ^j √(λ/(2-λ))` at λ = 1 and `b_j = a_j / j!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaSequence {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

/// `a_0 = 1`, `a_j = (j-1) a_{j-1}` for even `j`, `a_j = j a_{j-1}` for odd `j`.
pub fn lemma_a_seq(j_max: usize) -> Result<LemmaSequence> {
    if j_max > LEMMA_MAX_INDEX {
        return Err(invalid(alloc::format!("j_max must be at most {LEMMA_MAX_INDEX}")));
    }
    let mut a = alloc::vec![Rational::from_integer(1)];
    let mut b = alloc::vec![Rational::from_integer(1)];
    let mut factorial: i128 = 1;
    for j in 1..=j_max as i128 {
        let factor = if j % 2 == 0 { j - 1 } else { j };
        let next = a[a.len() - 1] * factor;
        factorial *= j;
        b.push(next / factorial);
        a.push(next);
    }
    Ok(LemmaSequence { a, b })
}

/// Taylor coefficients of `√((1+x)/(1-x))` at `x = 0` by exact power-series
/// arithmetic: `(1+x)/(1-x) = 1 + 2x + 2x² + ...`, then the series square root.
pub fn sqrt_ratio_taylor(j_max: usize) -> Result<Vec<Rational>> {
    if j_max > LEMMA_MAX_INDEX {
        return Err(invalid(alloc::format!("j_max must be at most {LEMMA_MAX_INDEX}")));
    }
    let u = |k: usize| Rational::from_integer(if k == 0 { 1 } else { 2 });
    let mut g: Vec<Rational> = alloc::vec![Rational::from_integer(1)];
    for n in 1..=j_max {
        let cross = (1..n).fold(Rational::from_integer(0), |acc, k| acc + g[k] * g[n - k]);
        g.push((u(n) - cross) / 2);
    }
    Ok(g)
}

/// Outcome of a numerical check of the `f(s, λ)` identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaResidual {
    pub s: f64,
    pub n: usize,
    pub residual: f64,
    /// Largest Richardson error estimate among the derivatives used.
    pub error_estimate: f64,
    pub converged: bool,
}

/// `f(s, 1 + δ)`, using the state at `λ̃ = 1 - δ²`.
fn f_value(family: &LambdaFamily, s: f64, delta: f64, state_lambda: f64) -> Result<f64> {
    let r = ((1.0 + delta) / (1.0 - delta)).sqrt();
    Ok(1.0 - r * (0.5 * mu_at(family, s, state_lambda)?).tanh())
}

/// `|∂^{2n} f - ∂^{2n+1} f / (2n+1) - δ_{n0}|` at λ = 1 for `n ∈ {0, 1}`, by
/// Richardson-extrapolated central stencils in λ (`λ̃ <= 1` on both sides).
pub fn flemma_check(family: &LambdaFamily, s: f64, n: usize) -> Result<LemmaResidual> {
    if n > 1 {
        return Err(invalid("the identity is checked for n = 0 and n = 1 only"));
    }
    let config = family.config();
    let kind = StencilKind::Central;
    let spacings = level_spacings(config.lambda_stencil_h, config.fd_richardson_levels);
    let exponents = richardson_exponents(kind, spacings.len());
    let derivative = |order: usize| -> Result<(f64, f64)> {
        if order == 0 {
            return Ok((f_value(family, s, 0.0, 1.0)?, 0.0));
        }
        let stencil = Stencil::new(kind, order);
        let estimates = spacings
            .iter()
            .map(|&h| {
                let mut sum = 0.0;
                for (&o, &w) in stencil.offsets.iter().zip(&stencil.weights) {
                    if w != 0.0 {
                        let key = stencil_state_lambda(kind, o, h);
                        sum += w * f_value(family, s, o as f64 * h, key)?;
                    }
                }
                Ok(sum / h.powi(order as i32))
            })
            .collect::<Result<Vec<f64>>>()?;
        let r = richardson(&estimates, &exponents);
        Ok((r.value, if r.error.is_nan() { 0.0 } else { r.error }))
    };
    let (even, e0) = derivative(2 * n)?;
    let (odd, e1) = derivative(2 * n + 1)?;
    let delta = if n == 0 { 1.0 } else { 0.0 };
    let residual = (even - odd / (2 * n + 1) as f64 - delta).abs();
    let error_estimate = e0.max(e1);
    Ok(LemmaResidual { s, n, residual, error_estimate, converged: error_estimate <= FLEMMA_TOLERANCE[n] })
}
