//! Edge distributions `F_β(s, m)` of the m-th largest eigenvalue, built from
//! λ-derivatives at λ = 1 of the generating determinants
//!
//! * `D2(s, λ) = exp(-I0(s, λ))`
//! * `D1(s, λ) = D2(s, λ̃) (λ - 1 - cosh μ̃ + √λ̃ sinh μ̃) / (λ - 2)`, `λ̃ = 2λ - λ²`
//! * `D4(s, λ) = D2(s, λ) cosh²(μ(s, λ) / 2)`
//!
//! via `F(s, m+1) = F(s, m) + (-1)^m / m! ∂^m G(s, 1)` with `F(s, 0) = 0`,
//! where `G` is `D2` for β = 2 and `D_β^{1/2}` for β = 1, 4.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_range, invalid, Error, Result};
use crate::fd::{level_spacings, richardson, richardson_exponents, Stencil, StencilKind};
use crate::grid::{gradient, MonotoneCubic};
use crate::painleve::{solve_q0, solve_q1, Component, PainleveState, SolverConfig};

/// Largest λ-derivative order the recurrence is certified for.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

/// Absolute tolerance on each recurrence term `∂^k G / k!`; a Richardson
/// error estimate above ten times this marks the derivative as unconverged.
pub const FD_TOLERANCE: f64 = 1e-6;

/// Symmetry class of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Beta {
    One,
    Two,
    Four,
}

impl Beta {
    pub const ALL: [Beta; 3] = [Beta::One, Beta::Two, Beta::Four];

    pub fn from_u8(beta: u8) -> Result<Beta> {
        match beta {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            4 => Ok(Beta::Four),
            _ => Err(invalid(alloc::format!("beta must be 1, 2 or 4 (got {beta})"))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_u8() as f64
    }

    /// Largest `m` for which `F_β(s, m)` is tabulated.
    pub fn m_max_cap(self) -> usize {
        match self {
            Beta::One => MAX_DERIVATIVE_ORDER,
            Beta::Two | Beta::Four => 2,
        }
    }
}

/// Functions of λ whose derivatives at λ = 1 feed the recurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Generator {
    D2,
    SqrtD2,
    SqrtD1,
    SqrtD4,
}

impl Generator {
    /// The generator differentiated by the recurrence for `beta`.
    pub fn recurrence(beta: Beta) -> Generator {
        match beta {
            Beta::One => Generator::SqrtD1,
            Beta::Two => Generator::D2,
            Beta::Four => Generator::SqrtD4,
        }
    }

    /// `D_β^{1/2}`.
    pub fn half_power(beta: Beta) -> Generator {
        match beta {
            Beta::One => Generator::SqrtD1,
            Beta::Two => Generator::SqrtD2,
            Beta::Four => Generator::SqrtD4,
        }
    }

    /// `D1` only needs solves at λ̃ <= 1 on both sides of λ = 1, so it is
    /// differentiated centrally; the others only exist for λ <= 1.
    pub fn stencil_kind(self) -> StencilKind {
        match self {
            Generator::SqrtD1 => StencilKind::Central,
            _ => StencilKind::Backward,
        }
    }
}

/// `λ̃ = 2λ - λ²`, written so that `λ̃(1 - δ) = λ̃(1 + δ)` whenever `1 ± δ` are exact.
pub fn lambda_tilde(lambda: f64) -> f64 {
    let d = 1.0 - lambda;
    1.0 - d * d
}

/// The solve parameter needed by stencil node `offset` at spacing `h`.
pub fn stencil_state_lambda(kind: StencilKind, offset: i32, h: f64) -> f64 {
    let d = offset as f64 * h;
    match kind {
        StencilKind::Backward => 1.0 + d,
        StencilKind::Central => 1.0 - d * d,
    }
}

/// Every λ a family must hold to differentiate `generators` up to `max_order`.
pub fn required_lambdas(config: &SolverConfig, generators: &[Generator], max_order: usize) -> Vec<f64> {
    let mut out = alloc::vec![1.0];
    for &g in generators {
        let kind = g.stencil_kind();
        for order in 1..=max_order {
            let st = Stencil::new(kind, order);
            for h in level_spacings(config.lambda_stencil_h, config.fd_richardson_levels) {
                out.extend(st.offsets.iter().map(|&o| stencil_state_lambda(kind, o, h)));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Anything that can hand out solved states by λ.
pub trait StateSource {
    fn state(&self, lambda: f64) -> Result<&PainleveState>;
}

impl StateSource for PainleveState {
    fn state(&self, lambda: f64) -> Result<&PainleveState> {
        if same_lambda(self.lambda, lambda) {
            Ok(self)
        } else {
            Err(Error::MissingState(lambda))
        }
    }
}

fn same_lambda(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON
}

/// Solved states for a set of λ values on a common grid; the λ = 1 member
/// carries `q1` when present.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFamily {
    config: SolverConfig,
    states: Vec<PainleveState>,
}

impl LambdaFamily {
    /// Assembles a family from states solved elsewhere (e.g. in parallel or from a cache).
    pub fn from_states(config: SolverConfig, mut states: Vec<PainleveState>) -> Result<Self> {
        config.validate()?;
        let grid = config.grid();
        if states.iter().any(|s| s.grid != grid) {
            return Err(invalid("all states must share the configured grid"));
        }
        states.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        states.dedup_by(|a, b| same_lambda(a.lambda, b.lambda));
        Ok(LambdaFamily { config, states })
    }

    /// Solves every requested λ sequentially, adding `q1` to the λ = 1 state.
    pub fn solve(config: SolverConfig, lambdas: &[f64]) -> Result<Self> {
        let states = lambdas
            .iter()
            .map(|&l| {
                let state = solve_q0(l, &config)?;
                if l == 1.0 {
                    solve_q1(&config, &state)
                } else {
                    Ok(state)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_states(config, states)
    }

    /// A family sufficient for tables of the given β up to `m_max`.
    pub fn for_tables(config: SolverConfig, betas: &[Beta], m_max: usize) -> Result<Self> {
        let generators: Vec<Generator> = betas
            .iter()
            .flat_map(|&b| [Generator::recurrence(b), Generator::half_power(b)])
            .collect();
        let lambdas = required_lambdas(&config, &generators, m_max.saturating_sub(1));
        Self::solve(config, &lambdas)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn states(&self) -> &[PainleveState] {
        &self.states
    }

    pub fn grid(&self) -> &[f64] {
        &self.base().expect("family is never empty").grid
    }

    /// The λ = 1 state, if present.
    pub fn base(&self) -> Result<&PainleveState> {
        self.state(1.0)
    }
}

impl StateSource for LambdaFamily {
    fn state(&self, lambda: f64) -> Result<&PainleveState> {
        let i = self.states.partition_point(|s| s.lambda < lambda - 4.0 * f64::EPSILON);
        match self.states.get(i) {
            Some(s) if same_lambda(s.lambda, lambda) => Ok(s),
            _ => Err(Error::MissingState(lambda)),
        }
    }
}

/// Where on the grid a quantity is wanted.
#[derive(Debug, Clone, Copy, PartialEq)]
enum At {
    Index(usize),
    Value(f64),
}

fn locate_s(state: &PainleveState, s: f64) -> Result<At> {
    let (lo, hi) = state.s_range();
    check_range("s", s, lo, hi)?;
    Ok(state.index_of(s).map_or(At::Value(s), At::Index))
}

fn sample(state: &PainleveState, component: Component, at: At) -> Result<f64> {
    match at {
        At::Index(i) => {
            let (values, _) = state.column(component)?;
            Ok(values[i])
        }
        At::Value(s) => state.interpolate(component, s),
    }
}

/// A generator value, or the value minus one when `shift` is set, from
/// `I0` and `μ` of the relevant state and `δ = λ - 1`. Shifting avoids
/// cancellation where the generator is close to 1; the unshifted form is
/// accurate where it is small.
fn generator_value(generator: Generator, i0: f64, mu: f64, delta: f64, shift: bool) -> f64 {
    let (e, base) = if shift {
        ((-0.5 * i0).exp_m1(), 1.0)
    } else {
        ((-0.5 * i0).exp(), 0.0)
    };
    match generator {
        Generator::D2 if shift => (-i0).exp_m1(),
        Generator::D2 => (-i0).exp(),
        Generator::SqrtD2 => e,
        Generator::SqrtD4 => {
            let quarter = (0.25 * mu).sinh();
            e * (0.5 * mu).cosh() + base * 2.0 * quarter * quarter
        }
        Generator::SqrtD1 => {
            // w = cosh(μ/2) - r sinh(μ/2) with r = √((1+δ)/(1-δ))
            let r = ((1.0 + delta) / (1.0 - delta)).sqrt();
            let sn = (0.5 * mu).sinh();
            let w = (-0.5 * mu).exp() - sn * (2.0 * delta / ((1.0 - delta) * (1.0 + r)));
            let quarter = (0.25 * mu).sinh();
            e * w + base * (2.0 * quarter * quarter - r * sn)
        }
    }
}

fn generator_at(
    source: &impl StateSource,
    generator: Generator,
    at: At,
    state_lambda: f64,
    delta: f64,
    shift: bool,
) -> Result<f64> {
    let state = source.state(state_lambda)?;
    let i0 = sample(state, Component::I0, at)?;
    let mu = sample(state, Component::J0, at)?;
    Ok(generator_value(generator, i0, mu, delta, shift))
}

/// `D2(s, λ) = exp(-∫_s^∞ (x - s) q(x, λ)² dx)` for `λ ∈ [0, 1]`.
pub fn d2(source: &impl StateSource, s: f64, lambda: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let state = source.state(lambda)?;
    Ok((-sample(state, Component::I0, locate_s(state, s)?)?).exp())
}

/// `μ(s, λ) = ∫_s^∞ q(x, λ) dx`, zero at λ = 0.
pub fn mu_at(source: &impl StateSource, s: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let state = source.state(lambda)?;
    sample(state, Component::J0, locate_s(state, s)?)
}

/// `D1(s, λ)` for `λ ∈ [0, 2)`; needs the state at `λ̃ = 2λ - λ²`.
pub fn d1(source: &impl StateSource, s: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && (0.0..2.0).contains(&lambda)) {
        return Err(Error::OutOfRange { what: "lambda", value: lambda, lo: 0.0, hi: 2.0 });
    }
    let lt = lambda_tilde(lambda);
    let d = d2(source, s, lt)?;
    let mu = mu_at(source, s, lt)?;
    Ok(d * (lambda - 1.0 - mu.cosh() + lt.sqrt() * mu.sinh()) / (lambda - 2.0))
}

/// `D4(s, λ) = D2(s, λ) cosh²(μ(s, λ) / 2)` for `λ ∈ [0, 1]`.
pub fn d4(source: &impl StateSource, s: f64, lambda: f64) -> Result<f64> {
    let d = d2(source, s, lambda)?;
    let c = (0.5 * mu_at(source, s, lambda)?).cosh();
    Ok(d * c * c)
}

/// How a λ-derivative is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DerivativeMethod {
    /// Closed forms from the `q1` solution (orders 0 and 1 only).
    Analytic,
    /// Richardson-extrapolated stencils in λ.
    FiniteDifference,
    /// Analytic where available, finite differences above.
    Auto,
}

/// `∂^k G / ∂λ^k` at λ = 1 for `k = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaDerivatives {
    pub generator: Generator,
    pub s: f64,
    pub order: usize,
    pub values: Vec<f64>,
    /// Richardson error estimates (zero for closed forms).
    pub error_estimates: Vec<f64>,
    /// Concrete method per order (`Analytic` or `FiniteDifference`).
    pub methods: Vec<DerivativeMethod>,
    pub converged: bool,
}

/// λ-derivatives of `D_β^{1/2}` at λ = 1.
pub fn lambda_derivs(
    family: &LambdaFamily,
    beta: Beta,
    s: f64,
    order: usize,
    method: DerivativeMethod,
) -> Result<LambdaDerivatives> {
    generator_derivs(family, Generator::half_power(beta), s, order, method)
}

/// λ-derivatives at λ = 1 of any generator.
pub fn generator_derivs(
    family: &LambdaFamily,
    generator: Generator,
    s: f64,
    order: usize,
    method: DerivativeMethod,
) -> Result<LambdaDerivatives> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(invalid(alloc::format!("derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")));
    }
    if method == DerivativeMethod::Analytic && order > 1 {
        return Err(invalid("closed forms exist only up to order 1"));
    }
    let base = family.base()?;
    let at = locate_s(base, s)?;
    derivs_at(family, generator, at, s, order, method)
}

fn derivs_at(
    family: &LambdaFamily,
    generator: Generator,
    at: At,
    s: f64,
    order: usize,
    method: DerivativeMethod,
) -> Result<LambdaDerivatives> {
    let base = family.base()?;
    let has_q1 = base.first_variation.is_some();
    let closed_first = match method {
        DerivativeMethod::Analytic => true,
        DerivativeMethod::Auto => has_q1,
        DerivativeMethod::FiniteDifference => false,
    };
    if generator == Generator::SqrtD2 && order >= 1 && !(order == 1 && closed_first) {
        let d = derivs_at(family, Generator::D2, at, s, order, method)?;
        return Ok(series_sqrt(&d));
    }
    let mut values = Vec::with_capacity(order + 1);
    let mut errors = Vec::with_capacity(order + 1);
    let mut methods = Vec::with_capacity(order + 1);
    let mut converged = true;
    let value = generator_at(family, generator, at, 1.0, 0.0, false)?;
    let shift = value > 0.5;
    values.push(value);
    errors.push(0.0);
    methods.push(DerivativeMethod::Analytic);
    let config = family.config();
    let kind = generator.stencil_kind();
    let spacings = level_spacings(config.lambda_stencil_h, config.fd_richardson_levels);
    let exponents = richardson_exponents(kind, spacings.len());
    let mut factorial = 1.0;
    for k in 1..=order {
        factorial *= k as f64;
        if k == 1 && closed_first {
            values.push(first_derivative(base, generator, at)?);
            errors.push(0.0);
            methods.push(DerivativeMethod::Analytic);
            continue;
        }
        let stencil = Stencil::new(kind, k);
        let estimates = spacings
            .iter()
            .map(|&h| {
                let mut sum = 0.0;
                for (&o, &w) in stencil.offsets.iter().zip(&stencil.weights) {
                    if w != 0.0 {
                        let key = stencil_state_lambda(kind, o, h);
                        sum += w * generator_at(family, generator, at, key, o as f64 * h, shift)?;
                    }
                }
                Ok(sum / h.powi(k as i32))
            })
            .collect::<Result<Vec<f64>>>()?;
        let r = richardson(&estimates, &exponents);
        let err = if r.error.is_nan() { 0.0 } else { r.error };
        converged &= err / factorial <= 10.0 * FD_TOLERANCE;
        values.push(r.value);
        errors.push(err);
        methods.push(DerivativeMethod::FiniteDifference);
    }
    Ok(LambdaDerivatives { generator, s, order, values, error_estimates: errors, methods, converged })
}

/// Derivatives of `√D` from those of `D` through the Taylor coefficients
/// `g_0 = √d_0`, `g_n = (d_n - Σ_{k=1}^{n-1} g_k g_{n-k}) / (2 g_0)`.
/// `D2^{1/2}` has a square-root branch point just beyond λ = 1 where `D2`
/// is small, so stencils are applied to the entire function `D2` instead.
fn series_sqrt(d: &LambdaDerivatives) -> LambdaDerivatives {
    let n = d.values.len();
    let mut factorial = alloc::vec![1.0; n];
    for k in 1..n {
        factorial[k] = factorial[k - 1] * k as f64;
    }
    let coeff: Vec<f64> = d.values.iter().zip(&factorial).map(|(v, f)| v / f).collect();
    let mut g = alloc::vec![0.0; n];
    g[0] = coeff[0].max(0.0).sqrt();
    let mut values = alloc::vec![g[0]; 1];
    let mut errors = alloc::vec![0.0; 1];
    for k in 1..n {
        let cross: f64 = (1..k).map(|j| g[j] * g[k - j]).sum();
        g[k] = (coeff[k] - cross) / (2.0 * g[0]);
        values.push(g[k] * factorial[k]);
        errors.push(d.error_estimates[k] / (2.0 * g[0]));
    }
    let converged = errors.iter().zip(&factorial).all(|(e, f)| e / f <= 10.0 * FD_TOLERANCE);
    LambdaDerivatives {
        generator: Generator::SqrtD2,
        s: d.s,
        order: d.order,
        values,
        error_estimates: errors,
        methods: d.methods.clone(),
        converged,
    }
}

/// Closed-form first λ-derivatives at λ = 1 from the `q1` solution, using
/// `∂λ I0 = 2 I1` and `∂λ μ = ∫ q1`.
fn first_derivative(base: &PainleveState, generator: Generator, at: At) -> Result<f64> {
    let i0 = sample(base, Component::I0, at)?;
    let mu = sample(base, Component::J0, at)?;
    let half = (-0.5 * i0).exp();
    let (c, sn) = ((0.5 * mu).cosh(), (0.5 * mu).sinh());
    Ok(match generator {
        Generator::SqrtD1 => -half * sn,
        Generator::D2 => -2.0 * sample(base, Component::I1, at)? * half * half,
        Generator::SqrtD2 => -sample(base, Component::I1, at)? * half,
        Generator::SqrtD4 => {
            let i1 = sample(base, Component::I1, at)?;
            let mu1 = sample(base, Component::Mu1, at)?;
            half * (-i1 * c + 0.5 * mu1 * sn)
        }
    })
}

fn check_m(beta: Beta, m: usize) -> Result<()> {
    if m == 0 || m > beta.m_max_cap() {
        return Err(invalid(alloc::format!(
            "m must lie in 1..={} for beta = {}",
            beta.m_max_cap(),
            beta.as_u8()
        )));
    }
    Ok(())
}

fn recurrence_sum(d: &LambdaDerivatives) -> f64 {
    let mut total = 0.0;
    let mut factorial = 1.0;
    for (k, v) in d.values.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * v / factorial;
    }
    total
}

/// `F_β(s, m)`: probability that the m-th largest rescaled eigenvalue is `<= s`.
pub fn f_cdf(family: &LambdaFamily, beta: Beta, m: usize, s: f64, method: DerivativeMethod) -> Result<f64> {
    check_m(beta, m)?;
    let d = generator_derivs(family, Generator::recurrence(beta), s, m - 1, method)?;
    Ok(recurrence_sum(&d))
}

/// `F_4(s, m)` through the interlacing identity `F_4(s, m) = F_1(s, 2m)`.
pub fn f_cdf_interlaced(family: &LambdaFamily, m: usize, s: f64, method: DerivativeMethod) -> Result<f64> {
    check_m(Beta::Four, m)?;
    f_cdf(family, Beta::One, 2 * m, s, method)
}

/// Density `f_β(s, m) = ∂_s F_β(s, m)`: closed form for `m = 1`, centered
/// differences of the cdf with the grid spacing otherwise.
pub fn f_pdf(family: &LambdaFamily, beta: Beta, m: usize, s: f64, method: DerivativeMethod) -> Result<f64> {
    check_m(beta, m)?;
    let base = family.base()?;
    let at = locate_s(base, s)?;
    if m == 1 {
        let q = sample(base, Component::Q0, at)?;
        let mass = -sample(base, Component::I0Prime, at)?;
        let mu = sample(base, Component::J0, at)?;
        let f = f_cdf(family, beta, 1, s, method)?;
        return Ok(first_density(beta, f, q, mass, mu));
    }
    let h = base.step();
    let (lo, hi) = base.s_range();
    let (a, b) = ((s - h).max(lo), (s + h).min(hi));
    Ok((f_cdf(family, beta, m, b, method)? - f_cdf(family, beta, m, a, method)?) / (b - a))
}

fn first_density(beta: Beta, f: f64, q: f64, mass: f64, mu: f64) -> f64 {
    match beta {
        Beta::Two => f * mass,
        Beta::One => 0.5 * f * (mass + q),
        Beta::Four => 0.5 * f * (mass - q * (0.5 * mu).tanh()),
    }
}

/// `F_β(s, m)` and `f_β(s, m)` on the state grid for `m = 1..=m_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionTable {
    pub beta: Beta,
    pub m_max: usize,
    pub grid: Vec<f64>,
    /// `cdf[m - 1][i] = F_β(grid[i], m)`
    pub cdf: Vec<Vec<f64>>,
    pub pdf: Vec<Vec<f64>>,
    /// Largest Richardson error estimate of `∂^k G / k!` over the grid, per order `k`.
    pub derivative_error: Vec<f64>,
    /// Grid points whose finite-difference derivatives failed the convergence test.
    pub unconverged_points: usize,
}

impl DistributionTable {
    pub fn build(family: &LambdaFamily, beta: Beta, m_max: usize, method: DerivativeMethod) -> Result<Self> {
        check_m(beta, m_max)?;
        let base = family.base()?;
        let grid = base.grid.clone();
        let n = grid.len();
        let generator = Generator::recurrence(beta);
        let mut cdf = alloc::vec![alloc::vec![0.0; n]; m_max];
        let mut derivative_error = alloc::vec![0.0f64; m_max];
        let mut unconverged_points = 0;
        for (i, &s) in grid.iter().enumerate() {
            let d = derivs_at(family, generator, At::Index(i), s, m_max - 1, method)?;
            unconverged_points += usize::from(!d.converged);
            let mut total = 0.0;
            let mut factorial = 1.0;
            for k in 0..m_max {
                if k > 0 {
                    factorial *= k as f64;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * d.values[k] / factorial;
                cdf[k][i] = total;
                derivative_error[k] = derivative_error[k].max(d.error_estimates[k] / factorial);
            }
        }
        let h = base.step();
        let mut pdf = Vec::with_capacity(m_max);
        for (k, column) in cdf.iter().enumerate() {
            if k == 0 {
                pdf.push(
                    (0..n)
                        .map(|i| {
                            let mass = -base.i0_prime[i];
                            first_density(beta, column[i], base.q0[i], mass, base.j0[i])
                        })
                        .collect(),
                );
            } else {
                pdf.push(gradient(column, h));
            }
        }
        Ok(DistributionTable { beta, m_max, grid, cdf, pdf, derivative_error, unconverged_points })
    }

    fn check_column(&self, m: usize) -> Result<usize> {
        if m == 0 || m > self.m_max {
            return Err(invalid(alloc::format!("m must lie in 1..={}", self.m_max)));
        }
        Ok(m - 1)
    }

    fn interpolant(&self, m: usize) -> Result<MonotoneCubic> {
        let k = self.check_column(m)?;
        Ok(MonotoneCubic::new(self.grid.clone(), self.cdf[k].clone(), Some(self.pdf[k].clone())))
    }

    /// `F_β(s, m)` between grid points by shape-preserving cubic interpolation.
    pub fn cdf_at(&self, m: usize, s: f64) -> Result<f64> {
        let spline = self.interpolant(m)?;
        let (lo, hi) = spline.domain();
        check_range("s", s, lo, hi)?;
        Ok(spline.eval(s))
    }

    /// Trapezoidal integral of the density column over the grid.
    pub fn pdf_mass(&self, m: usize) -> Result<f64> {
        let k = self.check_column(m)?;
        let p = &self.pdf[k];
        let h = self.grid[1] - self.grid[0];
        Ok(h * (p.iter().sum::<f64>() - 0.5 * (p[0] + p[p.len() - 1])))
    }

    /// Grid point of the density maximum.
    pub fn mode(&self, m: usize) -> Result<f64> {
        let k = self.check_column(m)?;
        let (i, _) = self.pdf[k]
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        Ok(self.grid[i])
    }

    /// The `s` with `F_β(s, m) = p`, to within 1e-12 in probability.
    pub fn quantile(&self, m: usize, p: f64) -> Result<f64> {
        let spline = self.interpolant(m)?;
        let k = m - 1;
        let column = &self.cdf[k];
        let (lo_p, hi_p) = (column[0], column[column.len() - 1]);
        if !(p > 0.0 && p < 1.0) || p < lo_p || p > hi_p {
            return Err(Error::OutOfSupport { p, lo: lo_p, hi: hi_p });
        }
        let upper = column.partition_point(|&v| v < p).min(column.len() - 1).max(1);
        let (mut a, mut b) = (self.grid[upper - 1], self.grid[upper]);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let v = spline.eval(mid);
            if (v - p).abs() <= 1e-13 || b - a <= 1e-15 {
                return Ok(mid);
            }
            if v < p {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Convenience wrapper matching [`DistributionTable::quantile`].
pub fn quantile(table: &DistributionTable, m: usize, p: f64) -> Result<f64> {
    table.quantile(m, p)
}
