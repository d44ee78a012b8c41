//! The Painleve II family `q'' = s q + 2 q^3`, `q(s, λ) ~ √λ Ai(s)` as
//! `s → ∞`, its λ-derivative `q1` at λ = 1, and the accumulated integrals
//! the distribution functions are built from.
//!
//! Each solve runs in two phases. An adaptive Runge-Kutta sweep from the
//! right end produces a trial solution, which a Newton iteration on the
//! Numerov discretisation then relaxes on a fixed fine mesh with Dirichlet
//! data at both ends. Integrals are accumulated from the right with a
//! fourth-order rule and continued past `s_right` with Airy tail integrals.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::error::{check_range, invalid, Error, Result};
use crate::grid::{hermite5, locate, tail_integrals, uniform_grid, MonotoneCubic};
use crate::ode::{dopri5, StepStats, Tolerance};
use crate::special::{airy, airy_tail};

/// Numeric settings shared by every solve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    pub s_right: f64,
    pub s_left: f64,
    /// Left of this point the λ = 1 solution is replaced by its asymptotic series.
    pub patch_point: f64,
    pub rk_atol: f64,
    pub rk_rtol: f64,
    /// Points of the stored output grid.
    pub grid_points: usize,
    /// Points of the relaxation mesh; must refine the output grid by an integer factor.
    pub relaxation_mesh_size: usize,
    pub max_relaxation_iters: usize,
    /// Newton stops once the largest correction is below this, relative to `1 + max|q|`.
    pub relaxation_tol: f64,
    pub lambda_stencil_h: f64,
    pub fd_richardson_levels: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            s_right: 6.0,
            s_left: -10.0,
            patch_point: -8.0,
            rk_atol: 1e-10,
            rk_rtol: 1e-10,
            grid_points: 1601,
            relaxation_mesh_size: 3201,
            max_relaxation_iters: 50,
            relaxation_tol: 1e-13,
            lambda_stencil_h: 0.05,
            fd_richardson_levels: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.s_right,
            self.s_left,
            self.patch_point,
            self.rk_atol,
            self.rk_rtol,
            self.relaxation_tol,
            self.lambda_stencil_h,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("solver settings must be finite"));
        }
        if !(self.s_left < self.patch_point && self.patch_point < 0.0 && self.s_right > 0.0) {
            return Err(invalid("need s_left < patch_point < 0 < s_right"));
        }
        if self.patch_point > -6.0 {
            return Err(invalid("patch_point must be <= -6 (asymptotic series needs t >= 12)"));
        }
        if self.rk_atol <= 0.0 || self.rk_rtol <= 0.0 || self.relaxation_tol <= 0.0 {
            return Err(invalid("tolerances must be positive"));
        }
        if self.grid_points < 4 {
            return Err(invalid("grid_points must be at least 4"));
        }
        if self.relaxation_mesh_size < self.grid_points
            || (self.relaxation_mesh_size - 1) % (self.grid_points - 1) != 0
        {
            return Err(invalid("relaxation_mesh_size - 1 must be a multiple of grid_points - 1"));
        }
        if self.max_relaxation_iters == 0 {
            return Err(invalid("max_relaxation_iters must be positive"));
        }
        if !(self.lambda_stencil_h > 0.0 && self.lambda_stencil_h <= 0.2) {
            return Err(invalid("lambda_stencil_h must lie in (0, 0.2]"));
        }
        if !(1..=4).contains(&self.fd_richardson_levels) {
            return Err(invalid("fd_richardson_levels must lie in 1..=4"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.s_left, self.s_right, self.grid_points)
    }

    pub fn grid_step(&self) -> f64 {
        (self.s_right - self.s_left) / (self.grid_points - 1) as f64
    }

    fn refinement(&self) -> usize {
        (self.relaxation_mesh_size - 1) / (self.grid_points - 1)
    }
}

/// Solver bookkeeping kept alongside each state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub rk_steps: usize,
    pub rk_rejected: usize,
    pub relaxation_iterations: usize,
    pub last_correction: f64,
}

/// `q1 = ∂q/∂λ` at λ = 1 and its integrals, all on the state grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FirstVariation {
    pub q1: Vec<f64>,
    pub q1_prime: Vec<f64>,
    /// ∫_s^∞ (x - s) q0 q1
    pub i1: Vec<f64>,
    pub i1_prime: Vec<f64>,
    /// ∫_s^∞ q0 q1
    pub j1: Vec<f64>,
    /// ∫_s^∞ q1, the λ-derivative of μ at λ = 1
    pub mu1: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// A solved member `q(·, λ)` of the family on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PainleveState {
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub q0: Vec<f64>,
    pub q0_prime: Vec<f64>,
    /// ∫_s^∞ (x - s) q^2
    pub i0: Vec<f64>,
    pub i0_prime: Vec<f64>,
    /// ∫_s^∞ q, i.e. μ(s, λ)
    pub j0: Vec<f64>,
    pub first_variation: Option<FirstVariation>,
    /// Left of this point the columns hold asymptotic-series values.
    pub patched_below: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Stored columns of a [`PainleveState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Q0,
    Q0Prime,
    I0,
    I0Prime,
    J0,
    Q1,
    Q1Prime,
    I1,
    I1Prime,
    J1,
    Mu1,
}

/// Discretisation used by [`PainleveState::ode_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualStencil {
    /// `(q[i+1] - 2q[i] + q[i-1]) / h^2 - g[i]`, second order.
    Centered,
    /// Same second difference against `(g[i-1] + 10 g[i] + g[i+1]) / 12`, fourth order.
    Numerov,
}

impl PainleveState {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.grid[self.len() - 1] - self.grid[0]) / (self.len() - 1) as f64
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.len() - 1])
    }

    /// Index of the grid point nearest to `s`, if `s` lies on the grid.
    pub fn index_of(&self, s: f64) -> Option<usize> {
        let (lo, hi) = self.s_range();
        if !(lo..=hi).contains(&s) {
            return None;
        }
        let i = ((s - lo) / self.step()).round() as usize;
        ((self.grid[i] - s).abs() <= 1e-9 * self.step()).then_some(i)
    }

    /// Values and exact s-derivatives of a stored column.
    pub fn column(&self, component: Component) -> Result<(&[f64], Vec<f64>)> {
        let (s, q) = (&self.grid, &self.q0);
        let fv = || {
            self.first_variation
                .as_ref()
                .ok_or_else(|| invalid("state carries no q1 solution"))
        };
        let zip = |f: &dyn Fn(usize) -> f64| (0..self.len()).map(f).collect::<Vec<f64>>();
        Ok(match component {
            Component::Q0 => (&self.q0, self.q0_prime.clone()),
            Component::Q0Prime => (&self.q0_prime, zip(&|i| s[i] * q[i] + 2.0 * q[i].powi(3))),
            Component::I0 => (&self.i0, self.i0_prime.clone()),
            Component::I0Prime => (&self.i0_prime, zip(&|i| q[i] * q[i])),
            Component::J0 => (&self.j0, zip(&|i| -q[i])),
            Component::Q1 => (&fv()?.q1, fv()?.q1_prime.clone()),
            Component::Q1Prime => {
                let q1 = &fv()?.q1;
                (&fv()?.q1_prime, zip(&|i| (s[i] + 6.0 * q[i] * q[i]) * q1[i]))
            }
            Component::I1 => (&fv()?.i1, fv()?.i1_prime.clone()),
            Component::I1Prime => {
                let q1 = &fv()?.q1;
                (&fv()?.i1_prime, zip(&|i| q[i] * q1[i]))
            }
            Component::J1 => {
                let q1 = &fv()?.q1;
                (&fv()?.j1, zip(&|i| -q[i] * q1[i]))
            }
            Component::Mu1 => {
                let q1 = &fv()?.q1;
                (&fv()?.mu1, zip(&|i| -q1[i]))
            }
        })
    }

    /// Shape-preserving cubic interpolation of a stored column.
    pub fn interpolate(&self, component: Component, s: f64) -> Result<f64> {
        let (lo, hi) = self.s_range();
        check_range("s", s, lo, hi)?;
        let (values, slopes) = self.column(component)?;
        Ok(MonotoneCubic::new(self.grid.clone(), values.to_vec(), Some(slopes)).eval(s))
    }

    /// Largest ODE residual of `q0` over interior grid triples of the solved
    /// (unpatched) part, scaled by `1 + |q0|`.
    pub fn ode_residual(&self, stencil: ResidualStencil) -> f64 {
        let h = self.step();
        let g = |i: usize| self.grid[i] * self.q0[i] + 2.0 * self.q0[i].powi(3);
        let first = match self.patched_below {
            Some(p) => self.grid.iter().position(|&s| s >= p - 1e-9 * h).unwrap_or(0) + 1,
            None => 1,
        };
        (first..self.len() - 1)
            .map(|i| {
                let d2 = (self.q0[i + 1] - 2.0 * self.q0[i] + self.q0[i - 1]) / (h * h);
                let rhs = match stencil {
                    ResidualStencil::Centered => g(i),
                    ResidualStencil::Numerov => (g(i - 1) + 10.0 * g(i) + g(i + 1)) / 12.0,
                };
                (d2 - rhs).abs() / (1.0 + self.q0[i].abs())
            })
            .fold(0.0, f64::max)
    }
}

/// μ(s, λ) = ∫_s^∞ q(x, λ) dx by monotone cubic interpolation of the stored column.
pub fn mu(state: &PainleveState, s: f64) -> Result<f64> {
    state.interpolate(Component::J0, s)
}

/// How far right of `s_right` the boundary data is started.
const BOUNDARY_LEAD: f64 = 4.0;
const EDGE_RTOL: f64 = 1e-14;

const Q0_SERIES: [f64; 5] = [1.0, -1.0, -73.0 / 2.0, -10657.0 / 2.0, -13912277.0 / 8.0];
const Q1_SERIES: [f64; 5] = [
    1.0,
    17.0 / 24.0,
    1513.0 / 1152.0,
    850193.0 / 82944.0,
    -407117521.0 / 7962624.0,
];

fn check_t(t: f64) -> Result<()> {
    check_range("t", t, 12.0, f64::INFINITY)
}

/// The λ = 1 solution at `s = -t/2` from its expansion at -∞, with its
/// `s`-derivative. Returns `(q0, dq0/ds)`.
pub fn q0_left_asymptotic(t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let u = t.powi(-3);
    let (mut p, mut dp, mut uk) = (0.0, 0.0, 1.0);
    for (k, &c) in Q0_SERIES.iter().enumerate() {
        p += c * uk;
        dp += -3.0 * k as f64 * c * uk / t;
        uk *= u;
    }
    let root = t.sqrt();
    let value = 0.5 * root * p;
    let d_dt = 0.25 / root * p + 0.5 * root * dp;
    Ok((value, -2.0 * d_dt))
}

/// `q1 = ∂q/∂λ` at λ = 1, at `s = -t/2`, from its expansion at -∞.
pub fn q1_left_asymptotic(t: f64) -> Result<f64> {
    q1_series(t).map(|(v, _)| v)
}

/// `(q1, dq1/ds)` at `s = -t/2`.
pub(crate) fn q1_series(t: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let exponent = t.powf(1.5) / 3.0;
    if exponent > 700.0 {
        return Err(Error::Overflow(t));
    }
    let u = t.powf(-1.5);
    let (mut p, mut dp, mut uk) = (0.0, 0.0, 1.0);
    for (k, &c) in Q1_SERIES.iter().enumerate() {
        p += c * uk;
        dp += -1.5 * k as f64 * c * uk / t;
        uk *= u;
    }
    let prefactor = exponent.exp() / (2.0 * (2.0 * core::f64::consts::PI).sqrt() * t.powf(0.25));
    let value = prefactor * p;
    let d_dt = value * (0.5 * t.sqrt() - 0.25 / t) + prefactor * dp;
    Ok((value, -2.0 * d_dt))
}

/// Solves for `q(·, λ)` with `0 <= λ <= 1` and its integrals.
pub fn solve_q0(lambda: f64, config: &SolverConfig) -> Result<PainleveState> {
    config.validate()?;
    check_range("lambda", lambda, 0.0, 1.0)?;
    let grid = config.grid();
    let n = grid.len();
    if lambda == 0.0 {
        let zeros = alloc::vec![0.0; n];
        return Ok(PainleveState {
            lambda,
            grid,
            q0: zeros.clone(),
            q0_prime: zeros.clone(),
            i0: zeros.clone(),
            i0_prime: zeros.clone(),
            j0: zeros,
            first_variation: None,
            patched_below: None,
            diagnostics: Diagnostics::default(),
        });
    }
    let mesh = uniform_grid(config.s_left, config.s_right, config.relaxation_mesh_size);
    let m = mesh.len();
    let h = mesh[1] - mesh[0];
    let root = lambda.sqrt();
    let patched = lambda == 1.0;
    let patch_index = locate(&mesh, config.patch_point + 0.5 * h);

    // Phase 1: trial solution, right to left.
    let mut q = alloc::vec![0.0; m];
    let mut diagnostics = Diagnostics::default();
    let tol = Tolerance { atol: config.rk_atol, rtol: config.rk_rtol };
    let mut stats = StepStats::default();
    let mut rhs = |s: f64, y: &[f64; 2]| [y[1], s * y[0] + 2.0 * y[0] * y[0] * y[0]];
    let mut step = h;
    let edge = edge_data(lambda, config, &mut step, &mut stats)?;
    let mut y = [edge[0], edge[1]];
    let edge_slope = y[1];
    q[m - 1] = y[0];
    let stop = if patched { patch_index } else { 0 };
    let mut reached = m - 1;
    for i in (stop..m - 1).rev() {
        match dopri5(&mut rhs, mesh[i + 1], y, mesh[i], tol, &mut step, &mut stats) {
            Ok(next) if next[0].abs() < 1e3 => {
                y = next;
                q[i] = y[0];
                reached = i;
            }
            Ok(_) | Err(_) if patched => break,
            Ok(_) => {
                return Err(Error::Integration { at: mesh[i], reason: "trial solution left the bounded family" })
            }
            Err(e) => return Err(e),
        }
    }
    diagnostics.rk_steps = stats.accepted;
    diagnostics.rk_rejected = stats.rejected;
    if patched {
        for i in 0..reached {
            q[i] = q0_left_asymptotic(-2.0 * mesh[i])?.0;
        }
    }

    // Phase 2: Numerov relaxation with Dirichlet data at both ends.
    let (iterations, correction) = relax(&mesh, &mut q, config)?;
    diagnostics.relaxation_iterations = iterations;
    diagnostics.last_correction = correction;

    let g: Vec<f64> = mesh.iter().zip(&q).map(|(s, v)| s * v + 2.0 * v * v * v).collect();
    let g_tail = tail_integrals(&g, h);
    let mut qp: Vec<f64> = g_tail.iter().map(|gt| edge_slope - gt).collect();
    if patched {
        for i in 0..patch_index {
            let (v, d) = q0_left_asymptotic(-2.0 * mesh[i])?;
            q[i] = v;
            qp[i] = d;
        }
    }

    let tail = airy_tail(config.s_right);
    let sq: Vec<f64> = q.iter().map(|v| v * v).collect();
    let b: Vec<f64> = tail_integrals(&sq, h).iter().map(|v| v + lambda * tail.ai_sq).collect();
    let i0: Vec<f64> = tail_integrals(&b, h).iter().map(|v| v + lambda * tail.moment).collect();
    let j0: Vec<f64> = tail_integrals(&q, h).iter().map(|v| v + root * tail.ai).collect();

    let r = config.refinement();
    let pick = |v: &[f64]| v.iter().step_by(r).copied().collect::<Vec<f64>>();
    Ok(PainleveState {
        lambda,
        grid,
        q0: pick(&q),
        q0_prime: pick(&qp),
        i0: pick(&i0),
        i0_prime: b.iter().step_by(r).map(|v| -v).collect(),
        j0: pick(&j0),
        first_variation: None,
        patched_below: patched.then_some(mesh[patch_index]),
        diagnostics,
    })
}

/// `[q, q', ∂λq, ∂λq']` at `s_right`, integrated in from `s_right + BOUNDARY_LEAD`
/// where Airy data is exact to rounding. Airy data at `s_right` itself drops the
/// cubic term, a relative O(λ Ai²) change of amplitude that acts like a shift
/// in λ, and solutions with λ < 1 are very sensitive to λ on the left.
fn edge_data(
    lambda: f64,
    config: &SolverConfig,
    step: &mut f64,
    stats: &mut StepStats,
) -> Result<[f64; 4]> {
    let start = config.s_right + BOUNDARY_LEAD;
    let far = airy(start);
    let root = lambda.sqrt();
    let y0 = [root * far.ai, root * far.ai_prime, 0.5 * far.ai / root, 0.5 * far.ai_prime / root];
    let mut rhs = |s: f64, y: &[f64; 4]| {
        let q2 = y[0] * y[0];
        [y[1], (s + 2.0 * q2) * y[0], y[3], (s + 6.0 * q2) * y[2]]
    };
    // an amplitude error here is itself a shift in λ, so this short leg runs
    // near rounding whatever the configured tolerance
    let tol = Tolerance { atol: EDGE_RTOL * far.ai.min(root * far.ai), rtol: EDGE_RTOL };
    dopri5(&mut rhs, start, y0, config.s_right, tol, step, stats)
}

/// Newton iteration for the Numerov equations of `q'' = s q + 2 q^3`,
/// keeping `q[0]` and `q[m-1]` fixed.
fn relax(mesh: &[f64], q: &mut [f64], config: &SolverConfig) -> Result<(usize, f64)> {
    let m = mesh.len();
    let h = mesh[1] - mesh[0];
    let c = h * h / 12.0;
    let interior = m - 2;
    let mut sub = alloc::vec![0.0; interior];
    let mut diag = alloc::vec![0.0; interior];
    let mut sup = alloc::vec![0.0; interior];
    let mut res = alloc::vec![0.0; interior];
    let mut last = f64::INFINITY;
    for iteration in 1..=config.max_relaxation_iters {
        let g: Vec<f64> = mesh.iter().zip(q.iter()).map(|(s, v)| s * v + 2.0 * v * v * v).collect();
        let gq: Vec<f64> = mesh.iter().zip(q.iter()).map(|(s, v)| s + 6.0 * v * v).collect();
        for k in 0..interior {
            let i = k + 1;
            res[k] = -(q[i + 1] - 2.0 * q[i] + q[i - 1] - c * (g[i + 1] + 10.0 * g[i] + g[i - 1]));
            sub[k] = 1.0 - c * gq[i - 1];
            diag[k] = -2.0 - 10.0 * c * gq[i];
            sup[k] = 1.0 - c * gq[i + 1];
        }
        let delta = solve_tridiagonal(&sub, &diag, &sup, &res)?;
        let scale = 1.0 + q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        last = delta.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale;
        for (k, d) in delta.iter().enumerate() {
            q[k + 1] += d;
        }
        if !last.is_finite() {
            break;
        }
        if last <= config.relaxation_tol {
            return Ok((iteration, last));
        }
    }
    Err(Error::RelaxationDiverged { iterations: config.max_relaxation_iters, last_correction: last })
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = alloc::vec![0.0; n];
    let mut d = alloc::vec![0.0; n];
    for i in 0..n {
        let pivot = if i == 0 { diag[0] } else { diag[i] - sub[i] * c[i - 1] };
        if pivot.abs() < f64::MIN_POSITIVE * 1e10 || !pivot.is_finite() {
            return Err(Error::Singular { column: i, pivot });
        }
        c[i] = sup[i] / pivot;
        d[i] = if i == 0 { rhs[0] } else { rhs[i] - sub[i] * d[i - 1] } / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves the linearised equation `q1'' = (s + 6 q0^2) q1` around a λ = 1
/// state and attaches `q1` and its integrals to a copy of it.
pub fn solve_q1(config: &SolverConfig, base: &PainleveState) -> Result<PainleveState> {
    config.validate()?;
    if base.lambda != 1.0 {
        return Err(invalid("solve_q1 needs the lambda = 1 state"));
    }
    if base.grid != config.grid() {
        return Err(invalid("base state was solved on a different grid"));
    }
    let mesh = uniform_grid(config.s_left, config.s_right, config.relaxation_mesh_size);
    let m = mesh.len();
    let h = mesh[1] - mesh[0];
    let q0 = refine_q0(base, &mesh);
    let potential: Vec<f64> = mesh.iter().zip(&q0).map(|(s, v)| s + 6.0 * v * v).collect();
    let patch_index = locate(&mesh, config.patch_point + 0.5 * h);

    // Phase 1: the wanted solution is the one growing to the left, so the
    // right-to-left sweep is stable.
    let mut diagnostics = Diagnostics::default();
    let tol = Tolerance { atol: config.rk_atol, rtol: config.rk_rtol };
    let mut stats = StepStats::default();
    let mut trial = alloc::vec![0.0; m];
    let mut step = h;
    let edge = edge_data(1.0, config, &mut step, &mut stats)?;
    let mut y = [edge[2], edge[3]];
    trial[m - 1] = y[0];
    for i in (0..m - 1).rev() {
        let mut rhs = |s: f64, y: &[f64; 2]| {
            let q = base_q0_at(base, s);
            [y[1], (s + 6.0 * q * q) * y[0]]
        };
        y = dopri5(&mut rhs, mesh[i + 1], y, mesh[i], tol, &mut step, &mut stats)?;
        trial[i] = y[0];
    }
    diagnostics.rk_steps = stats.accepted;
    diagnostics.rk_rejected = stats.rejected;

    // Phase 2: the Numerov equations are linear, so one solve relaxes them.
    let c = h * h / 12.0;
    let interior = m - 2;
    // q1 grows to the left, so a left Dirichlet value fixes its amplitude
    // everywhere; the sweep from the right carries it accurately while the
    // truncated series at s_left does not.
    let left = trial[0];
    let right_value = edge[2];
    let mut sub = alloc::vec![0.0; interior];
    let mut diag = alloc::vec![0.0; interior];
    let mut sup = alloc::vec![0.0; interior];
    let mut rhs = alloc::vec![0.0; interior];
    for k in 0..interior {
        let i = k + 1;
        sub[k] = 1.0 - c * potential[i - 1];
        diag[k] = -2.0 - 10.0 * c * potential[i];
        sup[k] = 1.0 - c * potential[i + 1];
    }
    rhs[0] -= sub[0] * left;
    rhs[interior - 1] -= sup[interior - 1] * right_value;
    let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    let mut q1 = alloc::vec![0.0; m];
    q1[0] = left;
    q1[m - 1] = right_value;
    q1[1..m - 1].copy_from_slice(&inner);
    diagnostics.relaxation_iterations = 1;
    diagnostics.last_correction = q1
        .iter()
        .zip(&trial)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max);

    let g: Vec<f64> = potential.iter().zip(&q1).map(|(v, x)| v * x).collect();
    let mut q1p: Vec<f64> = tail_integrals(&g, h).iter().map(|gt| edge[3] - gt).collect();
    for i in 0..patch_index {
        let (v, d) = q1_series(-2.0 * mesh[i])?;
        q1[i] = v;
        q1p[i] = d;
    }

    let tail = airy_tail(config.s_right);
    let prod: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| a * b).collect();
    let j1: Vec<f64> = tail_integrals(&prod, h).iter().map(|v| v + 0.5 * tail.ai_sq).collect();
    let i1: Vec<f64> = tail_integrals(&j1, h).iter().map(|v| v + 0.5 * tail.moment).collect();
    let mu1: Vec<f64> = tail_integrals(&q1, h).iter().map(|v| v + 0.5 * tail.ai).collect();

    let r = config.refinement();
    let pick = |v: &[f64]| v.iter().step_by(r).copied().collect::<Vec<f64>>();
    let mut state = base.clone();
    state.first_variation = Some(FirstVariation {
        q1: pick(&q1),
        q1_prime: pick(&q1p),
        i1: pick(&i1),
        i1_prime: j1.iter().step_by(r).map(|v| -v).collect(),
        j1: pick(&j1),
        mu1: pick(&mu1),
        diagnostics,
    });
    Ok(state)
}

/// `q0` of a stored state at an arbitrary point, by quintic Hermite
/// interpolation using `q0'` and `q0'' = s q0 + 2 q0^3`.
fn base_q0_at(state: &PainleveState, s: f64) -> f64 {
    let i = locate(&state.grid, s);
    let (a, b) = (state.grid[i], state.grid[i + 1]);
    let (qa, qb) = (state.q0[i], state.q0[i + 1]);
    hermite5(
        a,
        b,
        [qa, qb],
        [state.q0_prime[i], state.q0_prime[i + 1]],
        [a * qa + 2.0 * qa.powi(3), b * qb + 2.0 * qb.powi(3)],
        s,
    )
}

fn refine_q0(state: &PainleveState, mesh: &[f64]) -> Vec<f64> {
    mesh.iter().map(|&s| base_q0_at(state, s)).collect()
}
