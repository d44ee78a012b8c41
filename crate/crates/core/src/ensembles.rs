//! Monte Carlo sampling of finite-N Gaussian β-ensembles and white Wishart
//! matrices, edge rescaling of their top eigenvalues, and empirical-versus-
//! limiting comparisons (percentile proportions, Kolmogorov–Smirnov).
//!
//! Replicate `i` of a batch draws only from `rng_stream(master_seed, i)`, so a
//! batch is the same whichever order or thread its replicates run on.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

use crate::distributions::Beta;
use crate::eigen::{top_eigenvalues, DenseMatrix, SymTridiagonal};
use crate::error::{invalid, Error, Result};
use crate::special::{rng_stream, RngStream};

/// Default ceiling on the floating-point work estimate of one batch.
pub const DEFAULT_WORK_BUDGET: f64 = 1e12;

/// Consecutive eigenvalues closer than this are counted as ties.
pub const TIE_RESOLUTION: f64 = 1e-12;

/// `2^{2/3}`: the edge-rescaled largest GSE eigenvalue `ŝ` is compared with
/// `F_4` at `GSE_AXIS_FACTOR · ŝ`.
pub const GSE_AXIS_FACTOR: f64 = 1.587_401_051_968_199_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Model {
    Dense,
    Tridiagonal,
}

/// A batch of Gaussian β-ensemble matrices with joint eigenvalue density
/// `∝ exp(-β/2 Σλ²) Π|λ_j - λ_k|^β`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSpec {
    pub beta: Beta,
    pub n: usize,
    pub replicates: usize,
    pub k: usize,
    pub master_seed: u64,
    pub model: Model,
}

/// A batch of `X Xᵀ` with `X` a `p × n` standard normal matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WishartSpec {
    pub p: usize,
    pub n: usize,
    pub replicates: usize,
    pub k: usize,
    pub master_seed: u64,
}

fn check_counts(n: usize, k: usize, replicates: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("matrix size must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must lie in 1..={n}")));
    }
    if replicates == 0 {
        return Err(invalid("replicates must be at least 1"));
    }
    Ok(())
}

fn check_budget(estimate: f64, budget: f64) -> Result<()> {
    if estimate > budget {
        Err(Error::Budget { estimate, budget })
    } else {
        Ok(())
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        check_counts(self.n, self.k, self.replicates)
    }

    /// Rough floating-point operation count of the whole batch.
    pub fn work_estimate(&self) -> f64 {
        let n = self.n as f64;
        let per = match self.model {
            Model::Dense => {
                let reduction = 4.0 / 3.0 * n * n * n;
                match self.beta {
                    Beta::One => reduction,
                    Beta::Two => 4.0 * reduction,
                    Beta::Four => 32.0 * reduction,
                }
            }
            Model::Tridiagonal => 20.0 * n,
        };
        self.replicates as f64 * (per + 60.0 * n * self.k as f64)
    }

    pub fn check_budget(&self, budget: f64) -> Result<()> {
        check_budget(self.work_estimate(), budget)
    }

    pub fn describe(&self) -> String {
        let model = match self.model {
            Model::Dense => "dense",
            Model::Tridiagonal => "tridiagonal",
        };
        format!(
            "gaussian beta={} n={} replicates={} k={} seed={} model={model}",
            self.beta.as_u8(),
            self.n,
            self.replicates,
            self.k,
            self.master_seed
        )
    }
}

impl WishartSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("degrees of freedom n = {} must be at least 2", self.n)));
        }
        check_counts(self.p.min(self.n), self.k, self.replicates)
    }

    pub fn work_estimate(&self) -> f64 {
        let (p, n) = (self.p.min(self.n) as f64, self.p.max(self.n) as f64);
        self.replicates as f64 * (p * (p + 1.0) * n + 4.0 / 3.0 * p * p * p + 60.0 * p * self.k as f64)
    }

    pub fn check_budget(&self, budget: f64) -> Result<()> {
        check_budget(self.work_estimate(), budget)
    }

    pub fn describe(&self) -> String {
        format!(
            "wishart p={} n={} replicates={} k={} seed={}",
            self.p, self.n, self.replicates, self.k, self.master_seed
        )
    }
}

/// Rescaled top-k eigenvalues, one descending array per replicate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleBatch {
    /// FNV-1a hash of `EnsembleSpec::describe` / `WishartSpec::describe`.
    pub spec_hash: u64,
    pub values: Vec<Vec<f64>>,
    /// Replicates holding two values within `TIE_RESOLUTION` of each other.
    pub ties: usize,
}

impl SampleBatch {
    /// Assembles replicates produced in any order; `indexed[j].0` is the replicate index.
    pub fn assemble(spec_hash: u64, replicates: usize, mut indexed: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        indexed.sort_by_key(|(i, _)| *i);
        if indexed.len() != replicates || indexed.iter().enumerate().any(|(j, (i, _))| *i != j) {
            return Err(invalid("replicate indices must be exactly 0..replicates"));
        }
        let values: Vec<Vec<f64>> = indexed.into_iter().map(|(_, v)| v).collect();
        let ties = values
            .iter()
            .filter(|v| v.windows(2).any(|w| w[0] - w[1] < TIE_RESOLUTION))
            .count();
        Ok(SampleBatch { spec_hash, values, ties })
    }

    pub fn replicates(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// The m-th largest rescaled eigenvalue of every replicate (`m` from 1).
    pub fn column(&self, m: usize) -> Result<Vec<f64>> {
        if m == 0 || m > self.k() {
            return Err(invalid(format!("column m = {m} outside 1..={}", self.k())));
        }
        Ok(self.values.iter().map(|v| v[m - 1]).collect())
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// `(λ - √(2N)) / (2^{-1/2} N^{-1/6})`, times `GSE_AXIS_FACTOR` for β = 4 so
/// the result is on the argument axis of `F_β`.
pub fn edge_rescale(lam: f64, n: usize, beta: Beta) -> f64 {
    let n = n as f64;
    let s = (lam - (2.0 * n).sqrt()) * core::f64::consts::SQRT_2 * n.powf(1.0 / 6.0);
    match beta {
        Beta::Four => GSE_AXIS_FACTOR * s,
        _ => s,
    }
}

/// The GOE statistic an eigenvalue `lam` of a size-`n` GSE matrix stands for:
/// `√2 · lam` has the law of an even-indexed eigenvalue of GOE of size `2n + 1`,
/// rescaled at that size. Agrees with `edge_rescale(lam, n, Beta::Four)` up to
/// `O(n^{-2/3})`.
pub fn gse_as_goe_alternate(lam: f64, n: usize) -> f64 {
    edge_rescale(core::f64::consts::SQRT_2 * lam, 2 * n + 1, Beta::One)
}

/// Centering `(√(n-1) + √p)²` and scale `(√(n-1) + √p)(1/√(n-1) + 1/√p)^{1/3}`.
pub fn wishart_centering(p: usize, n: usize) -> (f64, f64) {
    let a = ((n - 1) as f64).sqrt();
    let b = (p as f64).sqrt();
    ((a + b) * (a + b), (a + b) * (1.0 / a + 1.0 / b).cbrt())
}

fn tridiagonal_model(beta: Beta, n: usize, rng: &mut RngStream) -> SymTridiagonal {
    let b = beta.as_f64();
    let sd = (1.0 / b).sqrt();
    let diag = (0..n).map(|_| sd * rng.normal()).collect();
    let off = (1..n).map(|i| rng.chi(b * (n - i) as f64) / (2.0 * b).sqrt()).collect();
    SymTridiagonal { diag, off }
}

fn goe_matrix(n: usize, rng: &mut RngStream) -> DenseMatrix<f64> {
    let mut h = DenseMatrix::zeros(n);
    let off_sd = core::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        h.set(i, i, rng.normal());
        for j in i + 1..n {
            h.set_hermitian(i, j, off_sd * rng.normal());
        }
    }
    h
}

fn complex_normal(rng: &mut RngStream, sd: f64) -> Complex64 {
    Complex64::new(sd * rng.normal(), sd * rng.normal())
}

fn gue_matrix(n: usize, rng: &mut RngStream) -> DenseMatrix<Complex64> {
    let mut h = DenseMatrix::zeros(n);
    for i in 0..n {
        h.set(i, i, Complex64::new(core::f64::consts::FRAC_1_SQRT_2 * rng.normal(), 0.0));
        for j in i + 1..n {
            h.set_hermitian(i, j, complex_normal(rng, 0.5));
        }
    }
    h
}

/// `[[A, B], [-B̄, Ā]]` with `A` Hermitian and `B` antisymmetric; every
/// eigenvalue appears twice.
fn gse_matrix(n: usize, rng: &mut RngStream) -> DenseMatrix<Complex64> {
    let mut h = DenseMatrix::zeros(2 * n);
    let sd = 1.0 / 8f64.sqrt();
    for i in 0..n {
        let d = Complex64::new(0.5 * rng.normal(), 0.0);
        h.set(i, i, d);
        h.set(n + i, n + i, d);
        for j in i + 1..n {
            let a = complex_normal(rng, sd);
            h.set_hermitian(i, j, a);
            h.set_hermitian(n + i, n + j, a.conj());
            let b = complex_normal(rng, sd);
            h.set_hermitian(i, n + j, b);
            h.set_hermitian(j, n + i, -b);
        }
    }
    h
}

/// Unrescaled top-k eigenvalues of replicate `index`, descending.
pub fn gaussian_replicate_raw(spec: &EnsembleSpec, index: usize) -> Result<Vec<f64>> {
    let mut rng = rng_stream(spec.master_seed, index as u64);
    let (n, k) = (spec.n, spec.k);
    match (spec.model, spec.beta) {
        (Model::Tridiagonal, beta) => tridiagonal_model(beta, n, &mut rng).top_eigenvalues(k),
        (Model::Dense, Beta::One) => top_eigenvalues(&goe_matrix(n, &mut rng), k),
        (Model::Dense, Beta::Two) => top_eigenvalues(&gue_matrix(n, &mut rng), k),
        (Model::Dense, Beta::Four) => {
            let doubled = top_eigenvalues(&gse_matrix(n, &mut rng), 2 * k)?;
            Ok(doubled.into_iter().step_by(2).collect())
        }
    }
}

/// Edge-rescaled top-k eigenvalues of replicate `index`.
pub fn gaussian_replicate(spec: &EnsembleSpec, index: usize) -> Result<Vec<f64>> {
    Ok(gaussian_replicate_raw(spec, index)?
        .into_iter()
        .map(|lam| edge_rescale(lam, spec.n, spec.beta))
        .collect())
}

/// Unrescaled top-k eigenvalues of `X Xᵀ` for replicate `index`. When
/// `p > n` the nonzero spectrum is taken from the smaller Gram matrix `Xᵀ X`.
pub fn wishart_replicate_raw(spec: &WishartSpec, index: usize) -> Result<Vec<f64>> {
    let mut rng = rng_stream(spec.master_seed, index as u64);
    let (p, n) = (spec.p, spec.n);
    let x: Vec<f64> = (0..p * n).map(|_| rng.normal()).collect();
    let (rows, len) = if p <= n { (p, n) } else { (n, p) };
    // row i of the factor whose Gram matrix is formed, as a strided view of X
    let entry = |i: usize, t: usize| if p <= n { x[i * n + t] } else { x[t * n + i] };
    let mut w = DenseMatrix::zeros(rows);
    for i in 0..rows {
        for j in i..rows {
            let dot: f64 = (0..len).map(|t| entry(i, t) * entry(j, t)).sum();
            w.set_hermitian(i, j, dot);
        }
    }
    top_eigenvalues(&w, spec.k)
}

/// Top-k eigenvalues of replicate `index` rescaled by the Wishart centering.
pub fn wishart_replicate(spec: &WishartSpec, index: usize) -> Result<Vec<f64>> {
    let (mu, sigma) = wishart_centering(spec.p, spec.n);
    Ok(wishart_replicate_raw(spec, index)?.into_iter().map(|lam| (lam - mu) / sigma).collect())
}

/// Runs every replicate sequentially under `DEFAULT_WORK_BUDGET`.
pub fn sample_gaussian(spec: &EnsembleSpec) -> Result<SampleBatch> {
    spec.validate()?;
    spec.check_budget(DEFAULT_WORK_BUDGET)?;
    let indexed = (0..spec.replicates)
        .map(|i| gaussian_replicate(spec, i).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    SampleBatch::assemble(fnv1a(&spec.describe()), spec.replicates, indexed)
}

pub fn sample_wishart(spec: &WishartSpec) -> Result<SampleBatch> {
    spec.validate()?;
    spec.check_budget(DEFAULT_WORK_BUDGET)?;
    let indexed = (0..spec.replicates)
        .map(|i| wishart_replicate(spec, i).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    SampleBatch::assemble(fnv1a(&spec.describe()), spec.replicates, indexed)
}

/// Proportions of replicates whose m-th value lies at or below an ordinate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PercentileTable {
    pub percentiles: Vec<f64>,
    /// `proportions[m - 1][j]` for percentile `percentiles[j]`.
    pub proportions: Vec<Vec<f64>>,
    /// Binomial standard error `√(p̂(1 - p̂)/R)` of each cell.
    pub std_errors: Vec<Vec<f64>>,
}

/// `ordinates[m - 1][j]` is the reference quantile of the m-th value at `percentiles[j]`.
pub fn percentile_table(batch: &SampleBatch, ordinates: &[Vec<f64>], percentiles: &[f64]) -> Result<PercentileTable> {
    if batch.replicates() == 0 {
        return Err(invalid("empty batch"));
    }
    if ordinates.len() > batch.k() || ordinates.iter().any(|o| o.len() != percentiles.len()) {
        return Err(invalid("one ordinate per percentile is needed for each m <= k"));
    }
    let r = batch.replicates() as f64;
    let mut proportions = Vec::with_capacity(ordinates.len());
    let mut std_errors = Vec::with_capacity(ordinates.len());
    for (m, row) in ordinates.iter().enumerate() {
        let column = batch.column(m + 1)?;
        let props: Vec<f64> = row
            .iter()
            .map(|&x| column.iter().filter(|&&v| v <= x).count() as f64 / r)
            .collect();
        std_errors.push(props.iter().map(|p| (p * (1.0 - p) / r).sqrt()).collect());
        proportions.push(props);
    }
    Ok(PercentileTable { percentiles: percentiles.to_vec(), proportions, std_errors })
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(invalid("empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid("sample contains NaN"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_n(x) - cdf(x)|` for the empirical distribution `F_n` of `values`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
