//! Largest eigenvalues of real symmetric and complex Hermitian matrices:
//! Householder reduction to a real symmetric tridiagonal matrix, then Sturm
//! bisection refined by safeguarded Newton steps.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Entries a Hermitian matrix may hold.
pub trait Scalar:
    Copy + Default + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs_sq(self) -> f64;
    fn scale(self, x: f64) -> Self;
}

impl Scalar for f64 {
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

impl Scalar for Complex64 {
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

/// Dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: alloc::vec![T::default(); n * n] }
    }

    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n || n == 0 {
            return Err(invalid("matrix data must hold n * n entries with n >= 1"));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// Sets `(i, j)` to `v` and `(j, i)` to its conjugate.
    pub fn set_hermitian(&mut self, i: usize, j: usize, v: T) {
        self.set(i, j, v);
        self.set(j, i, v.conj());
    }

    /// Largest `|a_ij - conj(a_ji)|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                scale = scale.max(self.get(i, j).abs_sq());
                if j >= i {
                    worst = worst.max((self.get(i, j) - self.get(j, i).conj()).abs_sq());
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            (worst / scale).sqrt()
        }
    }
}

/// Real symmetric tridiagonal matrix: `diag[i]` and `off[i] = T[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(invalid("a tridiagonal matrix of size n needs n - 1 off-diagonal entries"));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.size() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `det(T - x) / det'(T - x)`, the Newton correction for a root at `x`.
    fn newton_ratio(&self, x: f64) -> Option<f64> {
        let mut d = 0.0;
        let mut dd = 0.0;
        let mut log_derivative = 0.0;
        for i in 0..self.size() {
            if i == 0 {
                d = self.diag[0] - x;
                dd = -1.0;
            } else {
                let b2 = self.off[i - 1] * self.off[i - 1];
                let prev = d;
                d = self.diag[i] - x - b2 / prev;
                dd = -1.0 + b2 * dd / (prev * prev);
            }
            if d == 0.0 {
                return Some(0.0);
            }
            log_derivative += dd / d;
        }
        (log_derivative.is_finite() && log_derivative != 0.0).then(|| 1.0 / log_derivative)
    }

    /// The eigenvalue with ascending index `index`.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let coarse = 1e-9 * scale;
        let fine = 4.0 * f64::EPSILON * scale;
        let bisect = |lo: &mut f64, hi: &mut f64, width: f64| {
            while *hi - *lo > width {
                let mid = 0.5 * (*lo + *hi);
                if mid <= *lo || mid >= *hi {
                    break;
                }
                if self.sturm_count(mid) > index {
                    *hi = mid;
                } else {
                    *lo = mid;
                }
            }
        };
        bisect(&mut lo, &mut hi, coarse);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..NEWTON_STEPS {
            let Some(step) = self.newton_ratio(x) else { break };
            let next = x - step;
            if !(next > lo && next < hi) {
                break;
            }
            x = next;
            if step.abs() <= fine {
                return x;
            }
        }
        if self.sturm_count(x) > index {
            hi = x;
        } else {
            lo = x;
        }
        bisect(&mut lo, &mut hi, fine);
        0.5 * (lo + hi)
    }

    /// The `k` largest eigenvalues in descending order.
    pub fn top_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.size();
        if k > n {
            return Err(invalid(alloc::format!("k = {k} exceeds the matrix size {n}")));
        }
        Ok((0..k).map(|j| self.eigenvalue(n - 1 - j)).collect())
    }
}

const NEWTON_STEPS: usize = 4;

/// Householder reduction of a Hermitian matrix to a unitarily similar real
/// symmetric tridiagonal matrix (complex off-diagonals are replaced by their
/// moduli, a diagonal unitary similarity).
pub fn tridiagonalize<T: Scalar>(matrix: &DenseMatrix<T>) -> Result<SymTridiagonal> {
    if matrix.asymmetry() > 1e-12 {
        return Err(invalid("matrix is not symmetric (Hermitian)"));
    }
    let n = matrix.n;
    let mut a = matrix.data.clone();
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    let mut v = alloc::vec![T::default(); n];
    let mut p = alloc::vec![T::default(); n];
    for k in 0..n.saturating_sub(1) {
        let m = k + 1;
        let norm_sq: f64 = (m..n).map(|i| a[i * n + k].abs_sq()).sum();
        let norm = norm_sq.sqrt();
        let x0 = a[m * n + k];
        if norm == 0.0 || (m + 1 == n) {
            off.push(x0.abs_sq().sqrt());
            continue;
        }
        let x0_abs = x0.abs_sq().sqrt();
        let phase = if x0_abs == 0.0 { T::from_re(1.0) } else { x0.scale(1.0 / x0_abs) };
        // reflect the column onto alpha e_1 with alpha = -phase * norm
        let alpha = -phase.scale(norm);
        for i in m..n {
            v[i] = a[i * n + k];
        }
        v[m] = v[m] - alpha;
        let v_norm_sq: f64 = (m..n).map(|i| v[i].abs_sq()).sum();
        if v_norm_sq == 0.0 {
            off.push(norm);
            continue;
        }
        let tau = 2.0 / v_norm_sq;
        // p = tau A v on the trailing block
        for i in m..n {
            let mut acc = T::default();
            for j in m..n {
                acc = acc + a[i * n + j] * v[j];
            }
            p[i] = acc.scale(tau);
        }
        let mut vp = T::default();
        for i in m..n {
            vp = vp + v[i].conj() * p[i];
        }
        let kk = 0.5 * tau * vp.re();
        for i in m..n {
            p[i] = p[i] - v[i].scale(kk);
        }
        for i in m..n {
            for j in m..n {
                let update = v[i] * p[j].conj() + p[i] * v[j].conj();
                a[i * n + j] = a[i * n + j] - update;
            }
        }
        off.push(norm);
    }
    let diag = (0..n).map(|i| a[i * n + i].re()).collect();
    SymTridiagonal::new(diag, off)
}

/// The `k` largest eigenvalues of a Hermitian matrix, descending.
pub fn top_eigenvalues<T: Scalar>(matrix: &DenseMatrix<T>, k: usize) -> Result<Vec<f64>> {
    tridiagonalize(matrix)?.top_eigenvalues(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::rng_stream;
    use proptest::prelude::*;

    /// Cyclic Jacobi rotations; all eigenvalues, descending.
    fn jacobi(mut a: Vec<f64>, n: usize) -> Vec<f64> {
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k * n + p], a[k * n + q]);
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_stream(seed, 0);
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.normal();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    #[test]
    fn diagonal_example() {
        let m = DenseMatrix::from_rows(3, alloc::vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let top = top_eigenvalues(&m, 2).unwrap();
        assert!((top[0] - 3.0).abs() < 1e-14 && (top[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn swap_example() {
        let m = DenseMatrix::from_rows(2, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let top = top_eigenvalues(&m, 2).unwrap();
        assert!((top[0] - 1.0).abs() < 1e-14 && (top[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_oversized_k() {
        let m = DenseMatrix::from_rows(2, alloc::vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert!(top_eigenvalues(&m, 1).is_err());
        let m = DenseMatrix::from_rows(2, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(top_eigenvalues(&m, 3).is_err());
        assert!(SymTridiagonal::new(alloc::vec![1.0], alloc::vec![1.0]).is_err());
    }

    #[test]
    fn one_by_one() {
        let m = DenseMatrix::from_rows(1, alloc::vec![-2.5]).unwrap();
        assert_eq!(top_eigenvalues(&m, 1).unwrap(), [-2.5]);
    }

    #[test]
    fn random_matrices_match_jacobi() {
        for seed in 0..5 {
            let n = 20;
            let a = random_symmetric(n, seed);
            let expected = jacobi(a.clone(), n);
            let got = top_eigenvalues(&DenseMatrix::from_rows(n, a).unwrap(), n).unwrap();
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-10, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn hermitian_matches_real_embedding() {
        // [[Re, -Im], [Im, Re]] has every eigenvalue of the Hermitian matrix twice
        let n = 8;
        let mut rng = rng_stream(11, 0);
        let mut h = DenseMatrix::<Complex64>::zeros(n);
        for i in 0..n {
            h.set(i, i, Complex64::new(rng.normal(), 0.0));
            for j in i + 1..n {
                h.set_hermitian(i, j, Complex64::new(rng.normal(), rng.normal()));
            }
        }
        let mut real = alloc::vec![0.0; 4 * n * n];
        for i in 0..n {
            for j in 0..n {
                let z = h.get(i, j);
                real[i * 2 * n + j] = z.re;
                real[i * 2 * n + j + n] = -z.im;
                real[(i + n) * 2 * n + j] = z.im;
                real[(i + n) * 2 * n + j + n] = z.re;
            }
        }
        let expected = jacobi(real, 2 * n);
        let got = top_eigenvalues(&h, n).unwrap();
        for (j, g) in got.iter().enumerate() {
            assert!((g - expected[2 * j]).abs() < 1e-10);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let t = SymTridiagonal::new(alloc::vec![2.0, 2.0, 2.0], alloc::vec![0.0, 0.0]).unwrap();
        assert_eq!(t.top_eigenvalues(3).unwrap(), [2.0, 2.0, 2.0]);
    }

    proptest! {
        #[test]
        fn sturm_count_is_monotone(seed in 0u64..1000, x in -5.0f64..5.0, dx in 0.0f64..2.0) {
            let mut rng = rng_stream(seed, 1);
            let t = SymTridiagonal::new((0..12).map(|_| rng.normal()).collect(), (0..11).map(|_| rng.normal()).collect()).unwrap();
            prop_assert!(t.sturm_count(x) <= t.sturm_count(x + dx));
        }

        #[test]
        fn trace_is_preserved(seed in 0u64..1000) {
            let n = 9;
            let a = random_symmetric(n, seed);
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let t = tridiagonalize(&DenseMatrix::from_rows(n, a).unwrap()).unwrap();
            prop_assert!((t.diag.iter().sum::<f64>() - trace).abs() < 1e-10);
        }
    }
}
