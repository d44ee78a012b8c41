//! Uniform-grid helpers: cumulative quadrature, gradients and interpolation.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
        .collect()
}

/// `out[i] = ∫_{x_i}^{x_last} f` for samples of `f` on a uniform grid with spacing `h`.
///
/// Each panel is integrated with the cubic through the four nearest samples
/// (fourth order overall). Needs at least four samples.
pub fn tail_integrals(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "tail_integrals needs at least four samples");
    let mut out = alloc::vec![0.0; n];
    let c = h / 24.0;
    for i in (0..n - 1).rev() {
        let panel = if i == 0 {
            c * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
        } else if i == n - 2 {
            c * (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1])
        } else {
            c * (-values[i - 1] + 13.0 * values[i] + 13.0 * values[i + 1] - values[i + 2])
        };
        out[i] = out[i + 1] + panel;
    }
    out
}

/// Second-order finite-difference derivative on a uniform grid.
pub fn gradient(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3);
    let mut out = alloc::vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out
}

/// Index `i` with `xs[i] <= x <= xs[i+1]`, clamped to the valid panels.
pub(crate) fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

/// Shape-preserving cubic Hermite interpolant (Fritsch-Carlson limiter).
///
/// Slopes may be supplied (e.g. exact derivatives from an ODE state); they
/// are clipped only where they would break monotonicity of the data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, slopes: Option<Vec<f64>>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = slopes.unwrap_or_else(|| {
            let mut d = alloc::vec![0.0; n];
            d[0] = secants[0];
            d[n - 1] = secants[n - 2];
            for i in 1..n - 1 {
                d[i] = if secants[i - 1] * secants[i] <= 0.0 {
                    0.0
                } else {
                    let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                    let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                    (w0 + w1) / (w0 / secants[i - 1] + w1 / secants[i])
                };
            }
            d
        });
        assert_eq!(slopes.len(), n);
        for i in 0..n - 1 {
            let delta = secants[i];
            if delta == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / delta;
            let b = slopes[i + 1] / delta;
            if a < 0.0 {
                slopes[i] = 0.0;
            }
            if b < 0.0 {
                slopes[i + 1] = 0.0;
            }
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * delta;
                slopes[i + 1] = tau * b * delta;
            }
        }
        MonotoneCubic { xs, ys, slopes }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = locate(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// Quintic Hermite interpolation on one panel from values, first and
/// second derivatives at both ends.
#[allow(clippy::too_many_arguments)]
pub(crate) fn hermite5(x0: f64, x1: f64, y: [f64; 2], d1: [f64; 2], d2: [f64; 2], x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h3 = 0.5 * t3 - t4 + 0.5 * t5;
    h0 * y[0] + h * h1 * d1[0] + h * h * h2 * d2[0] + h5 * y[1] + h * h4 * d1[1] + h * h * h3 * d2[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_integral_of_exponential() {
        let xs = uniform_grid(-2.0, 3.0, 501);
        let f: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let tails = tail_integrals(&f, 0.01);
        for (i, &x) in xs.iter().enumerate() {
            let exact = 3f64.exp() - x.exp();
            assert!((tails[i] - exact).abs() < 1e-8, "{x}: {}", tails[i] - exact);
        }
    }

    #[test]
    fn tail_integral_is_fourth_order() {
        let err = |n: usize| {
            let h = 4.0 / (n - 1) as f64;
            let xs = uniform_grid(0.0, 4.0, n);
            let f: Vec<f64> = xs.iter().map(|x| x.sin() * x.exp()).collect();
            let exact = |x: f64| 0.5 * x.exp() * (x.sin() - x.cos());
            let tails = tail_integrals(&f, h);
            xs.iter()
                .zip(&tails)
                .map(|(&x, t)| (t - (exact(4.0) - exact(x))).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(101) / err(201);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn monotone_cubic_reproduces_cubic_with_exact_slopes() {
        let xs = uniform_grid(0.0, 2.0, 21);
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x + x).collect();
        let ds: Vec<f64> = xs.iter().map(|x| 3.0 * x * x + 1.0).collect();
        let m = MonotoneCubic::new(xs, ys, Some(ds));
        for &x in &[0.013, 0.77, 1.5, 1.999] {
            assert!((m.eval(x) - (x * x * x + x)).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_cubic_preserves_step_shape() {
        let xs = uniform_grid(0.0, 5.0, 6);
        let ys = alloc::vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let m = MonotoneCubic::new(xs, ys, None);
        let mut prev = -1.0;
        for k in 0..=500 {
            let v = m.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn quintic_hermite_is_exact_on_quintics() {
        let f = |x: f64| x.powi(5) - 2.0 * x.powi(3) + x;
        let d = |x: f64| 5.0 * x.powi(4) - 6.0 * x * x + 1.0;
        let dd = |x: f64| 20.0 * x.powi(3) - 12.0 * x;
        let (a, b) = (0.3, 0.9);
        let v = hermite5(a, b, [f(a), f(b)], [d(a), d(b)], [dd(a), dd(b)], 0.55);
        assert!((v - f(0.55)).abs() < 1e-14);
    }
}
