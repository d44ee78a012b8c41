//! Reproducible random streams.
//!
//! A stream is a ChaCha8 generator keyed by the master seed with the stream
//! id selecting an independent ChaCha stream. Normals use the polar
//! Box-Muller method; chi variates are sums of squares for small integer
//! degrees of freedom and Marsaglia-Tsang gamma rejection otherwise.

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Degrees of freedom up to which chi variates are drawn as sums of squares.
const SUM_OF_SQUARES_MAX_DOF: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

/// Generator for `(master_seed, stream_id)`. Equal inputs give bit-identical sequences.
pub fn rng_stream(master_seed: u64, stream_id: u64) -> RngStream {
    let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
    inner.set_stream(stream_id);
    RngStream { inner, spare: None }
}

impl RngStream {
    /// Uniform on (0, 1), 53 random bits, never exactly 0.
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u = (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Standard normal variate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Gamma(shape, 1) variate, shape > 0.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let boost = self.uniform().powf(1.0 / shape);
            return self.gamma(shape + 1.0) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform();
            if u < 1.0 - 0.0331 * x * x * x * x {
                return d * v;
            }
            if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Chi variate with `dof > 0` degrees of freedom.
    pub fn chi(&mut self, dof: f64) -> f64 {
        self.chi_squared(dof).sqrt()
    }

    pub fn chi_squared(&mut self, dof: f64) -> f64 {
        if dof <= SUM_OF_SQUARES_MAX_DOF && dof.fract() == 0.0 {
            let mut acc = 0.0;
            for _ in 0..dof as usize {
                let z = self.normal();
                acc += z * z;
            }
            acc
        } else {
            2.0 * self.gamma(0.5 * dof)
        }
    }
}
