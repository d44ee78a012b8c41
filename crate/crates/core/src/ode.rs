//! Adaptive Dormand-Prince 5(4) integration of small first-order systems.


#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction) with
/// error-per-step control, returning the state at `x1`.
///
/// `h` carries the step-size suggestion in and out so consecutive calls over
/// adjacent intervals do not restart from scratch.
pub fn dopri5<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x1: f64,
    tol: Tolerance,
    h: &mut f64,
    stats: &mut StepStats,
) -> Result<[f64; N]> {
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    if span == 0.0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut step = h.abs().min(span).max(span * 1e-12);
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, &y);
    let mut steps = 0usize;
    loop {
        let remaining = (x1 - x).abs();
        let last = step >= remaining * (1.0 - 1e-12);
        let hs = if last { remaining } else { step } * dir;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[stage] = f(x + C[stage] * hs, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0;
        for i in 0..N {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for stage in 0..7 {
                s5 += B5[stage] * k[stage][i];
                s4 += B4[stage] * k[stage][i];
            }
            y5[i] += hs * s5;
            let scale = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            let e = hs * (s5 - s4) / scale;
            err += e * e;
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                at: x,
                reason: "non-finite state",
            });
        }
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Integration {
                at: x,
                reason: "step budget exhausted",
            });
        }
        if err <= 1.0 {
            stats.accepted += 1;
            x = if last { x1 } else { x + hs };
            y = y5;
            k[0] = k[6];
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if last {
                *h = step * grow;
                return Ok(y);
            }
            step *= grow;
        } else {
            stats.rejected += 1;
            step *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if step < span * 1e-14 {
                return Err(Error::Integration {
                    at: x,
                    reason: "step size underflow",
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let tol = Tolerance { atol: 1e-12, rtol: 1e-12 };
        let mut h = 0.1;
        let mut stats = StepStats::default();
        let two_pi = 2.0 * core::f64::consts::PI;
        let y = dopri5(&mut |_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], two_pi, tol, &mut h, &mut stats)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn integrates_backwards() {
        let tol = Tolerance { atol: 1e-13, rtol: 1e-13 };
        let mut h = 0.05;
        let mut stats = StepStats::default();
        let y = dopri5(&mut |_, y: &[f64; 1]| [y[0]], 2.0, [2f64.exp()], -1.0, tol, &mut h, &mut stats).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
    }
}
