//! Airy function Ai and its derivative on the real line.
//!
//! Three regimes:
//! * `-10.5 <= x <= 9`: Maclaurin series `Ai = c1 f(x) - c2 g(x)` summed in
//!   double-double arithmetic. The auxiliary series reach magnitudes near
//!   `exp(2/3 |x|^{3/2})` while Ai itself may be tiny, so plain `f64`
//!   summation would lose up to eleven digits to cancellation.
//! * `x > 9`: the exponentially decaying asymptotic expansion.
//! * `x < -10.5`: the oscillatory asymptotic expansion.
//!
//! At both seams the truncation error of the asymptotic branch is below
//! `exp(-2 zeta) < 3e-16` relative, so the branches agree to a few ulps.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::{FRAC_PI_4, PI};


use super::dd::Dd;
use super::quadrature::gauss_legendre;

/// Ai(0) = 3^{-2/3} / Gamma(2/3), split into two doubles.
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
/// -Ai'(0) = 3^{-1/3} / Gamma(1/3), split into two doubles.
const NEG_AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

const SERIES_RIGHT: f64 = 9.0;
const SERIES_LEFT: f64 = -10.5;

/// Value and derivative of Ai at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
}

/// Ai(x).
pub fn airy_ai(x: f64) -> f64 {
    airy(x).ai
}

/// Ai'(x).
pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).ai_prime
}

/// Ai(x) and Ai'(x) together; cheaper than two separate calls.
pub fn airy(x: f64) -> AiryPair {
    if x.is_nan() {
        return AiryPair {
            ai: f64::NAN,
            ai_prime: f64::NAN,
        };
    }
    if x > SERIES_RIGHT {
        asymptotic_positive(x)
    } else if x < SERIES_LEFT {
        asymptotic_negative(-x)
    } else {
        maclaurin(x)
    }
}

pub(crate) fn maclaurin(x: f64) -> AiryPair {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;

    // f = sum t_k, t_k = t_{k-1} x^3 / ((3k-1) 3k)
    // g = sum u_k, u_0 = x, u_k = u_{k-1} x^3 / (3k (3k+1))
    // f' = sum v_k, v_0 = x^2/2, v_k = v_{k-1} x^3 / (3k (3k+2))
    // g' = sum w_k, w_0 = 1, w_k = w_{k-1} x^3 / ((3k-2) 3k)
    let mut t = Dd::from_f64(1.0);
    let mut u = xd;
    let mut v = (xd * xd).div_f64(2.0);
    let mut w = Dd::from_f64(1.0);
    let (mut f, mut g, mut fp, mut gp) = (t, u, v, w);
    let mut peak: f64 = 1.0;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        t = (t * x3).div_f64((k3 - 1.0) * k3);
        u = (u * x3).div_f64(k3 * (k3 + 1.0));
        v = (v * x3).div_f64(k3 * (k3 + 2.0));
        w = (w * x3).div_f64((k3 - 2.0) * k3);
        f = f + t;
        g = g + u;
        fp = fp + v;
        gp = gp + w;
        peak = peak.max(f.abs_hi()).max(fp.abs_hi());
        let largest = t.abs_hi().max(u.abs_hi()).max(v.abs_hi()).max(w.abs_hi());
        if largest < 1e-34 * peak {
            break;
        }
    }
    let ai = AI0 * f - NEG_AIP0 * g;
    let aip = AI0 * fp - NEG_AIP0 * gp;
    AiryPair {
        ai: ai.to_f64(),
        ai_prime: aip.to_f64(),
    }
}

/// Coefficients u_k of the large-argument expansions (DLMF 9.7.2), with
/// v_k = -(6k+1)/(6k-1) u_k.
fn asymptotic_coefficient(k: usize, prev: f64) -> f64 {
    let k = k as f64;
    prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k)
}

fn asymptotic_positive(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut u = 1.0;
    let (mut su, mut sv) = (1.0, 1.0);
    let mut last = f64::INFINITY;
    let mut zpow = 1.0;
    for k in 1..60 {
        u = asymptotic_coefficient(k, u);
        zpow /= -zeta;
        let tu = u * zpow;
        let tv = -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * tu;
        if tu.abs() >= last {
            break;
        }
        last = tu.abs();
        su += tu;
        sv += tv;
        if last < 1e-18 {
            break;
        }
    }
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    AiryPair {
        ai: pref / q * su,
        ai_prime: -pref * q * sv,
    }
}

fn asymptotic_negative(z: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    // Even and odd partial sums of (-1)^k u_{2k} zeta^{-2k} etc.
    let (mut pu, mut qu, mut pv, mut qv) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        u = asymptotic_coefficient(k, u);
        zpow /= zeta;
        let tu = u * zpow;
        if tu.abs() >= last {
            break;
        }
        last = tu.abs();
        let tv = -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * tu;
        // sign (-1)^{floor(k/2)}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * tu;
            pv += sign * tv;
        } else {
            qu += sign * tu;
            qv += sign * tv;
        }
        if last < 1e-18 {
            break;
        }
    }
    let phase = zeta - FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let root_pi = PI.sqrt();
    let q = z.powf(0.25);
    AiryPair {
        ai: (c * pu + s * qu) / (q * root_pi),
        ai_prime: q / root_pi * (s * pv - c * qv),
    }
}

/// Tail integrals of Ai beyond `x`, used to start the Painleve integrals
/// at the right end of the grid where `q` is indistinguishable from Ai.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryTail {
    /// ∫_x^∞ Ai(t) dt
    pub ai: f64,
    /// ∫_x^∞ Ai(t)^2 dt
    pub ai_sq: f64,
    /// ∫_x^∞ (t - x) Ai(t)^2 dt
    pub moment: f64,
}

/// Tail integrals for `x >= 0`, by Gauss-Legendre on panels covering `[x, x+16]`.
pub fn airy_tail(x: f64) -> AiryTail {
    debug_assert!(x >= 0.0);
    let mut out = AiryTail {
        ai: 0.0,
        ai_sq: 0.0,
        moment: 0.0,
    };
    let width = 2.0;
    for panel in 0..8 {
        let a = x + panel as f64 * width;
        let rule = gauss_legendre(24, a, a + width).expect("valid rule");
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let ai = airy_ai(t);
            out.ai += w * ai;
            out.ai_sq += w * ai * ai;
            out.moment += w * (t - x) * ai * ai;
        }
    }
    out
}
