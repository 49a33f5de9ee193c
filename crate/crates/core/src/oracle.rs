//! Numerical integration used to cross-check closed forms.
//!
//! Nothing in the analytic engines calls into this module; it exists so
//! tests can compare closed-form MGFs and antiderivatives against direct
//! integration of the density.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::ln_gamma;

use crate::dist::{Law, MgfTriple, ServiceDistribution};
use crate::error::{Error, Result};

const TARGET_REL: f64 = 1e-10;
/// Half-width of the exp-sinh parameter range. At `t = ±7.5` the abscissa
/// is `c·e^{±1420}`, far outside the support of any law used here.
const T_MAX: f64 = 7.5;

/// `ln f_S(s)` given both `s` and `ln s` (the latter stays finite when `s`
/// underflows to zero).
fn log_density(law: Law, s: f64, ln_s: f64) -> Option<f64> {
    match law {
        Law::Gamma { k, mu } => {
            let rate = k * mu;
            Some(k * rate.ln() - ln_gamma(k) + (k - 1.0) * ln_s - rate * s)
        }
        Law::InverseGaussian { alpha, mu } => {
            if s == 0.0 {
                return Some(f64::NEG_INFINITY);
            }
            let dev = mu * s - 1.0;
            Some(0.5 * (alpha / (2.0 * PI)).ln() - 1.5 * ln_s - alpha * dev * dev / (2.0 * s))
        }
        Law::Exponential { mu } => Some(mu.ln() - mu * s),
        Law::Deterministic { .. } => None,
    }
}

/// Integrates `∫ s^j e^{-γ s} f_S(s) ds` for `j = 0, 1, 2` by exp-sinh
/// (double-exponential) quadrature on `[0, ∞)`, halving the step for up to
/// `levels` refinements until the relative change of every component is
/// below `1e-10`.
pub fn mgf_quadrature_oracle(
    dist: &ServiceDistribution,
    gamma: f64,
    levels: u32,
) -> Result<MgfTriple> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!(
            "oracle needs gamma >= 0, got {gamma}"
        )));
    }
    let law = dist.law();
    if matches!(law, Law::Deterministic { .. }) {
        return Err(Error::Domain(
            "deterministic service has no density to integrate".into(),
        ));
    }
    let ln_scale = dist.mean().ln();

    let node = |t: f64| -> [f64; 3] {
        let ln_s = ln_scale + FRAC_PI_2 * t.sinh();
        if ln_s > 700.0 {
            return [0.0; 3];
        }
        let s = ln_s.exp();
        let Some(ln_f) = log_density(law, s, ln_s) else {
            return [0.0; 3];
        };
        let ln_w = ln_s + (FRAC_PI_2 * t.cosh()).ln();
        let base = ln_f + ln_w - gamma * s;
        if !base.is_finite() {
            return [0.0; 3];
        }
        [base.exp(), (base + ln_s).exp(), (base + 2.0 * ln_s).exp()]
    };

    let mut h = 0.5;
    let mut sum = [0.0; 3];
    let n0 = (T_MAX / h) as i64;
    for i in -n0..=n0 {
        let v = node(i as f64 * h);
        for j in 0..3 {
            sum[j] += v[j];
        }
    }
    let mut estimate = sum.map(|s| s * h);
    let mut change = f64::INFINITY;

    for _ in 0..levels {
        h *= 0.5;
        let n = (T_MAX / h) as i64;
        // Only the odd multiples of the new step are new abscissae.
        let mut i = -n + ((n + 1) % 2);
        while i <= n {
            let v = node(i as f64 * h);
            for j in 0..3 {
                sum[j] += v[j];
            }
            i += 2;
        }
        let next = sum.map(|s| s * h);
        change = (0..3)
            .map(|j| (next[j] - estimate[j]).abs() / next[j].abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        estimate = next;
        if change <= TARGET_REL {
            return Ok(MgfTriple {
                mgf: estimate[0],
                mgf1: estimate[1],
                mgf2: estimate[2],
            });
        }
    }
    Err(Error::Quadrature { achieved: change })
}

/// `E[R e^{-γR}]` for the residual density `P(S > r)/E[S]`, by nested
/// quadrature: `∫∫_{r<s} r e^{-γ r} f_S(s) dr ds / E[S]`, with the inner
/// integral done in closed form.
pub fn residual_mgf1_oracle(dist: &ServiceDistribution, gamma: f64, levels: u32) -> Result<f64> {
    // ∫_0^s r e^{-γr} dr = (1 - e^{-γs}(1 + γs)) / γ², or s²/2 at γ = 0.
    let law = dist.law();
    if matches!(law, Law::Deterministic { .. }) {
        return Err(Error::Domain(
            "deterministic service has no density to integrate".into(),
        ));
    }
    let ln_scale = dist.mean().ln();
    let inner = |s: f64| -> f64 {
        if gamma == 0.0 {
            return 0.5 * s * s;
        }
        let x = gamma * s;
        if x < 1e-3 {
            // Series of 1 - e^{-x}(1+x) = x²/2 - x³/3 + x⁴/8 - ...
            s * s * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0)
        } else {
            (1.0 - (-x).exp() * (1.0 + x)) / (gamma * gamma)
        }
    };
    let node = |t: f64| -> f64 {
        let ln_s = ln_scale + FRAC_PI_2 * t.sinh();
        if ln_s > 700.0 {
            return 0.0;
        }
        let s = ln_s.exp();
        let Some(ln_f) = log_density(law, s, ln_s) else {
            return 0.0;
        };
        let v = ln_f + ln_s + (FRAC_PI_2 * t.cosh()).ln();
        if !v.is_finite() {
            return 0.0;
        }
        v.exp() * inner(s)
    };

    let mut h = 0.5;
    let n0 = (T_MAX / h) as i64;
    let mut sum: f64 = (-n0..=n0).map(|i| node(i as f64 * h)).sum();
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..levels {
        h *= 0.5;
        let n = (T_MAX / h) as i64;
        let mut i = -n + ((n + 1) % 2);
        while i <= n {
            sum += node(i as f64 * h);
            i += 2;
        }
        let next = sum * h;
        change = (next - estimate).abs() / next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if change <= TARGET_REL {
            return Ok(estimate / dist.mean());
        }
    }
    Err(Error::Quadrature { achieved: change })
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    (f(a) + f(b) + 4.0 * odd + 2.0 * even) * h / 3.0
}
