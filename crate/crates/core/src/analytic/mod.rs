//! Closed-form average AoI and average peak AoI.
//!
//! Both schemes are analyzed through an equivalent FCFS model in which no
//! packet is dropped and packets captured by the same service period are
//! delivered together. With `X_i` the inter-arrival time before packet `i`
//! and `T_i` its system time in that model,
//!
//! ```text
//! E[Δ] = λ E[X T] + 1/λ,
//! ```
//!
//! and `E[X T]` is obtained by conditioning on the state observed by
//! packet `i-1` (PASTA), weighted by the stationary state probabilities.

pub mod mg11;
pub mod mg12star;

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::{Scheme, SysState};

pub use mg11::QueueConfig11;
pub use mg12star::QueueConfig2s;

/// Average AoI and average peak AoI of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiMetrics {
    pub avg_aoi: f64,
    pub avg_peak_aoi: f64,
}

/// Evaluates both metrics. `eps_b` is ignored for [`Scheme::Mg11`].
pub fn evaluate(
    scheme: Scheme,
    dist: &ServiceDistribution,
    lambda: f64,
    eps_i: f64,
    eps_b: f64,
) -> Result<AoiMetrics> {
    let m = match scheme {
        Scheme::Mg11 => {
            let cfg = QueueConfig11::new(lambda, eps_i, *dist)?;
            AoiMetrics {
                avg_aoi: mg11::avg_aoi_11(&cfg),
                avg_peak_aoi: mg11::avg_peak_aoi_11(&cfg),
            }
        }
        Scheme::Mg12Star => {
            let cfg = QueueConfig2s::new(lambda, eps_i, eps_b, *dist)?;
            AoiMetrics {
                avg_aoi: mg12star::avg_aoi_2s(&cfg),
                avg_peak_aoi: mg12star::avg_peak_aoi_2s(&cfg),
            }
        }
    };
    if !(m.avg_aoi.is_finite() && m.avg_peak_aoi.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite result: average AoI {}, average peak AoI {}",
            m.avg_aoi, m.avg_peak_aoi
        )));
    }
    Ok(m)
}

/// Service and residual-service statistics evaluated at `γ = λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateContext {
    pub lambda: f64,
    /// `E[S]`
    pub mean: f64,
    /// `E[S²]`
    pub second: f64,
    /// `E[e^{-λS}]`
    pub m: f64,
    /// `E[S e^{-λS}]`
    pub m1: f64,
    /// `E[S² e^{-λS}]`
    pub m2: f64,
    /// `1 - E[e^{-λS}]`, kept separately for accuracy.
    pub one_minus_m: f64,
    /// `E[e^{-λR}]`
    pub mr: f64,
    /// `E[R e^{-λR}]`
    pub mr1: f64,
    /// `E[R]`
    pub er: f64,
}

impl RateContext {
    pub fn new(dist: &ServiceDistribution, lambda: f64) -> Result<Self> {
        let t = dist.mgf_triple(lambda);
        let r = dist.residual(lambda)?;
        Ok(Self {
            lambda,
            mean: dist.mean(),
            second: dist.second_moment(),
            m: t.mgf,
            m1: t.mgf1,
            m2: t.mgf2,
            one_minus_m: dist.one_minus_mgf(lambda),
            mr: r.mgf_r,
            mr1: r.mgf_r1,
            er: r.mean_r,
        })
    }

    /// `e^{-λu}`
    pub(crate) fn decay(&self, u: f64) -> f64 {
        (-self.lambda * u).exp()
    }

    /// `∫_0^u x λ e^{-λx} dx = (1 - e^{-λu}(1 + λu)) / λ`
    pub(crate) fn head1(&self, u: f64) -> f64 {
        erlang_lower(2, self.lambda * u) / self.lambda
    }

    /// `∫_0^u x² λ e^{-λx} dx = (2 - e^{-λu}(2 + 2λu + λ²u²)) / λ²`
    pub(crate) fn head2(&self, u: f64) -> f64 {
        2.0 * erlang_lower(3, self.lambda * u) / (self.lambda * self.lambda)
    }
}

/// Per-state pieces of the peak-AoI computation: the state probability
/// `p_s`, `E[(X_i + T_i) 1{i = i*} | s]` and `Pr(i = i* | s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPiece {
    pub state: SysState,
    pub prob: f64,
    pub cond_value: f64,
    pub pr_first: f64,
}

/// Peak-AoI pieces for all reachable states of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakBreakdown {
    pub pieces: Vec<PeakPiece>,
}

impl PeakBreakdown {
    /// `E[(X_i + T_i) 1{i = i*}]`
    pub fn numerator(&self) -> f64 {
        neumaier(self.pieces.iter().map(|p| p.prob * p.cond_value))
    }

    /// `Pr(i = i*)`
    pub fn pr_first(&self) -> f64 {
        neumaier(self.pieces.iter().map(|p| p.prob * p.pr_first))
    }

    /// `E[X_{i*} + T_{i*}]` from the per-state pieces.
    pub fn peak(&self) -> f64 {
        self.numerator() / self.pr_first()
    }
}

/// Regularized lower incomplete gamma `P(n, x)` for small integer `n`:
/// `1 - e^{-x} Σ_{j<n} x^j / j!`, summed as a series for small `x` where
/// the direct form cancels.
pub(crate) fn erlang_lower(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1.0 {
        // e^{-x} Σ_{j≥n} x^j / j!
        let mut term = 1.0;
        for j in 1..=n {
            term *= x / j as f64;
        }
        let mut sum = 0.0;
        let mut j = n;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            j += 1;
            term *= x / j as f64;
            if term == 0.0 {
                break;
            }
        }
        return (-x).exp() * sum;
    }
    let mut term = 1.0;
    let mut partial = 1.0;
    for j in 1..n {
        term *= x / j as f64;
        partial += term;
    }
    1.0 - (-x).exp() * partial
}

/// Neumaier-compensated sum.
pub(crate) fn neumaier<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erlang_lower_matches_direct_form() {
        for x in [1e-6_f64, 1e-3, 0.2, 0.99, 1.0, 1.5, 7.0, 40.0] {
            let e = (-x).exp();
            let p2 = 1.0 - e * (1.0 + x);
            let p3 = 1.0 - e * (1.0 + x + x * x / 2.0);
            if x > 0.1 {
                assert!((erlang_lower(2, x) - p2).abs() < 1e-14, "x={x}");
                assert!((erlang_lower(3, x) - p3).abs() < 1e-14, "x={x}");
            } else {
                // leading series terms
                assert!((erlang_lower(2, x) / (x * x / 2.0) - 1.0).abs() < 1.0 * x);
                assert!((erlang_lower(3, x) / (x * x * x / 6.0) - 1.0).abs() < 1.0 * x);
            }
        }
        assert_eq!(erlang_lower(2, 0.0), 0.0);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = neumaier([1e16, 1.0, -1e16]);
        assert_eq!(v, 1.0);
    }
}
