//! Service-time laws.
//!
//! Every law is parameterized so that `mean() = 1/mu` (except the
//! deterministic law, whose mean is its constant). The analytic engines
//! consume a law only through [`ServiceDistribution::mgf_triple`] and
//! [`ServiceDistribution::residual`], evaluated at the arrival rate.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};

use crate::error::{non_negative, positive, Error, Result};

/// Parameters of a supported service-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// Shape `k`, mean `1/mu` (rate parameter `k * mu`).
    Gamma { k: f64, mu: f64 },
    /// Shape `alpha`, mean `1/mu`.
    InverseGaussian { alpha: f64, mu: f64 },
    /// Rate `mu`.
    Exponential { mu: f64 },
    /// Constant service time `c`.
    Deterministic { c: f64 },
}

/// A validated service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDistribution(Law);

/// `(E[e^{-γS}], E[S e^{-γS}], E[S² e^{-γS}])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfTriple {
    pub mgf: f64,
    pub mgf1: f64,
    pub mgf2: f64,
}

/// Statistics of the residual service time seen by a Poisson arrival
/// during a busy period (density `P(S > r) / E[S]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    /// `E[e^{-γR}]`.
    pub mgf_r: f64,
    /// `E[R e^{-γR}]`.
    pub mgf_r1: f64,
    /// `E[R] = E[S²] / (2 E[S])`.
    pub mean_r: f64,
}

impl ServiceDistribution {
    pub fn new(law: Law) -> Result<Self> {
        match law {
            Law::Gamma { k, mu } => {
                positive("k", k)?;
                positive("mu", mu)?;
            }
            Law::InverseGaussian { alpha, mu } => {
                positive("alpha", alpha)?;
                positive("mu", mu)?;
            }
            Law::Exponential { mu } => {
                positive("mu", mu)?;
            }
            Law::Deterministic { c } => {
                non_negative("c", c)?;
            }
        }
        Ok(Self(law))
    }

    pub fn gamma(k: f64, mu: f64) -> Result<Self> {
        Self::new(Law::Gamma { k, mu })
    }

    pub fn inverse_gaussian(alpha: f64, mu: f64) -> Result<Self> {
        Self::new(Law::InverseGaussian { alpha, mu })
    }

    pub fn exponential(mu: f64) -> Result<Self> {
        Self::new(Law::Exponential { mu })
    }

    pub fn deterministic(c: f64) -> Result<Self> {
        Self::new(Law::Deterministic { c })
    }

    pub fn law(&self) -> Law {
        self.0
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            Law::Gamma { mu, .. } | Law::InverseGaussian { mu, .. } | Law::Exponential { mu } => {
                1.0 / mu
            }
            Law::Deterministic { c } => c,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self.0 {
            Law::Gamma { k, mu } => (k + 1.0) / (k * mu * mu),
            Law::InverseGaussian { alpha, mu } => 1.0 / (mu * mu) + 1.0 / (alpha * mu * mu * mu),
            Law::Exponential { mu } => 2.0 / (mu * mu),
            Law::Deterministic { c } => c * c,
        }
    }

    /// `ln E[e^{-γS}]`, computed without cancellation.
    fn log_mgf(&self, gamma: f64) -> f64 {
        match self.0 {
            Law::Gamma { k, mu } => -k * (gamma / (k * mu)).ln_1p(),
            Law::InverseGaussian { alpha, mu } => {
                // alpha*mu*(1 - q) rewritten as -2γ / (mu (1 + q)).
                let q = (1.0 + 2.0 * gamma / (alpha * mu * mu)).sqrt();
                -2.0 * gamma / (mu * (1.0 + q))
            }
            Law::Exponential { mu } => -(gamma / mu).ln_1p(),
            Law::Deterministic { c } => -gamma * c,
        }
    }

    /// MGF at `-gamma` and its first two derivatives (up to sign).
    ///
    /// Panics if `gamma` is negative or NaN.
    pub fn mgf_triple(&self, gamma: f64) -> MgfTriple {
        assert!(gamma >= 0.0, "mgf_triple requires gamma >= 0, got {gamma}");
        let mgf = self.log_mgf(gamma).exp();
        match self.0 {
            Law::Gamma { k, mu } => {
                let b = 1.0 + gamma / (k * mu);
                MgfTriple {
                    mgf,
                    mgf1: mgf / (mu * b),
                    mgf2: (k + 1.0) / (k * mu * mu) * mgf / (b * b),
                }
            }
            Law::InverseGaussian { alpha, mu } => {
                let q = (1.0 + 2.0 * gamma / (alpha * mu * mu)).sqrt();
                let mgf1 = mgf / (mu * q);
                MgfTriple {
                    mgf,
                    mgf1,
                    mgf2: mgf1 / (mu * q) + mgf / (alpha * mu.powi(3) * q.powi(3)),
                }
            }
            Law::Exponential { mu } => {
                let b = 1.0 + gamma / mu;
                MgfTriple {
                    mgf,
                    mgf1: mgf / (mu * b),
                    mgf2: 2.0 / (mu * mu) * mgf / (b * b),
                }
            }
            Law::Deterministic { c } => MgfTriple {
                mgf,
                mgf1: c * mgf,
                mgf2: c * c * mgf,
            },
        }
    }

    /// `1 - E[e^{-γS}]` without cancellation at small `γ`.
    pub fn one_minus_mgf(&self, gamma: f64) -> f64 {
        -self.log_mgf(gamma).exp_m1()
    }

    /// Residual-service statistics at rate `gamma > 0`.
    pub fn residual(&self, gamma: f64) -> Result<ResidualStats> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "residual statistics need gamma > 0, got {gamma}"
            )));
        }
        let mean = self.mean();
        if mean <= 0.0 {
            return Err(Error::Domain(
                "residual statistics need a positive mean service time".into(),
            ));
        }
        let one_minus = self.one_minus_mgf(gamma);
        let mgf1 = self.mgf_triple(gamma).mgf1;
        Ok(ResidualStats {
            mgf_r: one_minus / (gamma * mean),
            mgf_r1: (one_minus - gamma * mgf1) / (gamma * gamma * mean),
            mean_r: self.second_moment() / (2.0 * mean),
        })
    }

    /// Draws one service time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            Law::Gamma { k, mu } => sample_gamma(rng, k) / (k * mu),
            Law::InverseGaussian { alpha, mu } => sample_inverse_gaussian(rng, 1.0 / mu, alpha),
            Law::Exponential { mu } => {
                let e: f64 = rng.sample(Exp1);
                e / mu
            }
            Law::Deterministic { c } => c,
        }
    }
}

impl rand::distributions::Distribution<f64> for ServiceDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        ServiceDistribution::sample(self, rng)
    }
}

/// Unit-scale gamma variate with shape `k`.
///
/// Marsaglia-Tsang squeeze/rejection for `k >= 1`; for `k < 1` the
/// `G(k) = G(k+1) U^{1/k}` boost, carried out in the log domain so
/// tiny shapes (`k = 0.05`) do not underflow prematurely.
fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, k: f64) -> f64 {
    if k < 1.0 {
        let g = marsaglia_tsang(rng, k + 1.0);
        let u: f64 = rng.sample(Open01);
        return (g.ln() + u.ln() / k).exp();
    }
    marsaglia_tsang(rng, k)
}

fn marsaglia_tsang<R: Rng + ?Sized>(rng: &mut R, k: f64) -> f64 {
    let d = k - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Michael-Schucany-Haas transformation with mean `m` and shape `shape`.
///
/// The two roots of the transformation satisfy `x_small * x_large = m²`;
/// the small root is obtained from the large one to avoid cancellation
/// at heavy-tail parameters.
fn sample_inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, m: f64, shape: f64) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    let y = m * v * v;
    let large = m + m / (2.0 * shape) * (y + (4.0 * shape * y + y * y).sqrt());
    let small = m * m / large;
    let u: f64 = rng.gen();
    if u <= m / (m + small) {
        small
    } else {
        large
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Law::Gamma { k, mu } => write!(f, "gamma:k={k},mu={mu}"),
            Law::InverseGaussian { alpha, mu } => write!(f, "invgauss:alpha={alpha},mu={mu}"),
            Law::Exponential { mu } => write!(f, "exp:mu={mu}"),
            Law::Deterministic { c } => write!(f, "det:c={c}"),
        }
    }
}

impl FromStr for ServiceDistribution {
    type Err = Error;

    /// Parses `gamma:k=<f>,mu=<f>`, `invgauss:alpha=<f>,mu=<f>`,
    /// `exp:mu=<f>` or `det:c=<f>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            input: s.to_string(),
            reason,
        };
        let (name, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| parse_err("expected `<name>:<key>=<value>,...`".into()))?;

        let mut params: Vec<(&str, f64)> = Vec::new();
        for item in rest.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| parse_err(format!("parameter `{item}` is not key=value")))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("`{value}` is not a number")))?;
            if params.iter().any(|(k, _)| *k == key) {
                return Err(parse_err(format!("duplicate parameter `{key}`")));
            }
            params.push((key, value));
        }

        let expected: &[&str] = match name.trim() {
            "gamma" => &["k", "mu"],
            "invgauss" => &["alpha", "mu"],
            "exp" => &["mu"],
            "det" => &["c"],
            other => return Err(parse_err(format!("unknown distribution `{other}`"))),
        };
        if let Some((key, _)) = params.iter().find(|(k, _)| !expected.contains(k)) {
            return Err(parse_err(format!("unexpected parameter `{key}`")));
        }
        let get = |key: &str| {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| parse_err(format!("missing parameter `{key}`")))
        };

        let law = match name.trim() {
            "gamma" => Law::Gamma {
                k: get("k")?,
                mu: get("mu")?,
            },
            "invgauss" => Law::InverseGaussian {
                alpha: get("alpha")?,
                mu: get("mu")?,
            },
            "exp" => Law::Exponential { mu: get("mu")? },
            _ => Law::Deterministic { c: get("c")? },
        };
        ServiceDistribution::new(law)
    }
}
