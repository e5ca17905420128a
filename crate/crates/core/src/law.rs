//! Marginal laws with analytic distribution functions, plus the empirical law.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Law {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    /// Plug-in law putting mass 1/n on every observation.
    Empirical { values: Vec<f64> },
}

impl Law {
    pub fn standard_uniform() -> Self {
        Law::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn standard_gaussian() -> Self {
        Law::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Law::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
            Law::Uniform { .. } => Err(invalid("uniform law needs finite lo < hi")),
            Law::Gaussian { mean, sd } if mean.is_finite() && sd.is_finite() && *sd > 0.0 => Ok(()),
            Law::Gaussian { .. } => Err(invalid("gaussian law needs finite mean and sd > 0")),
            Law::Empirical { values } if !values.is_empty() && values.iter().all(|v| v.is_finite()) => Ok(()),
            Law::Empirical { .. } => Err(invalid("empirical law needs finite, nonempty values")),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Law::Gaussian { mean, sd } => normal(*mean, *sd).cdf(x),
            Law::Empirical { values } => {
                values.iter().filter(|&&v| v <= x).count() as f64 / values.len() as f64
            }
        }
    }

    /// Quantile function on `[0, 1]`; only catalog laws have one.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
        match self {
            Law::Uniform { lo, hi } => Ok(lo + p * (hi - lo)),
            Law::Gaussian { mean, sd } => Ok(normal(*mean, *sd).inverse_cdf(p)),
            Law::Empirical { .. } => Err(Error::UnsupportedLaw(
                "empirical law has no invertible distribution function".into(),
            )),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Law::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Law::Empirical { values } => values[rng.random_range(0..values.len())],
        }
    }

    /// `E[h(X)]`, exact for the empirical law and by quadrature over the
    /// quantile function for catalog laws.
    pub fn expect<F: Fn(f64) -> f64>(&self, h: F) -> Result<f64> {
        let value = match self {
            Law::Empirical { values } => values.iter().map(|&v| h(v)).sum::<f64>() / values.len() as f64,
            Law::Uniform { lo, hi } => {
                let width = hi - lo;
                quad::adaptive_simpson(&|u: f64| h(lo + width * u), 0.0, 1.0, 1e-11)
            }
            Law::Gaussian { mean, sd } => {
                // Integrate against the density on +-12 sd; the remaining mass is < 1e-32.
                let dens = |x: f64| {
                    let z = (x - mean) / sd;
                    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
                };
                let f = |x: f64| h(x) * dens(x);
                let mut total = 0.0;
                for k in -12..12 {
                    let a = mean + sd * k as f64;
                    total += quad::adaptive_simpson(&f, a, a + sd, 1e-12);
                }
                total
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite("moment estimate".into()))
        }
    }
}

fn normal(mean: f64, sd: f64) -> Normal {
    Normal::new(mean, sd).expect("validated gaussian parameters")
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    normal(0.0, 1.0).cdf(x)
}

/// Standard normal quantile.
pub fn std_normal_quantile(p: f64) -> f64 {
    normal(0.0, 1.0).inverse_cdf(p)
}
