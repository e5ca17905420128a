//! Seeded data-generating processes with known dependence structure.

use std::sync::LazyLock;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::rng::stream_rng;

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Generated { descriptor: serde_json::Value, seed: u64 },
    Ingested { source: Option<String> },
}

/// Observations `Y_0, ..., Y_n`; the lagged pairs `(Y_{i-1}, Y_i)` run over `i = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateSeries {
    values: Vec<f64>,
    pub origin: Origin,
}

impl UnivariateSeries {
    pub fn new(values: Vec<f64>, origin: Origin) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a series needs Y_0 and at least one further value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("series entry {i}")));
        }
        Ok(Self { values, origin })
    }

    /// Number of lagged pairs.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Y_0, ..., Y_{n-1}`.
    pub fn lagged(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }

    /// `Y_1, ..., Y_n`.
    pub fn responses(&self) -> &[f64] {
        &self.values[1..]
    }
}

/// Responses `Y_t` with regressors `X_t` in `R^d`, `t = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    responses: Vec<f64>,
    regressors: Vec<Vec<f64>>,
    d: usize,
    pub origin: Origin,
}

impl RegressionSample {
    pub fn new(responses: Vec<f64>, regressors: Vec<Vec<f64>>, origin: Origin) -> Result<Self> {
        if responses.is_empty() {
            return Err(invalid("regression sample must be nonempty"));
        }
        if responses.len() != regressors.len() {
            return Err(invalid(format!(
                "{} responses but {} regressor points",
                responses.len(),
                regressors.len()
            )));
        }
        let d = regressors[0].len();
        if d == 0 {
            return Err(invalid("regressor dimension must be positive"));
        }
        for (i, x) in regressors.iter().enumerate() {
            if x.len() != d {
                return Err(invalid(format!("regressor {i} has {} coordinates, expected {d}", x.len())));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("regressor {i}")));
            }
        }
        if let Some(i) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("response {i}")));
        }
        Ok(Self { responses, regressors, d, origin })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn regressors(&self) -> &[Vec<f64>] {
        &self.regressors
    }
}

/// Parametric strong-mixing coefficient `alpha(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MixingSpec {
    Independent,
    MDependent { m: u64 },
    Polynomial { c: f64, beta: f64 },
    Geometric { c: f64, rho: f64 },
}

/// Mixing coefficients never exceed 1/4.
pub const ALPHA_CAP: f64 = 0.25;

impl MixingSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MixingSpec::Polynomial { c, beta } if !(c >= 0.0 && beta >= 0.0 && c.is_finite() && beta.is_finite()) => {
                Err(invalid("polynomial mixing needs finite C >= 0 and beta >= 0"))
            }
            MixingSpec::Geometric { c, rho } if !(c >= 0.0 && c.is_finite() && rho > 0.0 && rho < 1.0) => {
                Err(invalid("geometric mixing needs finite c >= 0 and rho in (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// The mixing coefficient at lag `t`; `alpha(0) = 1`.
    pub fn alpha(&self, t: u64) -> f64 {
        if t == 0 {
            return 1.0;
        }
        match *self {
            MixingSpec::Independent => 0.0,
            MixingSpec::MDependent { m } => {
                if t > m {
                    0.0
                } else {
                    ALPHA_CAP
                }
            }
            MixingSpec::Polynomial { c, beta } => ALPHA_CAP.min(c * (t as f64).powf(-beta)),
            MixingSpec::Geometric { c, rho } => ALPHA_CAP.min(c * rho.powf(t as f64)),
        }
    }
}

pub fn alpha_of(spec: &MixingSpec, t: u64) -> f64 {
    spec.alpha(t)
}

/// Innovation law for the generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Innovation {
    Gaussian { sigma: f64 },
    /// Student-t with `nu` degrees of freedom rescaled to variance `sigma^2`.
    StudentT { nu: f64, sigma: f64 },
    /// `sigma * eta_t * g(eta_{t-1})`, a 1-dependent martingale difference sequence.
    OneDependentMds { sigma: f64 },
    /// `eps == 0`.
    Zero,
}

impl Innovation {
    /// Checks parameters and that absolute moments of order `moment_order` exist.
    pub fn validate(&self, moment_order: f64) -> Result<()> {
        match *self {
            Innovation::Gaussian { sigma } | Innovation::OneDependentMds { sigma } => {
                if sigma.is_finite() && sigma >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid("innovation sigma must be finite and nonnegative"))
                }
            }
            Innovation::StudentT { nu, sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0 && nu.is_finite()) {
                    return Err(invalid("student-t needs finite nu and sigma >= 0"));
                }
                if nu <= 2.0 || nu <= moment_order {
                    return Err(invalid(format!(
                        "student-t with nu = {nu} has no finite moment of order {}",
                        moment_order.max(2.0)
                    )));
                }
                Ok(())
            }
            Innovation::Zero => Ok(()),
        }
    }

    pub fn mixing(&self) -> MixingSpec {
        match self {
            Innovation::OneDependentMds { .. } => MixingSpec::MDependent { m: 1 },
            _ => MixingSpec::Independent,
        }
    }

    /// Draws `len` consecutive innovations.
    pub fn generate<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            Innovation::Gaussian { sigma } => (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    sigma * z
                })
                .collect(),
            Innovation::StudentT { nu, sigma } => {
                let t = StudentT::new(nu).expect("validated degrees of freedom");
                let scale = sigma * ((nu - 2.0) / nu).sqrt();
                (0..len).map(|_| scale * t.sample(rng)).collect()
            }
            Innovation::OneDependentMds { sigma } => {
                mds_from_normals(rng, len).into_iter().map(|e| sigma * e).collect()
            }
            Innovation::Zero => vec![0.0; len],
        }
    }
}

/// Normalizing constant `a` of `g(eta) = a (1 + tanh(eta) / 2)`, chosen so that `E[g(eta)^2] = 1`.
pub static MDS_SCALE: LazyLock<f64> = LazyLock::new(|| {
    let dens = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let f = |x: f64| {
        let g = 1.0 + 0.5 * x.tanh();
        g * g * dens(x)
    };
    let mut second = 0.0;
    for k in -12..12 {
        second += quad::adaptive_simpson(&f, k as f64, k as f64 + 1.0, 1e-14);
    }
    1.0 / second.sqrt()
});

pub fn mds_link(eta: f64) -> f64 {
    *MDS_SCALE * (1.0 + 0.5 * eta.tanh())
}

fn mds_from_normals<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut prev: f64 = StandardNormal.sample(rng);
    (0..len)
        .map(|_| {
            let eta: f64 = StandardNormal.sample(rng);
            let e = eta * mds_link(prev);
            prev = eta;
            e
        })
        .collect()
}

/// Unit-variance 1-dependent martingale differences `eta_t * g(eta_{t-1})`.
pub fn gen_mds_innovations(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid("need n >= 2 innovations"));
    }
    Ok(mds_from_normals(&mut stream_rng(seed, 0), n))
}

fn default_moment_order() -> f64 {
    4.0
}

/// Two-regime mean-switching threshold model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetarSpec {
    pub n: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub threshold: f64,
    pub innovation: Innovation,
    #[serde(default)]
    pub burn_in: usize,
    /// Fixed `Y_0`; by default `Y_0 = mu1 + eps_0`.
    #[serde(default)]
    pub initial: Option<f64>,
    #[serde(default = "default_moment_order")]
    pub moment_order: f64,
}

impl SetarSpec {
    pub fn new(n: usize, mu1: f64, mu2: f64, threshold: f64, innovation: Innovation) -> Self {
        Self {
            n,
            mu1,
            mu2,
            threshold,
            innovation,
            burn_in: 0,
            initial: None,
            moment_order: default_moment_order(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("setar generator needs n >= 2"));
        }
        let finite = [self.mu1, self.mu2, self.threshold].iter().all(|v| v.is_finite())
            && self.initial.is_none_or(f64::is_finite);
        if !finite {
            return Err(Error::NonFinite("setar parameters".into()));
        }
        self.innovation.validate(self.moment_order)
    }
}

/// `Y_t = mu1 + eps_t` if `Y_{t-1} <= z`, else `mu2 + eps_t`.
pub fn gen_setar(spec: &SetarSpec, seed: u64) -> Result<UnivariateSeries> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    let total = spec.n + 1 + spec.burn_in;
    let eps = spec.innovation.generate(total, &mut rng);
    let mut values = Vec::with_capacity(total);
    values.push(spec.initial.unwrap_or(spec.mu1 + eps[0]));
    for t in 1..total {
        let mean = if values[t - 1] <= spec.threshold { spec.mu1 } else { spec.mu2 };
        values.push(mean + eps[t]);
    }
    values.drain(..spec.burn_in);
    let descriptor = serde_json::to_value(spec)?;
    UnivariateSeries::new(values, Origin::Generated { descriptor, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeanFn {
    Constant { value: f64 },
    /// `intercept + slopes . x`
    Linear { intercept: f64, slopes: Vec<f64> },
    /// `amplitude * sin(frequency * sum(x))`
    Sinusoidal { amplitude: f64, frequency: f64 },
}

impl MeanFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MeanFn::Constant { value } => *value,
            MeanFn::Linear { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
            }
            MeanFn::Sinusoidal { amplitude, frequency } => {
                amplitude * (frequency * x.iter().sum::<f64>()).sin()
            }
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            MeanFn::Linear { slopes, .. } if slopes.len() != d => {
                Err(invalid(format!("linear mean needs {d} slopes, got {}", slopes.len())))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScaleFn {
    Constant { value: f64 },
    Linear { intercept: f64, slopes: Vec<f64> },
    /// `base + amplitude * sin(frequency * sum(x))`
    Sinusoidal { base: f64, amplitude: f64, frequency: f64 },
}

impl ScaleFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScaleFn::Constant { value } => *value,
            ScaleFn::Linear { intercept, slopes } => {
                intercept + slopes.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
            }
            ScaleFn::Sinusoidal { base, amplitude, frequency } => {
                base + amplitude * (frequency * x.iter().sum::<f64>()).sin()
            }
        }
    }

    /// A constant zero scale is the noiseless model; any other scale must be
    /// strictly positive on the support of the regressors.
    fn validate(&self, d: usize, law: RegressorLaw) -> Result<()> {
        let ok = match self {
            ScaleFn::Constant { value } => *value >= 0.0 && value.is_finite(),
            ScaleFn::Linear { intercept, slopes } => {
                if slopes.len() != d {
                    return Err(invalid(format!("linear scale needs {d} slopes, got {}", slopes.len())));
                }
                match law {
                    RegressorLaw::UniformCube => {
                        intercept + slopes.iter().map(|b| b.min(0.0)).sum::<f64>() > 0.0
                    }
                    RegressorLaw::StandardGaussian => *intercept > 0.0 && slopes.iter().all(|&b| b == 0.0),
                }
            }
            ScaleFn::Sinusoidal { base, amplitude, .. } => base - amplitude.abs() > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("scale function is not strictly positive on the regressor support"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressorLaw {
    /// i.i.d. uniform on `[0, 1]^d`.
    UniformCube,
    StandardGaussian,
}

/// Mean function switches to `after` for indices `t > floor(theta * n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Changepoint {
    pub theta: f64,
    pub after: MeanFn,
}

/// `Y_t = m_t(X_t) + sigma(X_t) eps_t` with i.i.d. regressors independent of the innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub n: usize,
    pub d: usize,
    pub mean_fn: MeanFn,
    pub scale_fn: ScaleFn,
    pub regressor_law: RegressorLaw,
    pub innovation: Innovation,
    #[serde(default)]
    pub changepoint: Option<Changepoint>,
}

impl RegressionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(invalid("regression generator needs n >= 1 and d >= 1"));
        }
        self.mean_fn.validate(self.d)?;
        self.scale_fn.validate(self.d, self.regressor_law)?;
        self.innovation.validate(2.0)?;
        if let Some(cp) = &self.changepoint {
            if !(cp.theta > 0.0 && cp.theta < 1.0) {
                return Err(invalid(format!("changepoint fraction {} outside (0, 1)", cp.theta)));
            }
            cp.after.validate(self.d)?;
        }
        Ok(())
    }
}

pub fn gen_regression(spec: &RegressionSpec, seed: u64) -> Result<RegressionSample> {
    spec.validate()?;
    let mut x_rng = stream_rng(seed, 1);
    let mut e_rng = stream_rng(seed, 2);
    let regressors: Vec<Vec<f64>> = (0..spec.n)
        .map(|_| {
            (0..spec.d)
                .map(|_| match spec.regressor_law {
                    RegressorLaw::UniformCube => x_rng.random::<f64>(),
                    RegressorLaw::StandardGaussian => StandardNormal.sample(&mut x_rng),
                })
                .collect()
        })
        .collect();
    let eps = spec.innovation.generate(spec.n, &mut e_rng);
    let switch = spec
        .changepoint
        .as_ref()
        .map(|cp| ((cp.theta * spec.n as f64).floor() as usize, &cp.after));
    let responses = regressors
        .iter()
        .zip(&eps)
        .enumerate()
        .map(|(i, (x, e))| {
            let mean = match switch {
                Some((k, after)) if i + 1 > k => after.eval(x),
                _ => spec.mean_fn.eval(x),
            };
            mean + spec.scale_fn.eval(x) * e
        })
        .collect();
    let descriptor = serde_json::to_value(spec)?;
    RegressionSample::new(responses, regressors, Origin::Generated { descriptor, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> Innovation {
        Innovation::Gaussian { sigma: 1.0 }
    }

    #[test]
    fn null_setar_is_plain_noise() {
        let spec = SetarSpec::new(4, 0.0, 0.0, 0.3, gaussian());
        let s = gen_setar(&spec, 11).unwrap();
        let eps = gaussian().generate(5, &mut stream_rng(11, 0));
        assert_eq!(s.values(), eps.as_slice());
        assert_eq!(s.n(), 4);
    }

    #[test]
    fn degenerate_recursion_sticks_in_lower_regime() {
        let mut spec = SetarSpec::new(3, -10.0, 10.0, 0.0, Innovation::Zero);
        spec.initial = Some(-1.0);
        let s = gen_setar(&spec, 0).unwrap();
        assert_eq!(s.values(), &[-1.0, -10.0, -10.0, -10.0]);
    }

    #[test]
    fn setar_is_deterministic() {
        let spec = SetarSpec::new(50, 0.0, 1.0, 0.0, Innovation::StudentT { nu: 8.0, sigma: 1.0 });
        assert_eq!(gen_setar(&spec, 5).unwrap(), gen_setar(&spec, 5).unwrap());
        assert_ne!(gen_setar(&spec, 5).unwrap().values(), gen_setar(&spec, 6).unwrap().values());
    }

    #[test]
    fn null_setar_ignores_threshold() {
        let a = gen_setar(&SetarSpec::new(100, 2.0, 2.0, -5.0, gaussian()), 9).unwrap();
        let b = gen_setar(&SetarSpec::new(100, 2.0, 2.0, 5.0, gaussian()), 9).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn burn_in_keeps_length() {
        let mut spec = SetarSpec::new(10, 0.0, 1.0, 0.0, gaussian());
        spec.burn_in = 7;
        assert_eq!(gen_setar(&spec, 1).unwrap().values().len(), 11);
    }

    #[test]
    fn setar_errors() {
        assert!(gen_setar(&SetarSpec::new(1, 0.0, 0.0, 0.0, gaussian()), 0).is_err());
        assert!(gen_setar(&SetarSpec::new(5, f64::NAN, 0.0, 0.0, gaussian()), 0).is_err());
        let t = Innovation::StudentT { nu: 3.5, sigma: 1.0 };
        assert!(gen_setar(&SetarSpec::new(5, 0.0, 0.0, 0.0, t), 0).is_err());
    }

    #[test]
    fn student_t_has_requested_variance() {
        let e = Innovation::StudentT { nu: 10.0, sigma: 2.0 }.generate(200_000, &mut stream_rng(3, 0));
        let var = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
        assert!((var - 4.0).abs() < 0.1, "{var}");
    }

    fn base_regression() -> RegressionSpec {
        RegressionSpec {
            n: 200,
            d: 1,
            mean_fn: MeanFn::Constant { value: 0.0 },
            scale_fn: ScaleFn::Constant { value: 1.0 },
            regressor_law: RegressorLaw::UniformCube,
            innovation: gaussian(),
            changepoint: None,
        }
    }

    #[test]
    fn responses_equal_innovations_for_unit_model() {
        let spec = base_regression();
        let s = gen_regression(&spec, 4).unwrap();
        let eps = gaussian().generate(spec.n, &mut stream_rng(4, 2));
        assert_eq!(s.responses(), eps.as_slice());
    }

    #[test]
    fn noiseless_identity_mean() {
        let mut spec = base_regression();
        spec.n = 2;
        spec.mean_fn = MeanFn::Linear { intercept: 0.0, slopes: vec![1.0] };
        spec.scale_fn = ScaleFn::Constant { value: 0.0 };
        let s = gen_regression(&spec, 8).unwrap();
        for (y, x) in s.responses().iter().zip(s.regressors()) {
            assert_eq!(*y, x[0]);
        }
    }

    #[test]
    fn changepoint_shifts_second_half() {
        let mut spec = base_regression();
        spec.n = 20_000;
        spec.changepoint = Some(Changepoint { theta: 0.5, after: MeanFn::Constant { value: 1.0 } });
        let s = gen_regression(&spec, 21).unwrap();
        let half = spec.n / 2;
        let m1 = s.responses()[..half].iter().sum::<f64>() / half as f64;
        let m2 = s.responses()[half..].iter().sum::<f64>() / half as f64;
        let se = (2.0 / half as f64).sqrt();
        assert!((m2 - m1 - 1.0).abs() < 3.0 * se, "{m1} {m2}");
    }

    #[test]
    fn regression_errors() {
        let mut spec = base_regression();
        spec.scale_fn = ScaleFn::Linear { intercept: 0.5, slopes: vec![-1.0] };
        assert!(gen_regression(&spec, 0).is_err());
        let mut spec = base_regression();
        spec.scale_fn = ScaleFn::Constant { value: -1.0 };
        assert!(gen_regression(&spec, 0).is_err());
        let mut spec = base_regression();
        spec.changepoint = Some(Changepoint { theta: 1.0, after: MeanFn::Constant { value: 1.0 } });
        assert!(gen_regression(&spec, 0).is_err());
    }

    #[test]
    fn mds_moments() {
        let n = 1_000_000;
        let e = gen_mds_innovations(n, 77).unwrap();
        let nf = n as f64;
        let mean = e.iter().sum::<f64>() / nf;
        let second = e.iter().map(|v| v * v).sum::<f64>() / nf;
        let lag2 = e.windows(3).map(|w| w[0] * w[2]).sum::<f64>() / (nf - 2.0);
        // Bounded test function of the previous value.
        let mds = e.windows(2).map(|w| w[1] * w[0].atan()).sum::<f64>() / (nf - 1.0);
        let tol = 4.0 / nf.sqrt();
        assert!(mean.abs() < tol, "mean {mean}");
        assert!((second - 1.0).abs() < 0.01, "second moment {second}");
        assert!(lag2.abs() < tol, "lag-2 {lag2}");
        assert!(mds.abs() < 2.0 * tol, "mds {mds}");
    }

    #[test]
    fn mds_link_normalization() {
        // E[g(eta)^2] = a^2 (1 + E[tanh^2] / 4) must equal 1.
        assert!(*MDS_SCALE > 0.9 && *MDS_SCALE < 1.0);
        assert!(gen_mds_innovations(1, 0).is_err());
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_of(&MixingSpec::Independent, 1), 0.0);
        assert_eq!(alpha_of(&MixingSpec::MDependent { m: 1 }, 2), 0.0);
        assert_eq!(alpha_of(&MixingSpec::MDependent { m: 1 }, 1), 0.25);
        let p = alpha_of(&MixingSpec::Polynomial { c: 1.0, beta: 3.0 }, 10);
        assert!((p - 0.001).abs() < 1e-15);
        assert_eq!(alpha_of(&MixingSpec::Geometric { c: 1.0, rho: 0.5 }, 0), 1.0);
    }

    #[test]
    fn alpha_nonincreasing_and_bounded() {
        let specs = [
            MixingSpec::Independent,
            MixingSpec::MDependent { m: 3 },
            MixingSpec::Polynomial { c: 2.0, beta: 1.5 },
            MixingSpec::Geometric { c: 5.0, rho: 0.8 },
        ];
        for spec in specs {
            spec.validate().unwrap();
            for t in 0..100 {
                let (a, b) = (spec.alpha(t), spec.alpha(t + 1));
                assert!(b <= a && (0.0..=1.0).contains(&b), "{spec:?} at {t}");
            }
        }
        assert!(MixingSpec::Geometric { c: 1.0, rho: 1.0 }.validate().is_err());
    }
}
