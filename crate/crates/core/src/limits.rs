//! Limiting laws: Brownian bridge functionals and the plug-in Gaussian
//! process for the changepoint statistic.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empproc::{leq, validate_s_grid, Point};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, replication_rng, stream_rng};
use crate::seriesgen::RegressionSample;

pub const DEFAULT_BRIDGE_RESOLUTION: usize = 1024;
pub const DEFAULT_BRIDGE_REPS: usize = 100_000;
pub const DEFAULT_GAMMA_REPS: usize = 10_000;
pub const SCHEMA_VERSION: u32 = 1;

/// Brownian bridge on `{k / resolution}` from pinned Gaussian partial sums.
pub fn simulate_bridge<R: Rng + ?Sized>(resolution: usize, rng: &mut R) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(invalid("bridge resolution must be at least 2"));
    }
    let mut path = vec![0.0; resolution + 1];
    fill_bridge(&mut path, rng);
    Ok(path)
}

fn fill_bridge<R: Rng + ?Sized>(path: &mut [f64], rng: &mut R) {
    let m = path.len() - 1;
    let step = (1.0 / m as f64).sqrt();
    path[0] = 0.0;
    for k in 1..=m {
        let z: f64 = StandardNormal.sample(rng);
        path[k] = path[k - 1] + step * z;
    }
    let end = path[m];
    for (k, v) in path.iter_mut().enumerate() {
        *v -= (k as f64 / m as f64) * end;
    }
    path[m] = 0.0;
}

pub fn simulate_bridge_seeded(resolution: usize, seed: u64) -> Result<Vec<f64>> {
    simulate_bridge(resolution, &mut stream_rng(seed, 0))
}

/// Limiting distribution function of `sup |B_0|`.
///
/// Uses `1 - 2 sum (-1)^{k-1} exp(-2 k^2 x^2)` for `x >= 0.6` and the dual
/// theta series `sqrt(2 pi) / x sum exp(-(2k-1)^2 pi^2 / (8 x^2))` below,
/// where the alternating form converges slowly. Terms are summed until one
/// drops below `1e-12`.
pub fn ks_cdf(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return 0.0;
    }
    let value = if x >= 0.6 {
        let mut sum = 0.0;
        let mut k = 1u32;
        loop {
            let term = (-2.0 * (k as f64).powi(2) * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-12 {
                break;
            }
            k += 1;
        }
        1.0 - 2.0 * sum
    } else {
        let pi = std::f64::consts::PI;
        let mut sum = 0.0;
        let mut k = 1u32;
        loop {
            let odd = (2 * k - 1) as f64;
            let term = (-(odd * odd) * pi * pi / (8.0 * x * x)).exp();
            sum += term;
            if term < 1e-12 {
                break;
            }
            k += 1;
        }
        (2.0 * pi).sqrt() / x * sum
    };
    value.clamp(0.0, 1.0)
}

/// Inverse of [`ks_cdf`] by bisection.
pub fn ks_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("level {p} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (1e-3, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ks_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `sup_s |B_0(s)|`
    KsSup,
    /// `int_0^1 B_0(s)^2 ds`
    CvmIntegral,
    /// Sup of a user-specified Gaussian field over its grid.
    CustomSup,
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks" | "ks-sup" => Ok(Functional::KsSup),
            "cvm" | "cvm-integral" => Ok(Functional::CvmIntegral),
            "custom-sup" => Ok(Functional::CustomSup),
            other => Err(invalid(format!("unknown functional tag `{other}`"))),
        }
    }
}

/// Monte Carlo quantiles of a limit functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub schema_version: u32,
    pub functional: Functional,
    pub levels: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// Order-statistic standard errors of the quantiles.
    pub std_errors: Vec<f64>,
    pub reps: usize,
    pub resolution: usize,
    pub seed: u64,
    /// Sorted draws; empty for tables read back from JSON.
    #[serde(skip)]
    samples: Vec<f64>,
}

/// Levels `0.001, 0.002, ..., 0.999`.
pub fn dense_levels() -> Vec<f64> {
    (1..1000).map(|k| k as f64 / 1000.0).collect()
}

fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl QuantileTable {
    pub fn from_samples(
        functional: Functional,
        mut samples: Vec<f64>,
        levels: &[f64],
        resolution: usize,
        seed: u64,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("no draws"));
        }
        if levels.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(invalid("quantile levels must lie in (0, 1)"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("functional draw".into()));
        }
        let mut levels = levels.to_vec();
        levels.sort_by(f64::total_cmp);
        samples.sort_by(f64::total_cmp);
        let reps = samples.len();
        let quantiles: Vec<f64> = levels.iter().map(|&p| sorted_quantile(&samples, p)).collect();
        let std_errors = levels
            .iter()
            .map(|&p| {
                let half = (p * (1.0 - p) / reps as f64).sqrt();
                0.5 * (sorted_quantile(&samples, p + half) - sorted_quantile(&samples, p - half))
            })
            .collect();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            functional,
            levels,
            quantiles,
            std_errors,
            reps,
            resolution,
            seed,
            samples,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Quantile at `level`, from the draws when available, else interpolated in the table.
    pub fn quantile(&self, level: f64) -> f64 {
        if !self.samples.is_empty() {
            return sorted_quantile(&self.samples, level);
        }
        interpolate(&self.levels, &self.quantiles, level)
    }

    /// Upper-tail probability of `stat` under the tabulated law.
    pub fn p_value(&self, stat: f64) -> f64 {
        if !self.samples.is_empty() {
            let below = self.samples.partition_point(|&v| v < stat);
            return (self.samples.len() - below) as f64 / self.samples.len() as f64;
        }
        // Piecewise-linear distribution function between tabulated quantiles.
        let cdf = interpolate(&self.quantiles, &self.levels, stat);
        (1.0 - cdf).clamp(0.0, 1.0)
    }
}

/// Linear interpolation of `ys` over increasing `xs`, clamped at the ends.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[ys.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x1 == x0 {
        return ys[k];
    }
    ys[k - 1] + (x - x0) / (x1 - x0) * (ys[k] - ys[k - 1])
}

/// Draws of a bridge functional; replication `r` uses its own derived stream.
pub fn functional_samples(functional: Functional, resolution: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(invalid("bridge resolution must be at least 2"));
    }
    if functional == Functional::CustomSup {
        return Err(invalid("custom-sup draws come from a Gaussian limit, not a bridge"));
    }
    Ok((0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; resolution + 1],
            |path, r| {
                fill_bridge(path, &mut replication_rng(seed, r as u64));
                match functional {
                    Functional::KsSup => path.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                    _ => path.iter().map(|v| v * v).sum::<f64>() / resolution as f64,
                }
            },
        )
        .collect())
}

pub fn functional_quantiles(
    functional: Functional,
    levels: &[f64],
    resolution: usize,
    reps: usize,
    seed: u64,
) -> Result<QuantileTable> {
    if reps < 1000 {
        return Err(invalid("need at least 1000 replications"));
    }
    let draws = functional_samples(functional, resolution, reps, seed)?;
    QuantileTable::from_samples(functional, draws, levels, resolution, seed)
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("matrix must be square"));
        }
        Ok(Self { dim, data: rows.concat() })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

const JITTER_LADDER: [f64; 5] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

/// Cholesky factor of `cov + jitter I`, escalating the jitter as needed.
pub fn cholesky_with_jitter(cov: &Matrix) -> Result<(Matrix, f64)> {
    let mut failed_minor = 0;
    for &jitter in &JITTER_LADDER {
        match cholesky(cov, jitter) {
            Ok(l) => return Ok((l, jitter)),
            Err(minor) => failed_minor = minor,
        }
    }
    Err(Error::Factorization { minor: failed_minor, jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] })
}

fn cholesky(cov: &Matrix, jitter: f64) -> std::result::Result<Matrix, usize> {
    let n = cov.dim;
    let mut l = Matrix::zeros(n);
    // A zero variance pins the coordinate to 0; its row and column stay zero
    // without jitter so degenerate coordinates are exactly zero in draws.
    let pinned: Vec<bool> = (0..n).map(|i| cov.get(i, i) == 0.0).collect();
    for i in 0..n {
        if pinned[i] {
            if (0..n).any(|j| cov.get(i, j) != 0.0) {
                return Err(i + 1);
            }
            continue;
        }
        for j in (0..=i).filter(|&j| !pinned[j]) {
            let mut sum = cov.get(i, j);
            if i == j {
                sum += jitter;
            }
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(i + 1);
                }
                l.set(i, i, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Centered Gaussian field on a product grid with separable covariance
/// `time(s1, s2) * space(z1, z2)`; the factor is the Kronecker product of
/// the two Cholesky factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLimit {
    pub s_grid: Vec<f64>,
    pub z_grid: Vec<Point>,
    pub time_cov: Matrix,
    pub space_cov: Matrix,
    pub time_factor: Matrix,
    pub space_factor: Matrix,
    pub time_jitter: f64,
    pub space_jitter: f64,
    /// The time covariance is `s1 ^ s2 - s1 s2` on a grid ending at 1, so
    /// draws use the bridge construction instead of the dense time factor.
    #[serde(default)]
    pub bridge_time: bool,
}

impl GaussianLimit {
    pub fn from_parts(s_grid: Vec<f64>, z_grid: Vec<Point>, time_cov: Matrix, space_cov: Matrix) -> Result<Self> {
        for (name, m) in [("time", &time_cov), ("space", &space_cov)] {
            if m.dim == 0 {
                return Err(invalid(format!("{name} covariance is empty")));
            }
            if !m.is_symmetric(1e-12) {
                return Err(invalid(format!("{name} covariance is not symmetric")));
            }
            if (0..m.dim).any(|i| m.get(i, i) < 0.0) {
                return Err(invalid(format!("{name} covariance has a negative diagonal")));
            }
        }
        let (time_factor, time_jitter) = cholesky_with_jitter(&time_cov)?;
        let (space_factor, space_jitter) = cholesky_with_jitter(&space_cov)?;
        Ok(Self { s_grid, z_grid, time_cov, space_cov, time_factor, space_factor, time_jitter, space_jitter, bridge_time: false })
    }

    /// A field with covariance `cov` and a trivial time axis.
    pub fn from_covariance(cov: Matrix) -> Result<Self> {
        Self::from_parts(vec![], vec![], Matrix { dim: 1, data: vec![1.0] }, cov)
    }

    pub fn len(&self) -> usize {
        self.time_cov.dim * self.space_cov.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Covariance between flat indices `a = s * |z| + z`.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        let nz = self.space_cov.dim;
        self.time_cov.get(a / nz, b / nz) * self.space_cov.get(a % nz, b % nz)
    }

    /// Entry of `factor * factor^T`, which equals the covariance up to jitter.
    pub fn factored_covariance(&self, a: usize, b: usize) -> f64 {
        let nz = self.space_cov.dim;
        let (sa, za, sb, zb) = (a / nz, a % nz, b / nz, b % nz);
        let dot = |m: &Matrix, i: usize, j: usize| (0..m.dim).map(|k| m.get(i, k) * m.get(j, k)).sum::<f64>();
        dot(&self.time_factor, sa, sb) * dot(&self.space_factor, za, zb)
    }

    /// One draw of the field in row-major `(s, z)` order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let ns = self.time_cov.dim;
        let nz = self.space_cov.dim;
        let mut e = vec![0.0; ns * nz];
        for v in e.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        // t = E * Lz^T
        let lz = &self.space_factor.data;
        let mut t = vec![0.0; ns * nz];
        for i in 0..ns {
            let row = &e[i * nz..(i + 1) * nz];
            for b in 0..nz {
                let lrow = &lz[b * nz..b * nz + b + 1];
                t[i * nz + b] = row[..=b].iter().zip(lrow).map(|(x, y)| x * y).sum();
            }
        }
        if self.bridge_time {
            // B(s_a) = W(s_a) - s_a W(1) with W built from independent increments.
            out.clear();
            out.resize(ns * nz, 0.0);
            let mut w = vec![0.0; nz];
            let mut prev = 0.0;
            for a in 0..ns {
                let step = (self.s_grid[a] - prev).sqrt();
                prev = self.s_grid[a];
                for (wz, x) in w.iter_mut().zip(&t[a * nz..(a + 1) * nz]) {
                    *wz += step * x;
                }
                out[a * nz..(a + 1) * nz].copy_from_slice(&w);
            }
            for a in 0..ns {
                let s = self.s_grid[a];
                for (o, wz) in out[a * nz..(a + 1) * nz].iter_mut().zip(&w) {
                    *o -= s * wz;
                }
            }
            return;
        }
        // out = Ls * t
        let ls = &self.time_factor.data;
        out.clear();
        out.resize(ns * nz, 0.0);
        for a in 0..ns {
            for i in 0..=a {
                let w = ls[a * ns + i];
                if w == 0.0 {
                    continue;
                }
                let src = &t[i * nz..(i + 1) * nz];
                for (o, x) in out[a * nz..(a + 1) * nz].iter_mut().zip(src) {
                    *o += w * x;
                }
            }
        }
    }
}

/// Plug-in `Gamma` covariance `(s1 ^ s2 - s1 s2)(H(z1 ^ z2) - G(z1) G(z2))`
/// with `H(z) = mean Y^2 1{X <= z}` and `G(z) = mean Y 1{X <= z}`.
pub fn build_gamma_limit(sample: &RegressionSample, s_grid: &[f64], z_grid: &[Point]) -> Result<GaussianLimit> {
    if s_grid.is_empty() || z_grid.is_empty() {
        return Err(invalid("grids must be nonempty"));
    }
    if z_grid.iter().any(|z| z.len() != sample.d()) {
        return Err(invalid("threshold dimension does not match the regressors"));
    }
    let ns = s_grid.len();
    let mut time_cov = Matrix::zeros(ns);
    for i in 0..ns {
        for j in 0..ns {
            let (a, b) = (s_grid[i], s_grid[j]);
            time_cov.set(i, j, a.min(b) - a * b);
        }
    }
    let n = sample.n() as f64;
    let ys = sample.responses();
    let xs = sample.regressors();
    let moments = |z: &[f64]| {
        let (mut h, mut g) = (0.0, 0.0);
        for (y, x) in ys.iter().zip(xs) {
            if leq(x, z) {
                h += y * y;
                g += y;
            }
        }
        (h / n, g / n)
    };
    let at_grid: Vec<(f64, f64)> = z_grid.iter().map(|z| moments(z)).collect();
    let nz = z_grid.len();
    let mut space_cov = Matrix::zeros(nz);
    for a in 0..nz {
        for b in 0..=a {
            let h = if sample.d() == 1 {
                if z_grid[a][0] <= z_grid[b][0] { at_grid[a].0 } else { at_grid[b].0 }
            } else {
                let meet: Vec<f64> = z_grid[a].iter().zip(&z_grid[b]).map(|(p, q)| p.min(*q)).collect();
                moments(&meet).0
            };
            let v = h - at_grid[a].1 * at_grid[b].1;
            space_cov.set(a, b, v);
            space_cov.set(b, a, v);
        }
    }
    let mut limit = GaussianLimit::from_parts(s_grid.to_vec(), z_grid.to_vec(), time_cov, space_cov)?;
    limit.bridge_time = validate_s_grid(s_grid).is_ok();
    Ok(limit)
}

const SUP_BATCH: usize = 250;

/// Draws of `sup |Gamma|` over the grid; batch `b` uses its own derived stream.
pub fn sup_samples(limit: &GaussianLimit, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if reps < 100 {
        return Err(invalid("need at least 100 sup draws"));
    }
    let batches = reps.div_ceil(SUP_BATCH);
    let per_batch: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(derive_seed(seed, b as u64), 0);
            let count = SUP_BATCH.min(reps - b * SUP_BATCH);
            let mut field = Vec::new();
            (0..count)
                .map(|_| {
                    limit.draw(&mut rng, &mut field);
                    field.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                })
                .collect()
        })
        .collect();
    Ok(per_batch.concat())
}

pub fn sample_sup(limit: &GaussianLimit, reps: usize, seed: u64) -> Result<QuantileTable> {
    let draws = sup_samples(limit, reps, seed)?;
    QuantileTable::from_samples(Functional::CustomSup, draws, &dense_levels(), limit.len(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seriesgen::Origin;

    #[test]
    fn bridge_endpoints_pinned() {
        for seed in 0..20 {
            let p = simulate_bridge_seeded(17, seed).unwrap();
            assert_eq!(p[0], 0.0);
            assert_eq!(p[17], 0.0);
        }
        assert!(simulate_bridge_seeded(1, 0).is_err());
    }

    #[test]
    fn bridge_variance_and_covariance() {
        let reps = 100_000;
        let res = 8;
        let paths: Vec<Vec<f64>> = (0..reps)
            .map(|r| simulate_bridge(res, &mut replication_rng(5, r)).unwrap())
            .collect();
        let x: Vec<f64> = paths.iter().map(|p| p[4] * p[4]).collect();
        let mean = x.iter().sum::<f64>() / reps as f64;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / reps as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * sd / (reps as f64).sqrt(), "{mean}");
        let c: Vec<f64> = paths.iter().map(|p| p[2] * p[6]).collect();
        let cm = c.iter().sum::<f64>() / reps as f64;
        let csd = (c.iter().map(|v| (v - cm).powi(2)).sum::<f64>() / reps as f64).sqrt();
        assert!((cm - 0.0625).abs() < 3.0 * csd / (reps as f64).sqrt(), "{cm}");
    }

    #[test]
    fn ks_cdf_values() {
        assert_eq!(ks_cdf(0.0), 0.0);
        assert!(ks_cdf(1e-3) < 1e-12);
        assert!((ks_cdf(1.36) - 0.9505).abs() < 5e-4);
        assert!(ks_cdf(1.0) < ks_cdf(1.5));
        // The two series agree where both converge well.
        let x: f64 = 0.6;
        let pi = std::f64::consts::PI;
        let dual: f64 = (1..50).map(|k| (-((2 * k - 1) as f64).powi(2) * pi * pi / (8.0 * x * x)).exp()).sum::<f64>()
            * (2.0 * pi).sqrt() / x;
        assert!((ks_cdf(x) - dual).abs() < 1e-11);
    }

    #[test]
    fn ks_cdf_monotone() {
        let mut last = 0.0;
        for k in 1..=100 {
            let v = ks_cdf(k as f64 * 0.03);
            assert!(v >= last);
            last = v;
        }
        assert!((ks_quantile(0.95).unwrap() - 1.3580986).abs() < 1e-6);
    }

    #[test]
    fn cvm_mean_and_level_order() {
        let t = functional_quantiles(Functional::CvmIntegral, &[0.95, 0.90], 256, 20_000, 3).unwrap();
        assert!(t.quantiles[0] <= t.quantiles[1]);
        assert_eq!(t.levels, vec![0.90, 0.95]);
        let s = t.samples();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
        assert!((mean - 1.0 / 6.0).abs() < 3.0 * sd / (s.len() as f64).sqrt());
        assert!(functional_quantiles(Functional::KsSup, &[0.5], 64, 10, 0).is_err());
        assert!("nope".parse::<Functional>().is_err());
    }

    #[test]
    fn table_p_values_and_json() {
        let t = QuantileTable::from_samples(Functional::KsSup, (1..=100).map(f64::from).collect(), &dense_levels(), 10, 1).unwrap();
        assert_eq!(t.p_value(0.5), 1.0);
        assert_eq!(t.p_value(101.0), 0.0);
        assert_eq!(t.p_value(91.0), 0.1);
        let text = serde_json::to_string(&t).unwrap();
        let back: QuantileTable = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!((back.p_value(91.0) - 0.1).abs() < 0.02);
        assert!((back.quantile(0.5) - t.quantile(0.5)).abs() < 1e-9);
    }

    fn sample(y: Vec<f64>, x: Vec<f64>) -> RegressionSample {
        RegressionSample::new(y, x.into_iter().map(|v| vec![v]).collect(), Origin::Ingested { source: None }).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let s = sample(vec![1.0, 2.0], vec![0.2, 0.8]);
        let g = build_gamma_limit(&s, &[0.5], &[vec![0.5]]).unwrap();
        assert!((g.covariance(0, 0) - 0.0625).abs() < 1e-15);
        let g1 = build_gamma_limit(&s, &[1.0], &[vec![0.5], vec![1.0]]).unwrap();
        assert!((0..2).all(|a| (0..2).all(|b| g1.covariance(a, b) == 0.0)));
        let zero = sample(vec![0.0; 3], vec![0.1, 0.2, 0.3]);
        let g0 = build_gamma_limit(&zero, &[0.5, 1.0], &[vec![0.15], vec![0.3]]).unwrap();
        assert!((0..4).all(|a| (0..4).all(|b| g0.covariance(a, b) == 0.0)));
        let sups = sup_samples(&g0, 200, 1).unwrap();
        assert!(sups.iter().all(|&v| v < 1e-10));
        assert!(sup_samples(&g0, 99, 1).is_err());
    }

    #[test]
    fn factor_reproduces_covariance() {
        let s = sample(vec![0.3, -1.0, 2.0, 0.7, -0.2], vec![0.1, 0.5, 0.3, 0.9, 0.7]);
        let g = build_gamma_limit(&s, &[0.25, 0.5, 1.0], &[vec![0.2], vec![0.6], vec![1.0]]).unwrap();
        for a in 0..g.len() {
            for b in 0..g.len() {
                let tol = g.time_jitter.max(g.space_jitter) * 10.0 + 1e-10;
                assert!((g.covariance(a, b) - g.factored_covariance(a, b)).abs() <= tol);
            }
        }
    }

    #[test]
    fn half_normal_sup_quantile() {
        let v = 2.5;
        let g = GaussianLimit::from_covariance(Matrix { dim: 1, data: vec![v] }).unwrap();
        let t = sample_sup(&g, 40_000, 9).unwrap();
        let q = t.quantile(0.95);
        let target = 1.959963984540054 * v.sqrt();
        assert!((q - target).abs() < 3.0 * t.std_errors[949] + 1e-3, "{q} vs {target}");
    }

    #[test]
    fn gamma_field_covariance_matches() {
        let s = sample(vec![0.5, -1.0, 1.5, 0.2, -0.7, 1.1], vec![0.1, 0.5, 0.3, 0.9, 0.7, 0.4]);
        for s_grid in [[0.3, 0.6, 1.0], [0.3, 0.6, 0.9]] {
            let g = build_gamma_limit(&s, &s_grid, &[vec![0.3], vec![0.5], vec![0.9]]).unwrap();
            assert_eq!(g.bridge_time, s_grid[2] == 1.0);
            check_field_covariance(&g);
        }
    }

    fn check_field_covariance(g: &GaussianLimit) {
        let reps = 10_000;
        let mut rng = stream_rng(12, 0);
        let mut field = Vec::new();
        let dim = g.len();
        let mut prods = vec![Vec::with_capacity(reps); dim * dim];
        for _ in 0..reps {
            g.draw(&mut rng, &mut field);
            for a in 0..dim {
                for b in 0..dim {
                    prods[a * dim + b].push(field[a] * field[b]);
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                let p = &prods[a * dim + b];
                let m = p.iter().sum::<f64>() / reps as f64;
                let sd = (p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / reps as f64).sqrt();
                let se = sd / (reps as f64).sqrt();
                assert!((m - g.covariance(a, b)).abs() <= 5.0 * se + 1e-9, "({a},{b}) {m} vs {}", g.covariance(a, b));
            }
        }
    }

    #[test]
    fn sup_quantiles_stable_in_reps() {
        let s = sample(vec![0.5, -1.0, 1.5, 0.2], vec![0.1, 0.5, 0.3, 0.9]);
        let g = build_gamma_limit(&s, &[0.5, 1.0], &[vec![0.3], vec![0.9]]).unwrap();
        let a = sample_sup(&g, 10_000, 1).unwrap();
        let b = sample_sup(&g, 20_000, 2).unwrap();
        for k in [899, 949] {
            let se = (a.std_errors[k].powi(2) + b.std_errors[k].powi(2)).sqrt();
            assert!((a.quantiles[k] - b.quantiles[k]).abs() < 3.0 * se);
        }
    }

    #[test]
    fn factorization_failure_reports_minor() {
        let bad = Matrix { dim: 2, data: vec![1.0, 0.0, 0.0, -1.0] };
        assert!(matches!(cholesky_with_jitter(&bad), Err(Error::Factorization { minor: 2, .. })));
    }
}
