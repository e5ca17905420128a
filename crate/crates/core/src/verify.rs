//! Monte Carlo checks of the moment bound, the equicontinuity modulus and
//! the finite-dimensional covariance of the threshold process.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpt_test::{alpha_process, beta_process};
use crate::empproc::{floor_ns, metric_order, Point};
use crate::error::{invalid, Error, Result};
use crate::law::Law;
use crate::rng::{derive_seed, replication_rng};
use crate::seriesgen::{gen_setar, Innovation, RegressionSample, SetarSpec};
use crate::setar_test::t_at;

/// `(mean x^q)^{1/q}` and its delta-method standard error.
fn power_mean(x: &[f64], q: f64) -> (f64, f64) {
    let k = x.len() as f64;
    let p: Vec<f64> = x.iter().map(|v| v.abs().powf(q)).collect();
    let m = p.iter().sum::<f64>() / k;
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let sd = (p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
    let root = m.powf(1.0 / q);
    (root, sd / k.sqrt() * root / (q * m))
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    /// Law of the centered array; its scale should respect the cap `tau`.
    pub innovation: Innovation,
    pub q: u32,
    pub tau: f64,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub config: MomentConfig,
    pub m_hat: Vec<f64>,
    pub std_error: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log ratio` on `log n`; absent when a ratio is 0.
    pub slope: Option<f64>,
}

/// `M(n) = (E|n^{-1/2} sum Z_i|^Q)^{1/Q}` against `max(n^{-1/2}, tau)`.
pub fn moment_scaling(config: &MomentConfig) -> Result<MomentReport> {
    if config.q < 2 || !config.q.is_multiple_of(2) {
        return Err(invalid("Q must be an even integer >= 2"));
    }
    if config.tau.is_nan() || config.tau <= 0.0 {
        return Err(invalid("tau must be positive"));
    }
    if config.n_list.is_empty() || config.n_list.contains(&0) || config.reps < 2 {
        return Err(invalid("need positive sample sizes and at least 2 replications"));
    }
    config.innovation.validate(f64::from(config.q))?;
    let q = f64::from(config.q);
    let (mut m_hat, mut std_error, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &n) in config.n_list.iter().enumerate() {
        let master = derive_seed(config.seed, k as u64);
        let sums: Vec<f64> = (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let z = config.innovation.generate(n, &mut replication_rng(master, r as u64));
                z.iter().sum::<f64>() / (n as f64).sqrt()
            })
            .collect();
        if sums.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("normalized sum".into()));
        }
        let (m, se) = power_mean(&sums, q);
        if !m.is_finite() {
            return Err(Error::NonFinite("moment estimate".into()));
        }
        m_hat.push(m);
        std_error.push(se);
        ratios.push(m / (1.0 / (n as f64).sqrt()).max(config.tau));
    }
    let slope = if config.n_list.len() >= 2 && ratios.iter().all(|r| *r > 0.0) {
        let x: Vec<f64> = config.n_list.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        Some(ls_slope(&x, &y))
    } else {
        None
    };
    Ok(MomentReport { config: config.clone(), m_hat, std_error, ratios, slope })
}

impl MomentReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,m_hat,std_error,ratio")?;
        for (k, n) in self.config.n_list.iter().enumerate() {
            writeln!(w, "{n},{},{},{}", self.m_hat[k], self.std_error[k], self.ratios[k])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusConfig {
    pub law: Law,
    pub q: u32,
    pub gamma: f64,
    /// Strictly decreasing.
    pub deltas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Evenly spaced probability levels `k / base`.
    pub base: usize,
    /// Extra levels `(k + 2^{-j}) / base` for `j = 1..=refine`.
    pub refine: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub config: ModulusConfig,
    pub metric_order: f64,
    pub grid_points: usize,
    pub min_grid_distance: f64,
    /// Number of grid pairs with `d < delta`, per delta.
    pub pair_counts: Vec<u64>,
    pub empty_pairs: Vec<bool>,
    /// `m[i][k]` is `M(deltas[i], n_list[k])`.
    pub m: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    /// Replications whose sups were not nonincreasing in delta.
    pub nested_violations: usize,
    /// `M(delta_min, n_last) - M(delta_min, n_first)` and its pooled standard error.
    pub trend_change: f64,
    pub trend_pooled_se: f64,
}

impl ModulusReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,n,m,std_error")?;
        for (i, delta) in self.config.deltas.iter().enumerate() {
            for (k, n) in self.config.n_list.iter().enumerate() {
                writeln!(w, "{delta},{n},{},{}", self.m[i][k], self.std_error[i][k])?;
            }
        }
        Ok(())
    }
}

/// Multiscale grid of thresholds and their probability levels.
pub fn modulus_grid(law: &Law, base: usize, refine: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    if base < 2 {
        return Err(invalid("modulus grid needs base >= 2"));
    }
    let b = base as f64;
    let mut levels: Vec<f64> = (1..base).map(|k| k as f64 / b).collect();
    for k in 0..base {
        for j in 1..=refine {
            levels.push((k as f64 + 0.5f64.powi(j as i32)) / b);
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut z = Vec::with_capacity(levels.len());
    for &u in &levels {
        z.push(law.quantile(u)?);
    }
    z.dedup();
    let f: Vec<f64> = z.iter().map(|&v| law.cdf(v)).collect();
    Ok((z, f))
}

/// Last index `e(a) >= a` with `d(a, e(a)) < delta`, for each `a`.
fn window_ends(f: &[f64], p: f64, delta: f64) -> Vec<usize> {
    let mut ends = Vec::with_capacity(f.len());
    let mut e = 0;
    for a in 0..f.len() {
        e = e.max(a);
        while e + 1 < f.len() && (f[e + 1] - f[a]).powf(1.0 / p) < delta {
            e += 1;
        }
        ends.push(e);
    }
    ends
}

/// `sup_{a < b <= ends[a]} |g_b - g_a|`, zero when no pair qualifies.
fn windowed_sup(g: &[f64], ends: &[usize]) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    let mut best = 0.0f64;
    for (a, &e) in ends.iter().enumerate() {
        while next <= e {
            while maxq.back().is_some_and(|&i| g[i] <= g[next]) {
                maxq.pop_back();
            }
            maxq.push_back(next);
            while minq.back().is_some_and(|&i| g[i] >= g[next]) {
                minq.pop_back();
            }
            minq.push_back(next);
            next += 1;
        }
        while maxq.front().is_some_and(|&i| i <= a) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i <= a) {
            minq.pop_front();
        }
        if e > a {
            let hi = g[*maxq.front().unwrap()];
            let lo = g[*minq.front().unwrap()];
            best = best.max(hi - g[a]).max(g[a] - lo);
        }
    }
    best
}

/// `G_n(1, 1{. <= z_k})` for a sample of size `n` from `law`.
fn indicator_process<R: Rng + ?Sized>(law: &Law, z: &[f64], f: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| law.sample(rng)).collect();
    x.sort_by(f64::total_cmp);
    let root_n = (n as f64).sqrt();
    let mut count = 0;
    z.iter()
        .zip(f)
        .map(|(&zk, &fk)| {
            while count < n && x[count] <= zk {
                count += 1;
            }
            (count as f64 - n as f64 * fk) / root_n
        })
        .collect()
}

pub fn equicontinuity_modulus(config: &ModulusConfig) -> Result<ModulusReport> {
    let p = metric_order(config.q, config.gamma)?;
    config.law.validate()?;
    if config.deltas.is_empty() || config.deltas.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(invalid("deltas must be positive"));
    }
    if config.deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("deltas must be strictly decreasing"));
    }
    if config.n_list.is_empty() || config.n_list.contains(&0) || config.reps < 2 {
        return Err(invalid("need positive sample sizes and at least 2 replications"));
    }
    let (z, f) = modulus_grid(&config.law, config.base, config.refine)?;
    let ends: Vec<Vec<usize>> = config.deltas.iter().map(|&d| window_ends(&f, p, d)).collect();
    let pair_counts: Vec<u64> = ends
        .iter()
        .map(|e| e.iter().enumerate().map(|(a, &b)| (b - a) as u64).sum())
        .collect();
    let min_grid_distance = f.windows(2).map(|w| (w[1] - w[0]).powf(1.0 / p)).fold(f64::INFINITY, f64::min);
    let q = f64::from(config.q);
    let nd = config.deltas.len();
    let mut m = vec![Vec::new(); nd];
    let mut std_error = vec![Vec::new(); nd];
    let mut nested_violations = 0;
    for (k, &n) in config.n_list.iter().enumerate() {
        let master = derive_seed(config.seed, k as u64);
        let sups: Vec<Vec<f64>> = (0..config.reps)
            .into_par_iter()
            .map(|r| {
                let g = indicator_process(&config.law, &z, &f, n, &mut replication_rng(master, r as u64));
                ends.iter().map(|e| windowed_sup(&g, e)).collect()
            })
            .collect();
        nested_violations += sups.iter().filter(|s| s.windows(2).any(|w| w[1] > w[0])).count();
        for i in 0..nd {
            let col: Vec<f64> = sups.iter().map(|s| s[i]).collect();
            let (mi, se) = power_mean(&col, q);
            m[i].push(mi);
            std_error[i].push(se);
        }
    }
    let last = config.n_list.len() - 1;
    let trend_change = m[nd - 1][last] - m[nd - 1][0];
    let trend_pooled_se = (std_error[nd - 1][last].powi(2) + std_error[nd - 1][0].powi(2)).sqrt();
    Ok(ModulusReport {
        config: config.clone(),
        metric_order: p,
        grid_points: z.len(),
        min_grid_distance,
        empty_pairs: pair_counts.iter().map(|&c| c == 0).collect(),
        pair_counts,
        m,
        std_error,
        nested_violations,
        trend_change,
        trend_pooled_se,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidiConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub sigma: f64,
    pub z1: f64,
    pub z2: f64,
}

/// Entries ordered `(z1, z1), (z1, z2), (z2, z2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidiReport {
    pub config: FidiConfig,
    pub target: [f64; 3],
    pub estimate: [f64; 3],
    pub std_error: [f64; 3],
    pub max_abs_deviation: f64,
    /// Largest `|deviation| / std_error`; absent when every standard error is 0.
    pub max_z_score: Option<f64>,
}

impl FidiReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "entry,target,estimate,std_error")?;
        for (k, name) in ["z1z1", "z1z2", "z2z2"].iter().enumerate() {
            writeln!(w, "{name},{},{},{}", self.target[k], self.estimate[k], self.std_error[k])?;
        }
        Ok(())
    }
}

fn cov_with_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let k = a.len() as f64;
    let ma = a.iter().sum::<f64>() / k;
    let mb = b.iter().sum::<f64>() / k;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = prods.iter().sum::<f64>() / k;
    let sd = (prods.iter().map(|v| (v - c).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    (c, sd / k.sqrt())
}

/// Monte Carlo covariance of `(T_n(z1), T_n(z2))` under a gaussian null
/// against `sigma^2 (F(z1 ^ z2) - F(z1) F(z2))`.
pub fn fidi_check(config: &FidiConfig) -> Result<FidiReport> {
    if config.n < 2 || config.reps < 2 {
        return Err(invalid("need n >= 2 and at least 2 replications"));
    }
    if config.sigma.is_nan() || config.sigma <= 0.0 || config.z1.is_nan() || config.z2.is_nan() {
        return Err(invalid("sigma must be positive and thresholds must be numbers"));
    }
    let spec = SetarSpec::new(config.n, 0.0, 0.0, 0.0, Innovation::Gaussian { sigma: config.sigma });
    let pairs: Vec<(f64, f64)> = (0..config.reps)
        .into_par_iter()
        .map(|r| {
            let series = gen_setar(&spec, derive_seed(config.seed, r as u64))?;
            Ok((t_at(&series, config.z1), t_at(&series, config.z2)))
        })
        .collect::<Result<_>>()?;
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let law = Law::Gaussian { mean: 0.0, sd: config.sigma };
    let (f1, f2) = (law.cdf(config.z1), law.cdf(config.z2));
    let s2 = config.sigma * config.sigma;
    let target = [s2 * (f1 - f1 * f1), s2 * (f1.min(f2) - f1 * f2), s2 * (f2 - f2 * f2)];
    let est = [cov_with_se(&a, &a), cov_with_se(&a, &b), cov_with_se(&b, &b)];
    let estimate = est.map(|e| e.0);
    let std_error = est.map(|e| e.1);
    let dev: Vec<f64> = (0..3).map(|k| (estimate[k] - target[k]).abs()).collect();
    let max_z_score = (0..3)
        .filter(|&k| std_error[k] > 0.0)
        .map(|k| dev[k] / std_error[k])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.max(v))));
    Ok(FidiReport {
        config: config.clone(),
        target,
        estimate,
        std_error,
        max_abs_deviation: dev.iter().copied().fold(0.0, f64::max),
        max_z_score,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub max_residual: f64,
    pub bound: f64,
}

/// Compares `beta_n(s, z)` with `alpha_n(s, z) - s alpha_n(1, z)`; the gap is
/// `(s - floor(ns)/n) alpha_n(1, z)`.
pub fn decomposition_residual(sample: &RegressionSample, s_grid: &[f64], z_grid: &[Point], means: Vec<f64>) -> Result<DecompositionCheck> {
    let beta = beta_process(sample, s_grid, z_grid)?;
    let alpha = alpha_process(sample, s_grid, z_grid, means)?;
    let at_one = alpha.values.last().expect("time grid ends at 1");
    let n = sample.n();
    let mut max_residual = 0.0f64;
    let mut max_gap = 0.0f64;
    for (i, &s) in s_grid.iter().enumerate() {
        max_gap = max_gap.max((s - floor_ns(n, s) as f64 / n as f64).abs());
        for (j, a1) in at_one.iter().enumerate() {
            max_residual = max_residual.max((beta.values[i][j] - (alpha.values[i][j] - s * a1)).abs());
        }
    }
    let bound = max_gap * at_one.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(DecompositionCheck { max_residual, bound })
}
