//! Test for a mean shift across an unknown threshold of the lagged value.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::empproc::ProcessPath;
use crate::error::{invalid, Error, Result};
use crate::limits::{ks_cdf, ks_quantile, QuantileTable, SCHEMA_VERSION};
use crate::report::{StatisticResult, TestReport};
use crate::seriesgen::UnivariateSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticChoice {
    /// Sup-type statistic `T_n1`.
    Ks,
    /// Integral-type statistic `T_n2`.
    Cvm,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weighting {
    /// Integrate against the empirical law of the lagged values.
    EmpiricalMeasure,
    /// `sum_k w_k T_n(z_k)^2`; the limit is then not parameter free.
    Grid { z: Vec<f64>, w: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsSource {
    Series,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetarTestConfig {
    pub statistic: StatisticChoice,
    pub weighting: Weighting,
    pub level: f64,
    pub ks_source: KsSource,
}

impl Default for SetarTestConfig {
    fn default() -> Self {
        Self {
            statistic: StatisticChoice::Both,
            weighting: Weighting::EmpiricalMeasure,
            level: 0.05,
            ks_source: KsSource::Series,
        }
    }
}

impl SetarTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid(format!("level {} outside (0, 1)", self.level)));
        }
        if let Weighting::Grid { z, w } = &self.weighting {
            if z.is_empty() || z.len() != w.len() {
                return Err(invalid("weighting grid and weights must be nonempty and of equal length"));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid("weights must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Limit tables used for calibration.
#[derive(Debug, Clone, Copy, Default)]
pub struct SetarTables<'a> {
    pub ks: Option<&'a QuantileTable>,
    pub cvm: Option<&'a QuantileTable>,
}

/// Regime means at threshold `z`; a mean over an empty regime is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeMeans {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub f_hat: f64,
}

pub fn regime_means(series: &UnivariateSeries, z: f64) -> RegimeMeans {
    let n = series.n();
    let (mut count, mut low_sum, mut high_sum) = (0usize, 0.0, 0.0);
    for (&lag, &y) in series.lagged().iter().zip(series.responses()) {
        if lag <= z {
            count += 1;
            low_sum += y;
        } else {
            high_sum += y;
        }
    }
    let f_hat = count as f64 / n as f64;
    RegimeMeans {
        mu1: (count > 0).then(|| low_sum / count as f64),
        mu2: (count < n).then(|| high_sum / (n - count) as f64),
        f_hat,
    }
}

/// `sqrt(n) F(1 - F)(mu1 - mu2)`, zero when a regime is empty.
pub fn t_product_form(series: &UnivariateSeries, z: f64) -> f64 {
    let m = regime_means(series, z);
    match (m.mu1, m.mu2) {
        (Some(a), Some(b)) => (series.n() as f64).sqrt() * m.f_hat * (1.0 - m.f_hat) * (a - b),
        _ => 0.0,
    }
}

/// `n^{-1/2} sum_i Y_i (1{Y_{i-1} <= z} - F(z))` at a single threshold.
pub fn t_at(series: &UnivariateSeries, z: f64) -> f64 {
    let n = series.n();
    let count = series.lagged().iter().filter(|&&v| v <= z).count();
    if count == 0 || count == n {
        return 0.0;
    }
    let f_hat = count as f64 / n as f64;
    let s: f64 = series
        .lagged()
        .iter()
        .zip(series.responses())
        .map(|(&lag, &y)| if lag <= z { y * (1.0 - f_hat) } else { -y * f_hat })
        .sum();
    s / (n as f64).sqrt()
}

/// `T_n(z)` at every jump point of the lagged values plus one sentinel on
/// each side; `s` is fixed at 1.
pub fn t_process(series: &UnivariateSeries) -> Result<ProcessPath> {
    let n = series.n();
    if n < 2 {
        return Err(invalid("need n >= 2"));
    }
    let mut pairs: Vec<(f64, f64)> = series.lagged().iter().copied().zip(series.responses().iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let root_n = (n as f64).sqrt();
    let mut z_grid = vec![vec![pairs[0].0 - 1.0]];
    let mut values = vec![0.0];
    let (mut k, mut acc) = (0usize, 0.0);
    while k < n {
        let z = pairs[k].0;
        while k < n && pairs[k].0 == z {
            acc += pairs[k].1;
            k += 1;
        }
        let t = if k == n {
            0.0
        } else {
            let f_hat = k as f64 / n as f64;
            (acc - f_hat * total) / root_n
        };
        z_grid.push(vec![z]);
        values.push(t);
    }
    z_grid.push(vec![pairs[n - 1].0 + 1.0]);
    values.push(0.0);
    Ok(ProcessPath { s_grid: vec![1.0], z_grid, values: vec![values], n })
}

/// Value of the step function `T_n` stored on its jump grid.
fn step_value(path: &ProcessPath, z: f64) -> f64 {
    let k = path.z_grid.partition_point(|p| p[0] <= z);
    if k == 0 {
        0.0
    } else {
        path.values[0][k - 1]
    }
}

/// `n^{-1} sum_i (Y_i - Ybar)^2` over `Y_1..Y_n`.
pub fn sigma2_hat(series: &UnivariateSeries) -> Result<f64> {
    let y = series.responses();
    if y.len() < 2 {
        return Err(invalid("need n >= 2"));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::DegenerateData("constant series has zero variance".into()));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= f64::EPSILON * f64::EPSILON * mean * mean || var == 0.0 {
        return Err(Error::DegenerateData("series variance is numerically zero".into()));
    }
    Ok(var)
}

pub fn run_setar_test(series: &UnivariateSeries, config: &SetarTestConfig, tables: &SetarTables<'_>) -> Result<TestReport> {
    config.validate()?;
    let n = series.n();
    if n < 10 {
        return Err(invalid(format!("threshold test needs n >= 10, got {n}")));
    }
    let s2 = sigma2_hat(series)?;
    let path = t_process(series)?;
    let arg = path.sup_abs();
    let mut statistics = Vec::new();
    let mut notes = Vec::new();
    let upper = 1.0 - config.level;

    if matches!(config.statistic, StatisticChoice::Ks | StatisticChoice::Both) {
        let t1 = arg.value / s2.sqrt();
        let result = match config.ks_source {
            KsSource::Series => {
                StatisticResult::calibrated("T_n1", t1, ks_quantile(upper)?, 1.0 - ks_cdf(t1), "asymptotic series")
            }
            KsSource::Table => {
                let table = tables.ks.ok_or_else(|| Error::MissingTable("sup-type statistic".into()))?;
                StatisticResult::calibrated("T_n1", t1, table.quantile(upper), table.p_value(t1), "monte carlo table")
            }
        };
        statistics.push(result);
    }
    if matches!(config.statistic, StatisticChoice::Cvm | StatisticChoice::Both) {
        let integral = match &config.weighting {
            Weighting::EmpiricalMeasure => {
                series.lagged().iter().map(|&z| step_value(&path, z).powi(2)).sum::<f64>() / n as f64
            }
            Weighting::Grid { z, w } => {
                notes.push("user weighting: the integral-type limit is not parameter free".into());
                z.iter().zip(w).map(|(&zk, &wk)| wk * step_value(&path, zk).powi(2)).sum::<f64>()
            }
        };
        let t2 = integral / s2;
        let table = tables.cvm.ok_or_else(|| Error::MissingTable("integral-type statistic".into()))?;
        statistics.push(StatisticResult::calibrated("T_n2", t2, table.quantile(upper), table.p_value(t2), "monte carlo table"));
    }

    Ok(TestReport {
        schema_version: SCHEMA_VERSION,
        test: "setar-threshold".into(),
        n,
        level: config.level,
        statistics,
        sigma2_hat: Some(s2),
        argmax_s: None,
        argmax_z: Some(path.z_grid[arg.z_index].clone()),
        seed: tables.cvm.map(|t| t.seed),
        config: serde_json::to_value(config)?,
        notes,
        diagnostics: json!({ "jump_points": path.z_grid.len() - 2, "sup_abs_t": arg.value }),
    })
}

/// CSV `z,t` of the process on its jump grid.
pub fn write_t_csv<W: Write>(path: &ProcessPath, mut w: W) -> Result<()> {
    writeln!(w, "z,t")?;
    for (z, t) in path.z_grid.iter().zip(&path.values[0]) {
        writeln!(w, "{},{}", z[0], t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::{functional_quantiles, Functional};
    use crate::rng::stream_rng;
    use crate::seriesgen::{gen_setar, Innovation, Origin, SetarSpec};
    use proptest::prelude::*;

    fn series(v: &[f64]) -> UnivariateSeries {
        UnivariateSeries::new(v.to_vec(), Origin::Ingested { source: None }).unwrap()
    }

    #[test]
    fn regime_means_examples() {
        let s = series(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let m = regime_means(&s, 1.5);
        assert_eq!(m, RegimeMeans { mu1: Some(1.5), mu2: Some(3.5), f_hat: 0.5 });
        let m = regime_means(&s, -1.0);
        assert_eq!(m.f_hat, 0.0);
        assert_eq!(m.mu1, None);
        assert_eq!(m.mu2, Some(2.5));
        let c = series(&[2.0; 6]);
        let m = regime_means(&c, 2.0 - 1e-9);
        assert_eq!(m.mu1, None);
        let m = regime_means(&series(&[1.0, 5.0, 1.0, 5.0, 1.0]), 3.0);
        assert_eq!((m.mu1, m.mu2, m.f_hat), (Some(5.0), Some(1.0), 0.5));
    }

    #[test]
    fn t_process_example_two_ways() {
        let s = series(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!((t_product_form(&s, 1.5) + 1.0).abs() < 1e-15);
        assert!((t_at(&s, 1.5) + 1.0).abs() < 1e-15);
        let p = t_process(&s).unwrap();
        assert!((step_value(&p, 1.5) + 1.0).abs() < 1e-15);
        assert_eq!(step_value(&p, -5.0), 0.0);
        assert_eq!(step_value(&p, 50.0), 0.0);
    }

    #[test]
    fn constant_series() {
        let s = series(&[3.0; 12]);
        let p = t_process(&s).unwrap();
        assert!(p.values[0].iter().all(|&v| v == 0.0));
        assert!(matches!(sigma2_hat(&s), Err(Error::DegenerateData(_))));
        assert!(run_setar_test(&s, &SetarTestConfig { statistic: StatisticChoice::Ks, ..Default::default() }, &SetarTables::default()).is_err());
    }

    #[test]
    fn sigma2_examples() {
        let s = series(&[7.0, 1.0, -1.0, 1.0, -1.0]);
        assert_eq!(sigma2_hat(&s).unwrap(), 1.0);
        let shifted = series(&[17.0, 11.0, 9.0, 11.0, 9.0]);
        assert_eq!(sigma2_hat(&shifted).unwrap(), 1.0);
    }

    #[test]
    fn guards_and_missing_tables() {
        let s = series(&[0.0, 1.0, 0.5, 2.0, 0.1]);
        assert!(run_setar_test(&s, &SetarTestConfig::default(), &SetarTables::default()).is_err());
        let h0 = gen_setar(&SetarSpec::new(50, 0.0, 0.0, 0.0, Innovation::Gaussian { sigma: 1.0 }), 1).unwrap();
        let err = run_setar_test(&h0, &SetarTestConfig::default(), &SetarTables::default());
        assert!(matches!(err, Err(Error::MissingTable(_))));
        let bad = SetarTestConfig { level: 1.0, ..Default::default() };
        assert!(run_setar_test(&h0, &bad, &SetarTables::default()).is_err());
    }

    #[test]
    fn tiny_noise_matches_unit_noise() {
        // The statistics are location and scale invariant.
        let noise = Innovation::Gaussian { sigma: 1.0 }.generate(201, &mut stream_rng(4, 0));
        let tiny: Vec<f64> = noise.iter().map(|e| 5.0 + 1e-6 * e).collect();
        let cvm = functional_quantiles(Functional::CvmIntegral, &crate::limits::dense_levels(), 256, 5000, 2).unwrap();
        let tables = SetarTables { ks: None, cvm: Some(&cvm) };
        let a = run_setar_test(&series(&noise), &SetarTestConfig::default(), &tables).unwrap();
        let b = run_setar_test(&series(&tiny), &SetarTestConfig::default(), &tables).unwrap();
        let (ta, tb) = (a.statistic("T_n1").unwrap(), b.statistic("T_n1").unwrap());
        assert!((ta.value - tb.value).abs() < 1e-6 * ta.value);
        assert_eq!(ta.reject, tb.reject);
        assert!(!b.rejects());
        assert!(tb.p_value.unwrap() > 0.05);
    }

    #[test]
    fn strong_alternative_rejects() {
        let s = gen_setar(&SetarSpec::new(500, 0.0, 2.0, 0.5, Innovation::Gaussian { sigma: 1.0 }), 3).unwrap();
        let cfg = SetarTestConfig { statistic: StatisticChoice::Ks, ..Default::default() };
        let r = run_setar_test(&s, &cfg, &SetarTables::default()).unwrap();
        assert!(r.rejects());
        let stat = r.statistic("T_n1").unwrap();
        assert_eq!(stat.reject, Some(stat.value > stat.critical_value.unwrap()));
        assert!(stat.p_value.unwrap() < 0.01);
    }

    #[test]
    fn user_weighting_is_flagged() {
        let s = gen_setar(&SetarSpec::new(100, 0.0, 0.0, 0.0, Innovation::Gaussian { sigma: 1.0 }), 3).unwrap();
        let cvm = QuantileTable::from_samples(Functional::CvmIntegral, (1..2000).map(|k| k as f64 / 4000.0).collect(), &[0.95], 8, 0).unwrap();
        let cfg = SetarTestConfig {
            statistic: StatisticChoice::Cvm,
            weighting: Weighting::Grid { z: vec![-1.0, 0.0, 1.0], w: vec![0.25, 0.5, 0.25] },
            ..Default::default()
        };
        let r = run_setar_test(&s, &cfg, &SetarTables { ks: None, cvm: Some(&cvm) }).unwrap();
        assert_eq!(r.notes.len(), 1);
    }

    fn arb_series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-4.0f64..4.0, 3..60)
    }

    proptest! {
        #[test]
        fn product_and_sum_forms_agree(v in arb_series()) {
            let s = series(&v);
            for z in s.lagged() {
                let a = t_product_form(&s, *z);
                let b = t_at(&s, *z);
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())));
            }
            let p = t_process(&s).unwrap();
            for (z, t) in p.z_grid.iter().zip(&p.values[0]) {
                prop_assert!((t_at(&s, z[0]) - t).abs() <= 1e-10 * (1.0 + t.abs()));
            }
        }

        #[test]
        fn response_shift_leaves_t_unchanged(v in arb_series(), c in -10.0f64..10.0) {
            let s = series(&v);
            let lagged = s.lagged().to_vec();
            let shifted: Vec<f64> = s.responses().iter().map(|y| y + c).collect();
            for z in &lagged {
                let base = t_at(&s, *z);
                let n = lagged.len();
                let count = lagged.iter().filter(|&&l| l <= *z).count();
                let f = count as f64 / n as f64;
                let direct = if count == 0 || count == n { 0.0 } else {
                    lagged.iter().zip(&shifted).map(|(l, y)| y * (if l <= z { 1.0 } else { 0.0 } - f)).sum::<f64>() / (n as f64).sqrt()
                };
                prop_assert!((base - direct).abs() < 1e-9 * (1.0 + c.abs()));
            }
        }

        #[test]
        fn sup_statistic_scale_invariant(v in arb_series(), c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
            prop_assume!(v.len() >= 11);
            let s = series(&v);
            prop_assume!(sigma2_hat(&s).is_ok());
            let scaled = series(&v.iter().map(|x| c * x).collect::<Vec<_>>());
            let cfg = SetarTestConfig { statistic: StatisticChoice::Ks, ..Default::default() };
            let a = run_setar_test(&s, &cfg, &SetarTables::default()).unwrap();
            let b = run_setar_test(&scaled, &cfg, &SetarTables::default()).unwrap();
            let (x, y) = (a.statistics[0].value, b.statistics[0].value);
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }
}
