//! Sequential empirical process `G_n(s, phi)` over threshold-indexed families.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::law::Law;
use crate::seriesgen::RegressionSample;

/// A threshold in `R^d`; scalar families use `d = 1`.
pub type Point = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `y -> 1{y <= z}`
    Indicator,
    /// `(e, y) -> e (1{y <= z} - F(z))` with the plug-in distribution function.
    ResidualIndicator,
    /// `(y, x) -> y 1{x <= z}`, componentwise order on `R^d`.
    ResponseIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "table", rename_all = "kebab-case")]
pub enum Centering {
    /// Population means `E[phi_z(X)]`, one per grid point.
    Analytic(Vec<f64>),
    /// Sample means.
    Empirical,
}

impl Centering {
    pub fn label(&self) -> &'static str {
        match self {
            Centering::Analytic(_) => "analytic",
            Centering::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdFamily {
    pub kind: FamilyKind,
    pub centering: Centering,
    z_grid: Vec<Point>,
    scale: f64,
}

impl ThresholdFamily {
    pub fn new(kind: FamilyKind, centering: Centering, z_grid: Vec<Point>) -> Result<Self> {
        validate_z_grid(&z_grid)?;
        if let Centering::Analytic(table) = &centering {
            if table.len() != z_grid.len() {
                return Err(Error::MissingCentering { have: table.len(), need: z_grid.len() });
            }
        }
        Ok(Self { kind, centering, z_grid, scale: 1.0 })
    }

    /// Family `{c * phi}`; an analytic centering table must already be scaled.
    pub fn with_scale(mut self, c: f64) -> Self {
        self.scale = c;
        self
    }

    pub fn z_grid(&self) -> &[Point] {
        &self.z_grid
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn validate_z_grid(grid: &[Point]) -> Result<()> {
    let Some(first) = grid.first() else {
        return Err(invalid("threshold grid is empty"));
    };
    let d = first.len();
    if d == 0 {
        return Err(invalid("threshold points need at least one coordinate"));
    }
    for p in grid {
        if p.len() != d {
            return Err(invalid("threshold points differ in dimension"));
        }
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("threshold point".into()));
        }
    }
    if grid.windows(2).any(|w| !lex_less(&w[0], &w[1])) {
        return Err(invalid("threshold grid must be strictly increasing"));
    }
    Ok(())
}

/// Componentwise `x <= z`.
pub fn leq(x: &[f64], z: &[f64]) -> bool {
    x.iter().zip(z).all(|(a, b)| a <= b)
}

/// Data a family is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum Sample<'a> {
    Scalar(&'a [f64]),
    Residual { residuals: &'a [f64], lagged: &'a [f64] },
    Regression(&'a RegressionSample),
}

impl Sample<'_> {
    pub fn n(&self) -> usize {
        match self {
            Sample::Scalar(v) => v.len(),
            Sample::Residual { residuals, .. } => residuals.len(),
            Sample::Regression(s) => s.n(),
        }
    }

    pub(crate) fn check(&self, kind: FamilyKind, d: usize) -> Result<()> {
        let ok = match (self, kind) {
            (Sample::Scalar(_), FamilyKind::Indicator) => d == 1,
            (Sample::Residual { residuals, lagged }, FamilyKind::ResidualIndicator) => {
                if residuals.len() != lagged.len() {
                    return Err(invalid("residuals and lagged values differ in length"));
                }
                d == 1
            }
            (Sample::Regression(s), FamilyKind::ResponseIndicator) => s.d() == d,
            _ => false,
        };
        if !ok {
            return Err(invalid(format!("sample does not match family {kind:?} with {d}-dimensional thresholds")));
        }
        if self.n() == 0 {
            return Err(invalid("sample is empty"));
        }
        Ok(())
    }

    /// `phi_z(X_i)` for every observation.
    pub(crate) fn column(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Sample::Scalar(v) => v.iter().map(|&y| indicator(y <= z[0])).collect(),
            Sample::Residual { residuals, lagged } => {
                let f_hat = lagged.iter().filter(|&&y| y <= z[0]).count() as f64 / lagged.len() as f64;
                residuals
                    .iter()
                    .zip(lagged.iter())
                    .map(|(&e, &y)| e * (indicator(y <= z[0]) - f_hat))
                    .collect()
            }
            Sample::Regression(s) => s
                .responses()
                .iter()
                .zip(s.regressors())
                .map(|(&y, x)| if leq(x, z) { y } else { 0.0 })
                .collect(),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `floor(n s)`, robust to `s = k / n` being represented slightly below `k / n`.
pub fn floor_ns(n: usize, s: f64) -> usize {
    let x = n as f64 * s;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.floor() };
    (k.max(0.0) as usize).min(n)
}

/// Values of `G_n(s_i, phi_{z_j})`, or of a derived process on the same index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPath {
    pub s_grid: Vec<f64>,
    pub z_grid: Vec<Point>,
    /// Row `i` holds the values at `s_grid[i]`.
    pub values: Vec<Vec<f64>>,
    pub n: usize,
}

/// Location of an extreme value on a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub s_index: usize,
    pub z_index: usize,
    pub value: f64,
}

impl ProcessPath {
    pub fn from_columns(s_grid: Vec<f64>, z_grid: Vec<Point>, columns: Vec<Vec<f64>>, n: usize) -> Self {
        let values = (0..s_grid.len())
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self { s_grid, z_grid, values, n }
    }

    pub fn value(&self, s_index: usize, z_index: usize) -> f64 {
        self.values[s_index][z_index]
    }

    /// Largest absolute value; first occurrence in row-major order on ties.
    pub fn sup_abs(&self) -> Argmax {
        let mut best = Argmax { s_index: 0, z_index: 0, value: f64::NEG_INFINITY };
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.abs() > best.value {
                    best = Argmax { s_index: i, z_index: j, value: v.abs() };
                }
            }
        }
        best
    }

    /// Long-format CSV `s,z,value`; for `d > 1` the threshold spans columns `z1..zd`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.z_grid.first().map_or(1, Vec::len);
        if d == 1 {
            writeln!(w, "s,z,value")?;
        } else {
            let zs: Vec<String> = (1..=d).map(|k| format!("z{k}")).collect();
            writeln!(w, "s,{},value", zs.join(","))?;
        }
        for (i, s) in self.s_grid.iter().enumerate() {
            for (j, z) in self.z_grid.iter().enumerate() {
                let zs: Vec<String> = z.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{s},{},{}", zs.join(","), self.values[i][j])?;
            }
        }
        Ok(())
    }
}

pub fn validate_s_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if s_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(invalid("time grid must lie in [0, 1]"));
    }
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    if *s_grid.last().unwrap() != 1.0 {
        return Err(invalid("time grid must end at s = 1"));
    }
    Ok(())
}

/// `G_n(s, phi) = n^{-1/2} sum_{i <= floor(ns)} (phi(X_i) - E phi)` on the full grid.
pub fn eval_process(sample: Sample<'_>, family: &ThresholdFamily, s_grid: &[f64]) -> Result<ProcessPath> {
    validate_s_grid(s_grid)?;
    let d = family.z_grid[0].len();
    sample.check(family.kind, d)?;
    let n = sample.n();
    let root_n = (n as f64).sqrt();
    let cuts: Vec<usize> = s_grid.iter().map(|&s| floor_ns(n, s)).collect();
    let columns: Vec<Vec<f64>> = family
        .z_grid
        .par_iter()
        .enumerate()
        .map(|(j, z)| {
            let col: Vec<f64> = sample.column(z).into_iter().map(|v| family.scale * v).collect();
            let center = match &family.centering {
                Centering::Analytic(table) => table[j],
                Centering::Empirical => col.iter().sum::<f64>() / n as f64,
            };
            partial_sums_at(&col, center, &cuts, root_n)
        })
        .collect();
    for c in &columns {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("process value".into()));
        }
    }
    Ok(ProcessPath::from_columns(s_grid.to_vec(), family.z_grid.clone(), columns, n))
}

/// `(sum_{i < cut} (v_i - center)) / norm` for each cut; cuts must be nondecreasing.
pub(crate) fn partial_sums_at(values: &[f64], center: f64, cuts: &[usize], norm: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(cuts.len());
    let mut acc = 0.0;
    let mut pos = 0;
    for &cut in cuts {
        while pos < cut {
            acc += values[pos] - center;
            pos += 1;
        }
        out.push(acc / norm);
    }
    out
}

/// Sorted distinct values with one sentinel below the minimum and one above the maximum.
pub fn jump_grid(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if let (Some(&lo), Some(&hi)) = (v.first(), v.last()) {
        v.insert(0, lo - 1.0);
        v.push(hi + 1.0);
    }
    v
}

/// Product of observed coordinate values, each axis thinned to at most `cap`
/// evenly spaced order statistics (the maximum is always kept).
pub fn product_grid(points: &[Vec<f64>], cap: usize) -> Result<Vec<Point>> {
    let d = points.first().map_or(0, Vec::len);
    if d == 0 || cap == 0 {
        return Err(invalid("product grid needs points and a positive cap"));
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut axis: Vec<f64> = points.iter().map(|p| p[k]).collect();
            axis.sort_by(f64::total_cmp);
            axis.dedup();
            thin(&axis, cap)
        })
        .collect();
    let mut grid: Vec<Point> = vec![Vec::new()];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    Ok(grid)
}

/// At most `cap` evenly spaced entries of a sorted axis, ending at its maximum.
pub fn thin(axis: &[f64], cap: usize) -> Vec<f64> {
    let m = axis.len();
    if m <= cap {
        return axis.to_vec();
    }
    (1..=cap).map(|k| axis[(k * m).div_ceil(cap) - 1]).collect()
}

/// Members of scalar families with analytic moments under catalog laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFn {
    Constant { c: f64 },
    /// `1{y <= z}`
    Indicator { z: f64 },
    /// `1{lo < y <= hi}`
    Interval { lo: f64, hi: f64 },
    Identity,
}

impl ScalarFn {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            ScalarFn::Constant { c } => c,
            ScalarFn::Indicator { z } => indicator(y <= z),
            ScalarFn::Interval { lo, hi } => indicator(lo < y && y <= hi),
            ScalarFn::Identity => y,
        }
    }
}

/// `rho(phi) = E[phi(X)^2]^{1/2}`.
pub fn rho_norm(phi: &ScalarFn, law: &Law) -> Result<f64> {
    law.validate()?;
    let second = match (*phi, law) {
        (ScalarFn::Constant { c }, _) => c * c,
        (ScalarFn::Indicator { z }, _) => law.cdf(z),
        (ScalarFn::Interval { lo, hi }, _) => (law.cdf(hi) - law.cdf(lo)).max(0.0),
        (ScalarFn::Identity, Law::Uniform { lo, hi }) => (hi.powi(3) - lo.powi(3)) / (3.0 * (hi - lo)),
        (ScalarFn::Identity, Law::Gaussian { mean, sd }) => mean * mean + sd * sd,
        (ScalarFn::Identity, Law::Empirical { .. }) => law.expect(|y| y * y)?,
    };
    if second.is_finite() {
        Ok(second.sqrt())
    } else {
        Err(Error::NonFinite("second moment".into()))
    }
}

/// Order `Q (2 + gamma) / 2` of the moment behind the semi-metric `d`.
pub fn metric_order(q: u32, gamma: f64) -> Result<f64> {
    if q < 2 || !q.is_multiple_of(2) {
        return Err(invalid(format!("Q = {q} must be an even integer >= 2")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma must be positive"));
    }
    Ok(q as f64 * (2.0 + gamma) / 2.0)
}

/// `d(phi, psi) = E[|phi - psi|^{Q(2+gamma)/2}]^{(1/Q)(2/(2+gamma))}`.
pub fn d_metric(phi: &ScalarFn, psi: &ScalarFn, law: &Law, q: u32, gamma: f64) -> Result<f64> {
    let p = metric_order(q, gamma)?;
    law.validate()?;
    if phi == psi {
        return Ok(0.0);
    }
    let moment = match (*phi, *psi) {
        // |phi - psi| is the indicator of the interval between the thresholds.
        (ScalarFn::Indicator { z: a }, ScalarFn::Indicator { z: b }) => {
            (law.cdf(a.max(b)) - law.cdf(a.min(b))).max(0.0)
        }
        (ScalarFn::Constant { c: a }, ScalarFn::Constant { c: b }) => (a - b).abs().powf(p),
        _ => law.expect(|y| (phi.eval(y) - psi.eval(y)).abs().powf(p))?,
    };
    if !moment.is_finite() {
        return Err(Error::NonFinite("metric moment".into()));
    }
    Ok(moment.powf(1.0 / p))
}
