//! Explicit brackets for indicator families and the admissibility checks
//! tying mixing decay to bracketing growth.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::empproc::{metric_order, Point, Sample};
use crate::error::{invalid, Error, Result};
use crate::law::Law;
use crate::quad;
use crate::seriesgen::{MixingSpec, ALPHA_CAP};

/// Moment order `Q`, moment excess `gamma`, bracketing growth exponent `d`
/// (`N(x) = O(x^{-d})`) and mixing decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBudget {
    pub q: u32,
    pub gamma: f64,
    pub bracket_exponent: f64,
    pub mixing: MixingSpec,
}

impl EntropyBudget {
    pub fn new(q: u32, gamma: f64, bracket_exponent: f64, mixing: MixingSpec) -> Result<Self> {
        metric_order(q, gamma)?;
        if !(bracket_exponent > 0.0 && bracket_exponent.is_finite()) {
            return Err(invalid("bracket exponent must be positive"));
        }
        mixing.validate()?;
        Ok(Self { q, gamma, bracket_exponent, mixing })
    }

    /// `gamma / (2 + gamma)`, the power applied to mixing coefficients.
    pub fn mixing_power(&self) -> f64 {
        self.gamma / (2.0 + self.gamma)
    }
}

/// Structured result of a condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub diagnostics: serde_json::Value,
}

/// Brackets for `{y -> 1{y <= z} : z in R}`.
///
/// Bracket `k` serves thresholds `z` in `[t_k, t_{k+1})` with approximating
/// member `1{y <= t_k}` and bounding member `1{t_k < y < t_{k+1}}`, where
/// `t_0 = -inf` and `t_N = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketSet {
    /// `t_0, ..., t_{N-1}`.
    pub approximating: Vec<f64>,
    /// Open intervals `(t_k, t_{k+1})`.
    pub bounding: Vec<(f64, f64)>,
    pub epsilon: f64,
    pub law: Law,
}

impl BracketSet {
    pub fn len(&self) -> usize {
        self.approximating.len()
    }

    pub fn is_empty(&self) -> bool {
        self.approximating.is_empty()
    }

    /// Index of the bracket assigned to threshold `z`.
    pub fn bracket_for(&self, z: f64) -> usize {
        self.approximating.partition_point(|&t| t <= z).saturating_sub(1)
    }

    pub fn approximating_at(&self, k: usize, y: f64) -> f64 {
        if y <= self.approximating[k] {
            1.0
        } else {
            0.0
        }
    }

    pub fn bounding_at(&self, k: usize, y: f64) -> f64 {
        let (lo, hi) = self.bounding[k];
        if lo < y && y < hi {
            1.0
        } else {
            0.0
        }
    }

    /// `rho` of bounding member `k` under the law.
    pub fn bounding_rho(&self, k: usize) -> f64 {
        let (lo, hi) = self.bounding[k];
        let f = |x: f64| if x == f64::NEG_INFINITY { 0.0 } else if x == f64::INFINITY { 1.0 } else { self.law.cdf(x) };
        (f(hi) - f(lo)).max(0.0).sqrt()
    }

    /// Bounding-class moment condition: `E[|b|^{i(2+gamma)/2}]^{1/2} <= eps`
    /// for `i = 2..=Q`. Indicators satisfy `|b|^p = b`, so every order reduces
    /// to the `rho` bound.
    pub fn bounding_moments_ok(&self, q: u32, gamma: f64) -> Result<bool> {
        metric_order(q, gamma)?;
        Ok((0..self.len()).all(|k| self.bounding_rho(k) <= self.epsilon))
    }
}

/// Smallest `N` with `1 / N < eps^2`.
fn bracket_count(epsilon: f64) -> usize {
    if epsilon > 1.0 {
        return 1;
    }
    let x = 1.0 / (epsilon * epsilon);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r {
        r as usize + 1
    } else {
        x.ceil() as usize
    }
}

/// Equal-probability brackets with `rho(b) < eps` for every bounding member.
pub fn build_brackets(epsilon: f64, law: &Law) -> Result<BracketSet> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon must be positive"));
    }
    law.validate()?;
    if matches!(law, Law::Empirical { .. }) {
        return Err(Error::UnsupportedLaw("bracket construction needs an invertible distribution function".into()));
    }
    let mut count = bracket_count(epsilon);
    loop {
        let set = brackets_with(count, epsilon, law)?;
        if (0..set.len()).all(|k| set.bounding_rho(k) < epsilon) {
            return Ok(set);
        }
        count += 1;
    }
}

fn brackets_with(count: usize, epsilon: f64, law: &Law) -> Result<BracketSet> {
    let mut cuts = vec![f64::NEG_INFINITY];
    for k in 1..count {
        cuts.push(law.quantile(k as f64 / count as f64)?);
    }
    let bounding = (0..count)
        .map(|k| (cuts[k], cuts.get(k + 1).copied().unwrap_or(f64::INFINITY)))
        .collect();
    Ok(BracketSet { approximating: cuts, bounding, epsilon, law: law.clone() })
}

pub fn bracketing_number(epsilon: f64, law: &Law) -> Result<usize> {
    build_brackets(epsilon, law).map(|b| b.len())
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

/// Mixing-rate condition: `sum_t t^{Q-2} alpha(t)^{gamma/(2+gamma)} < inf`.
pub fn check_a1(budget: &EntropyBudget, truncation: u64) -> Result<ConditionReport> {
    if truncation < 10 {
        return Err(invalid("truncation must be at least 10"));
    }
    let g = budget.mixing_power();
    let q = budget.q as f64;
    let term = |t: u64| (t as f64).powf(q - 2.0) * budget.mixing.alpha(t).powf(g);
    let partial: f64 = (1..=truncation).map(term).sum();
    let tf = truncation as f64;
    let (pass, tail, detail) = match budget.mixing {
        MixingSpec::Independent => (true, 0.0, json!({})),
        MixingSpec::MDependent { m } => {
            let rest: f64 = (truncation + 1..=m).map(term).sum();
            (true, rest, json!({ "m": m }))
        }
        MixingSpec::Polynomial { c, beta } => {
            let exponent = beta * g;
            let pass = c == 0.0 || exponent > q - 1.0;
            let tail = if c == 0.0 {
                0.0
            } else if pass && c * (tf + 1.0).powf(-beta) <= ALPHA_CAP {
                c.powf(g) * tf.powf(q - 1.0 - exponent) / (exponent - q + 1.0)
            } else {
                f64::INFINITY
            };
            (pass, tail, json!({ "decay_exponent": exponent, "required_above": q - 1.0 }))
        }
        MixingSpec::Geometric { c, rho } => {
            let ratio = ((tf + 2.0) / (tf + 1.0)).powf(q - 2.0) * rho.powf(g);
            let tail = if c == 0.0 {
                0.0
            } else if ratio < 1.0 && c * rho.powf(tf + 1.0) <= ALPHA_CAP {
                term(truncation + 1) / (1.0 - ratio)
            } else {
                f64::INFINITY
            };
            (true, tail, json!({ "term_ratio_bound": ratio }))
        }
    };
    let numeric = a1_numeric_verdict(budget);
    Ok(ConditionReport {
        condition: "A1".into(),
        pass,
        value: Some(partial),
        diagnostics: json!({
            "truncation": truncation,
            "partial_sum": partial,
            "tail_bound": finite_or_null(tail),
            "mixing": budget.mixing,
            "mixing_power": g,
            "numeric_verdict": numeric,
            "detail": detail,
        }),
    })
}

/// Decides summability from partial sums alone: the series is judged
/// convergent when the increment over the last decade `(10^5, 10^6]` is
/// negligible or has shrunk to below 95% of the increment over the decade
/// before it.
pub fn a1_numeric_verdict(budget: &EntropyBudget) -> bool {
    let g = budget.mixing_power();
    let q = budget.q as f64;
    let term = |t: u64| (t as f64).powf(q - 2.0) * budget.mixing.alpha(t).powf(g);
    let mut partial = 0.0;
    let mut marks = Vec::new();
    let mut next = 10_000u64;
    for t in 1..=1_000_000u64 {
        partial += term(t);
        if t == next {
            marks.push(partial);
            next *= 10;
        }
    }
    let inc_prev = marks[1] - marks[0];
    let inc_last = marks[2] - marks[1];
    if inc_last <= 1e-12 * (1.0 + partial) {
        return true;
    }
    inc_last < 0.95 * inc_prev
}

/// Exponent of `x^{-gamma/(2+gamma)} N(x)^{1/Q}` when `N(x) = x^{-d}`.
fn a2_exponent(budget: &EntropyBudget) -> f64 {
    budget.mixing_power() + budget.bracket_exponent / budget.q as f64
}

const A2_CUT: f64 = 1e-9;

/// Entropy-integral condition for polynomial bracketing growth.
pub fn check_a2_integral(budget: &EntropyBudget) -> Result<ConditionReport> {
    let e = a2_exponent(budget);
    let pass = e < 1.0 - 1e-12;
    let q = budget.q as f64;
    let mut diagnostics = json!({
        "integrand_exponent": e,
        "q": budget.q,
        "gamma": budget.gamma,
        "bracket_exponent": budget.bracket_exponent,
        "q_lower_bound": budget.bracket_exponent * (budget.gamma / 2.0 + 1.0),
        "q_margin": q - budget.bracket_exponent * (budget.gamma / 2.0 + 1.0),
        "numeric_verdict": a2_numeric_verdict(budget),
    });
    let value = if pass {
        let closed = 1.0 / (1.0 - e);
        let body = quad::integrate_geometric(&|x: f64| x.powf(-e), A2_CUT, 1.0, 1e-9, 0.0);
        let head = A2_CUT.powf(1.0 - e) / (1.0 - e);
        let numeric = body + head;
        let rel = ((numeric - closed) / closed).abs();
        diagnostics["quadrature"] = json!(numeric);
        diagnostics["quadrature_rel_error"] = json!(rel);
        diagnostics["quadrature_agrees"] = json!(rel < 1e-6);
        Some(closed)
    } else {
        None
    };
    Ok(ConditionReport { condition: "A2".into(), pass, value, diagnostics })
}

/// Decides integrability from truncated integrals `int_c^1` at
/// `c = 1e-3, 1e-6, 1e-9`: convergent when the second increment is below
/// 90% of the first.
pub fn a2_numeric_verdict(budget: &EntropyBudget) -> bool {
    let e = a2_exponent(budget);
    let f = |x: f64| x.powf(-e);
    let i3 = quad::integrate_geometric(&f, 1e-3, 1.0, 0.0, 1e-10);
    let i6 = i3 + quad::integrate_geometric(&f, 1e-6, 1e-3, 0.0, 1e-10);
    let i9 = i6 + quad::integrate_geometric(&f, 1e-9, 1e-6, 0.0, 1e-10);
    (i9 - i6) < 0.9 * (i6 - i3)
}

/// Envelope and uniform moment bounds, by plug-in over the sample.
///
/// Envelopes: `1` for indicators, `|e|` for residual indicators and `|y|`
/// for response indicators.
pub fn check_a3(sample: Sample<'_>, z_grid: &[Point], budget: &EntropyBudget) -> Result<ConditionReport> {
    let n = sample.n();
    if n == 0 {
        return Err(invalid("sample is empty"));
    }
    if z_grid.is_empty() {
        return Err(invalid("threshold grid is empty"));
    }
    let (kind, d) = match sample {
        Sample::Scalar(_) => (crate::empproc::FamilyKind::Indicator, 1),
        Sample::Residual { .. } => (crate::empproc::FamilyKind::ResidualIndicator, 1),
        Sample::Regression(s) => (crate::empproc::FamilyKind::ResponseIndicator, s.d()),
    };
    sample.check(kind, d)?;
    let q = budget.q as f64;
    let p = metric_order(budget.q, budget.gamma)?;
    let envelope: Vec<f64> = match sample {
        Sample::Scalar(v) => vec![1.0; v.len()],
        Sample::Residual { residuals, .. } => residuals.iter().map(|e| e.abs()).collect(),
        Sample::Regression(s) => s.responses().iter().map(|y| y.abs()).collect(),
    };
    let nf = n as f64;
    let envelope_moment = envelope.iter().map(|v| v.powf(q)).sum::<f64>() / nf;
    let mut sup_moment = 0.0f64;
    let mut sup_index = 0;
    for (j, z) in z_grid.iter().enumerate() {
        let m = sample.column(z).iter().map(|v| v.abs().powf(p)).sum::<f64>() / nf;
        if m > sup_moment {
            sup_moment = m;
            sup_index = j;
        }
    }
    let top: Vec<f64> = envelope.iter().map(|v| v.powf(p)).collect();
    let total: f64 = top.iter().sum();
    let largest = top.iter().cloned().fold(0.0, f64::max);
    let dominance = if total > 0.0 { largest / total } else { 0.0 };
    let heavy_tail = dominance > 0.5;
    if !(envelope_moment.is_finite() && sup_moment.is_finite()) {
        return Err(Error::NonFinite("plug-in moment".into()));
    }
    Ok(ConditionReport {
        condition: "A3".into(),
        pass: true,
        value: Some(envelope_moment),
        diagnostics: json!({
            "envelope_moment": envelope_moment,
            "envelope_order": budget.q,
            "sup_family_moment": sup_moment,
            "family_order": p,
            "sup_attained_at": z_grid[sup_index],
            "top_share": dominance,
            "heavy_tail_warning": heavy_tail,
        }),
    })
}
