use serde::{Deserialize, Serialize};

use crate::empproc::Point;

/// One calibrated statistic inside a [`TestReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticResult {
    pub name: String,
    pub value: f64,
    pub critical_value: Option<f64>,
    pub p_value: Option<f64>,
    /// `value > critical_value`; absent for diagnostic statistics.
    pub reject: Option<bool>,
    pub calibration: String,
}

impl StatisticResult {
    pub fn calibrated(name: &str, value: f64, critical_value: f64, p_value: f64, calibration: &str) -> Self {
        Self {
            name: name.into(),
            value,
            critical_value: Some(critical_value),
            p_value: Some(p_value.clamp(0.0, 1.0)),
            reject: Some(value > critical_value),
            calibration: calibration.into(),
        }
    }

    pub fn diagnostic(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            critical_value: None,
            p_value: None,
            reject: None,
            calibration: "none (diagnostic only)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub test: String,
    pub n: usize,
    pub level: f64,
    pub statistics: Vec<StatisticResult>,
    pub sigma2_hat: Option<f64>,
    pub argmax_s: Option<f64>,
    pub argmax_z: Option<Point>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
    pub diagnostics: serde_json::Value,
}

impl TestReport {
    pub fn statistic(&self, name: &str) -> Option<&StatisticResult> {
        self.statistics.iter().find(|s| s.name == name)
    }

    /// True when any calibrated statistic rejects.
    pub fn rejects(&self) -> bool {
        self.statistics.iter().any(|s| s.reject == Some(true))
    }
}
