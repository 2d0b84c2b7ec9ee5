//! Check reports and the small fitting helpers they use.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one property check. Serialized as one entry of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// The mathematical statement the check verifies.
    pub paper_ref: String,
    pub pass: bool,
    /// Raw margins; a margin below the check's tolerance fails it.
    pub margins: Vec<f64>,
    /// Fitted constants and exponents, and other reported scalars.
    pub fitted: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: &str, statement: &str) -> Self {
        Self {
            name: name.to_string(),
            paper_ref: statement.to_string(),
            pass: true,
            margins: Vec::new(),
            fitted: BTreeMap::new(),
        }
    }

    pub fn fit(mut self, key: &str, value: f64) -> Self {
        self.fitted.insert(key.to_string(), value);
        self
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.fitted.insert(key.to_string(), value);
    }

    /// Record a margin that must stay at or above `-tol`.
    pub fn require(&mut self, margin: f64, tol: f64) {
        self.margins.push(margin);
        if !(margin >= -tol) {
            self.pass = false;
        }
    }

    pub fn fail(&mut self) {
        self.pass = false;
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Serialize a list of reports as pretty JSON with a trailing newline.
pub fn to_json(reports: &[CheckReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports are plain data");
    s.push('\n');
    s
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln y` against `ln x`. Non-positive values are skipped; returns
/// `None` with fewer than two usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    Some(linear_fit(&lx, &ly))
}
