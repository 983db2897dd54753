use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// One named comparison of a measured value against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub grid: BTreeMap<String, u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub status: Status,
    pub provenance: Provenance,
    /// Command-specific measurements.
    pub details: serde_json::Value,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            status: Status::Pass,
            provenance: Provenance { seed, grid: BTreeMap::new(), version: env!("CARGO_PKG_VERSION").to_string() },
            details: serde_json::Value::Null,
            wall_time_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn grid(&mut self, key: &str, value: usize) -> &mut Self {
        self.provenance.grid.insert(key.to_string(), value as u64);
        self
    }

    /// Records `measured <= threshold + tolerance`.
    pub fn at_most(&mut self, name: &str, measured: f64, threshold: f64, tolerance: f64) -> &mut Self {
        self.push(name, measured <= threshold + tolerance, measured, threshold, tolerance)
    }

    /// Records `measured >= threshold - tolerance`.
    pub fn at_least(&mut self, name: &str, measured: f64, threshold: f64, tolerance: f64) -> &mut Self {
        self.push(name, measured >= threshold - tolerance, measured, threshold, tolerance)
    }

    /// Records `|measured - threshold| <= tolerance`.
    pub fn close_to(&mut self, name: &str, measured: f64, threshold: f64, tolerance: f64) -> &mut Self {
        self.push(name, (measured - threshold).abs() <= tolerance, measured, threshold, tolerance)
    }

    /// Records a boolean outcome as measured 1 or 0 against threshold 1.
    pub fn holds(&mut self, name: &str, ok: bool) -> &mut Self {
        self.push(name, ok, f64::from(u8::from(ok)), 1.0, 0.0)
    }

    pub fn push(&mut self, name: &str, ok: bool, measured: f64, threshold: f64, tolerance: f64) -> &mut Self {
        // JSON has no infinities; they are reported as the largest finite value
        let finite = |v: f64| if v.is_finite() { v } else if v > 0.0 { f64::MAX } else if v < 0.0 { f64::MIN } else { 0.0 };
        self.checks.push(Check {
            name: name.to_string(),
            status: Status::from_bool(ok),
            measured: finite(measured),
            threshold: finite(threshold),
            tolerance: finite(tolerance),
        });
        self.status = Status::from_bool(self.checks.iter().all(|c| c.status == Status::Pass));
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    /// The report with the timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_ms: 0, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_the_checks() {
        let mut r = VerificationReport::new("test", 1);
        r.at_most("a", 0.5, 1.0, 0.0);
        assert!(r.passed());
        r.at_least("b", 0.5, 1.0, 0.1);
        assert!(!r.passed());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let mut r = VerificationReport::new("test", 7);
        r.param("n", 3).grid("t", 10_000).close_to("x", 0.1 + 0.2, 0.3, 1e-15).at_most("inf", f64::INFINITY, 1.0, 0.0);
        r.details = serde_json::json!({ "value": 1.0 / 3.0 });
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
