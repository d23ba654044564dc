//! Versioned JSON run reports. Floating-point values are rounded to 12
//! significant digits when written, so reports compare byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "cyclesparse-report/1";
pub const SIGNIFICANT_DIGITS: usize = 12;

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub schema: String,
    pub command: String,
    /// Arguments that reproduce the run, excluding the report path.
    pub args: Vec<String>,
    pub seed: u64,
    pub input_sha256: String,
    /// Edge count of the input followed by the count after every round.
    pub edge_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_exact: Option<bool>,
    /// Spectral or asymmetric error certificates by name.
    pub certificates: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles_valid: Option<bool>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    /// Only recorded on request, since it breaks byte-identical replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

/// Hex SHA-256 of the input bytes.
pub fn input_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Round to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite values and
/// zero pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num
                .as_f64()
                .map(round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

impl ApproxReport {
    pub fn new(command: &str, args: Vec<String>, seed: u64, input: &[u8]) -> Self {
        ApproxReport {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            args,
            seed,
            input_sha256: input_hash(input),
            edge_counts: Vec::new(),
            degree_exact: None,
            certificates: BTreeMap::new(),
            cycles_valid: None,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            wall_clock_ms: None,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: Option<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn certificate(&mut self, name: &str, value: f64) {
        self.certificates.insert(name.to_string(), value);
    }

    pub fn metric<T: Serialize>(&mut self, name: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(name.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Pretty JSON with rounded floats and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_value(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: ApproxReport = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        if r.schema != SCHEMA {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unsupported schema {:?}", r.schema),
            });
        }
        Ok(r)
    }
}
