//! Named property checks and the report that collects them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this configuration.
    Skipped,
    /// The data could not decide the check (e.g. an unresolved fit window).
    Inconclusive,
    /// Trivially exact, nothing to measure.
    Exact,
}

impl Status {
    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Inconclusive => "inconclusive",
            Status::Exact => "exact",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Short statement of the property being asserted.
    pub basis: String,
    pub status: Status,
    #[serde(deserialize_with = "nullable")]
    pub tolerance: f64,
    /// Non-finite values are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable_map")]
    pub measured: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn nullable<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn nullable_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
    Ok(raw.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
}

impl Check {
    pub fn new(name: impl Into<String>, basis: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            basis: basis.into(),
            status: Status::Pass,
            tolerance: 0.0,
            measured: BTreeMap::new(),
            note: None,
        }
    }

    pub fn measure(mut self, key: impl Into<String>, value: f64) -> Self {
        self.measured.insert(key.into(), value);
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn passes(self, ok: bool) -> Self {
        self.status(Status::from_bool(ok))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.measured.get(key).copied()
    }

    pub fn passed(&self) -> bool {
        !self.status.is_failure()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Configuration fingerprint.
    pub context: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(context: impl Into<String>) -> Self {
        Self {
            context: context.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name,status,tolerance,measured,basis")?;
        for c in &self.checks {
            let measured: Vec<String> = c.measured.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
            writeln!(
                f,
                "{},{},{:.3e},{},\"{}\"",
                c.name,
                c.status,
                c.tolerance,
                measured.join(";"),
                c.basis
            )?;
        }
        Ok(())
    }
}
