//! Deterministic structured reports shared by every module.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: Value,
    pub threshold: Value,
    pub pass: bool,
    /// Reported for context only; never counted as a failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: String,
    pub command: String,
    pub config: Value,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            format_version: crate::FORMAT_VERSION.to_string(),
            command: command.into(),
            config: Value::Null,
            checks: Vec::new(),
            data: None,
            timings_ms: None,
        }
    }

    pub fn with_config(mut self, config: Value) -> Self {
        self.config = config;
        self
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        measured: impl Into<Value>,
        threshold: impl Into<Value>,
        pass: bool,
    ) -> &mut Check {
        self.checks.push(Check {
            name: name.into(),
            measured: measured.into(),
            threshold: threshold.into(),
            pass,
            informational: false,
            detail: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn extend(&mut self, other: Report) {
        let prefix = other.command.clone();
        let same = prefix == self.command;
        for mut c in other.checks {
            if !same {
                c.name = format!("{prefix}/{}", c.name);
            }
            self.checks.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.informational)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass && !c.informational)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl Check {
    pub fn detail(&mut self, d: impl Into<String>) -> &mut Self {
        self.detail = Some(d.into());
        self
    }

    pub fn informational(&mut self) -> &mut Self {
        self.informational = true;
        self
    }
}
