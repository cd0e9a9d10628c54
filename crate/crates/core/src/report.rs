//! Named verification checks shared by every module and the CLI.

use serde::Serialize;

/// Whether a failed check means the input is mathematically wrong
/// (`Assertion`) or merely lacks an optional property (`Property`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Assertion,
    Property,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    /// A component or value demonstrating failure, or a summary on success.
    pub witness: Option<String>,
}

impl Check {
    pub fn assertion(name: impl Into<String>, passed: bool, witness: Option<String>) -> Self {
        Check {
            name: name.into(),
            kind: CheckKind::Assertion,
            passed,
            witness,
        }
    }

    pub fn property(name: impl Into<String>, passed: bool, witness: Option<String>) -> Self {
        Check {
            name: name.into(),
            kind: CheckKind::Property,
            passed,
            witness,
        }
    }
}

/// An ordered list of checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckList {
    pub checks: Vec<Check>,
}

impl CheckList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, o: CheckList) {
        self.checks.extend(o.checks);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.get(name).map(|c| c.passed)
    }

    /// True when no assertion failed; properties may fail.
    pub fn assertions_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.passed || c.kind == CheckKind::Property)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}
