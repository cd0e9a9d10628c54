//! Reports: a deterministic JSON document plus a plain-text rendering.
//!
//! Schema `ambientforge-report/1`:
//!
//! ```text
//! {
//!   "schema": "ambientforge-report/1",
//!   "command": "verify",
//!   "inputs": { "path": "...", "sha256": "<hex>", "flags": { "order": "2" } },
//!   "checks": [ { "name": "...", "kind": "assertion" | "property",
//!                 "status": "pass" | "fail", "witness": "..." | null } ],
//!   "values": [ { "name": "Ricci", "entries": [ { "index": "x1,y1", "value": "..." } ] } ],
//!   "error": null | { "kind": "input" | "precondition" | "obstructed" | "barrier" | "internal",
//!                     "message": "...", "values": [ ... ] }
//! }
//! ```
//!
//! The digest covers the input bytes and the flags, so equal inputs give
//! byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ambientforge::report::{CheckKind, CheckList};
use ambientforge::tensor::TensorField;
use ambientforge::Scalar;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "ambientforge-report/1";

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Inputs {
    pub path: Option<String>,
    pub sha256: String,
    pub flags: BTreeMap<String, String>,
}

impl Inputs {
    pub fn new(path: Option<String>, bytes: &[u8], flags: BTreeMap<String, String>) -> Self {
        let mut h = Sha256::new();
        h.update(bytes);
        for (k, v) in &flags {
            h.update([0u8]);
            h.update(k.as_bytes());
            h.update([b'=']);
            h.update(v.as_bytes());
        }
        let sha256 = h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{:02x}", b);
            s
        });
        Inputs { path, sha256, flags }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub kind: &'static str,
    pub status: &'static str,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Entry {
    pub index: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValueBlock {
    pub name: String,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Input,
    Precondition,
    Obstructed,
    Barrier,
    Internal,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErrorInfo {
    pub kind: ErrorKind,
    pub message: String,
    pub values: Vec<ValueBlock>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Inputs,
    pub checks: Vec<CheckEntry>,
    pub values: Vec<ValueBlock>,
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn new(command: &str, inputs: Inputs) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            inputs,
            checks: Vec::new(),
            values: Vec::new(),
            error: None,
        }
    }

    pub fn add_checks(&mut self, prefix: &str, list: &CheckList) {
        for c in &list.checks {
            let name = if prefix.is_empty() { c.name.clone() } else { format!("{}: {}", prefix, c.name) };
            self.checks.push(CheckEntry {
                name,
                kind: match c.kind {
                    CheckKind::Assertion => "assertion",
                    CheckKind::Property => "property",
                },
                status: if c.passed { "pass" } else { "fail" },
                witness: c.witness.clone(),
            });
        }
    }

    pub fn assert(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        self.checks.push(CheckEntry {
            name: name.into(),
            kind: "assertion",
            status: if passed { "pass" } else { "fail" },
            witness: if passed { None } else { witness.or_else(|| Some("check failed".into())) },
        });
    }

    pub fn property(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        self.checks.push(CheckEntry {
            name: name.into(),
            kind: "property",
            status: if passed { "pass" } else { "fail" },
            witness: if passed { None } else { witness.or_else(|| Some("check failed".into())) },
        });
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.check(name).map(|c| c.status == "pass")
    }

    pub fn value(&mut self, block: ValueBlock) {
        self.values.push(block);
    }

    pub fn fail(&mut self, kind: ErrorKind, message: impl Into<String>, values: Vec<ValueBlock>) {
        self.error = Some(ErrorInfo {
            kind,
            message: message.into(),
            values,
        });
    }

    /// 0 when every check passes and no error occurred, 1 on a failed
    /// check or a mathematical error, 2 on an input error.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some(e) if e.kind == ErrorKind::Input => 2,
            Some(_) => 1,
            None if self.checks.iter().any(|c| c.status == "fail") => 1,
            None => 0,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn block(&self, name: &str) -> Option<&ValueBlock> {
        self.values.iter().find(|b| b.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} ({})", self.command, self.inputs.path.as_deref().unwrap_or("<builtin>"));
        for b in &self.values {
            write_block(&mut s, b);
        }
        for c in &self.checks {
            let tag = match (c.status, c.kind) {
                ("pass", _) => "PASS",
                _ => "FAIL",
            };
            match &c.witness {
                Some(w) => {
                    let _ = writeln!(s, "{} {}: {}", tag, c.name, w);
                }
                None => {
                    let _ = writeln!(s, "{} {}", tag, c.name);
                }
            }
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "ERROR ({:?}): {}", e.kind, e.message);
            for b in &e.values {
                write_block(&mut s, b);
            }
        }
        s
    }
}

fn write_block(s: &mut String, b: &ValueBlock) {
    let _ = writeln!(s, "{}:", b.name);
    if b.entries.is_empty() {
        let _ = writeln!(s, "  0");
    }
    for e in &b.entries {
        if e.index.is_empty() {
            let _ = writeln!(s, "  {}", e.value);
        } else {
            let _ = writeln!(s, "  [{}] = {}", e.index, e.value);
        }
    }
}

/// Which components of a tensor to list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Listing {
    All,
    /// Non-decreasing index tuples of a symmetric tensor.
    Symmetric,
    /// `Γ^a_bc` with `b ≤ c`.
    LowerSymmetric,
    /// `R_abcd` with `a < b`, `c < d` and `(a,b) ≤ (c,d)`.
    Riemann,
    /// `T_abc` with `b < c`, for tensors antisymmetric in the last pair.
    LastAntisymmetric,
}

impl Listing {
    fn keeps(self, i: &[usize]) -> bool {
        match self {
            Listing::All => true,
            Listing::Symmetric => i.windows(2).all(|w| w[0] <= w[1]),
            Listing::LowerSymmetric => i[1] <= i[2],
            Listing::Riemann => i[0] < i[1] && i[2] < i[3] && (i[0], i[1]) <= (i[2], i[3]),
            Listing::LastAntisymmetric => i[1] < i[2],
        }
    }
}

/// Nonzero components of a tensor, indexed by the given labels.
pub fn tensor_block<S: Scalar + std::fmt::Display>(
    name: &str,
    t: &TensorField<S>,
    labels: &[String],
    listing: Listing,
) -> ValueBlock {
    let mut entries = Vec::new();
    for (idx, v) in t.iter() {
        if v.is_zero() || !listing.keeps(&idx) {
            continue;
        }
        let index = idx.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join(",");
        entries.push(Entry {
            index,
            value: v.to_string(),
        });
    }
    ValueBlock {
        name: name.to_string(),
        entries,
    }
}

pub fn scalar_block(name: &str, value: String) -> ValueBlock {
    ValueBlock {
        name: name.to_string(),
        entries: vec![Entry {
            index: String::new(),
            value,
        }],
    }
}
