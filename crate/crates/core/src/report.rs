//! Pass/fail check reports shared by the validators.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub condition: String,
    pub indices: Vec<i64>,
    pub status: Status,
}

/// Ordered list of checks. Passing groups get one entry; every failure is
/// listed with its indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pass(&mut self, condition: &str) {
        self.entries.push(CheckEntry { condition: condition.into(), indices: vec![], status: Status::Pass });
    }

    pub fn fail(&mut self, condition: &str, indices: Vec<i64>) {
        self.entries.push(CheckEntry { condition: condition.into(), indices, status: Status::Fail });
    }

    /// Records one entry per failure, or a single pass entry.
    pub fn group(&mut self, condition: &str, failures: Vec<Vec<i64>>) {
        if failures.is_empty() {
            self.pass(condition);
        } else {
            for f in failures {
                self.fail(condition, f);
            }
        }
    }

    pub fn check(&mut self, condition: &str, ok: bool) {
        if ok {
            self.pass(condition)
        } else {
            self.fail(condition, vec![])
        }
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }
}
