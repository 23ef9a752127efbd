//! Pass/fail reports for the verification suites.

use std::collections::BTreeMap;
use std::fmt::{self, Display};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub claim: String,
    pub parameters: String,
    pub status: bool,
    pub checks: Vec<Check>,
    pub dimensions: BTreeMap<String, usize>,
    pub characters: BTreeMap<String, String>,
    pub witnesses: Vec<String>,
}

impl Report {
    pub fn new(claim: impl Into<String>, parameters: impl Into<String>) -> Self {
        Report {
            claim: claim.into(),
            parameters: parameters.into(),
            status: true,
            checks: Vec::new(),
            dimensions: BTreeMap::new(),
            characters: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    /// Records a check that passes when both sides render identically.
    pub fn expect_eq(&mut self, name: impl Into<String>, expected: impl Display, observed: impl Display) {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        let pass = expected == observed;
        self.push(Check { name: name.into(), expected, observed, pass });
    }

    pub fn expect(&mut self, name: impl Into<String>, pass: bool) {
        let observed = if pass { "holds" } else { "fails" };
        self.push(Check { name: name.into(), expected: "holds".into(), observed: observed.into(), pass });
    }

    pub fn push(&mut self, check: Check) {
        self.status &= check.pass;
        self.checks.push(check);
    }

    pub fn dimension(&mut self, name: impl Into<String>, dim: usize) {
        self.dimensions.insert(name.into(), dim);
    }

    pub fn character(&mut self, name: impl Into<String>, chi: impl Display) {
        self.characters.insert(name.into(), chi.to_string());
    }

    pub fn witness(&mut self, w: impl Into<String>) {
        self.witnesses.push(w.into());
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.status { "PASS" } else { "FAIL" };
        writeln!(f, "[{status}] {} ({})", self.claim, self.parameters)?;
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            writeln!(f, "  {mark} {}: expected {}, observed {}", c.name, c.expected, c.observed)?;
        }
        for w in &self.witnesses {
            writeln!(f, "  witness: {w}")?;
        }
        Ok(())
    }
}
