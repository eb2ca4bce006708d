//! Structured pass/fail records shared by the library, tests, and CLI.
//!
//! * [`CheckRecord`]: one verified statement with status and residual data.
//! * [`Report`]: a titled batch of records with configuration echo, rendered
//!   either as stable text (one line per record) or as versioned JSON.
//! * [`par_map`]: data-parallel map over work items, falling back to a
//!   sequential loop when the `parallel` feature is disabled.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Schema version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one checked statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// The statement holds exactly.
    Pass,
    /// The statement fails; the record carries a residual witness.
    Fail,
    /// The statement is vacuous or out of scope for the configuration.
    Skipped,
}

/// One checked statement.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    /// Catalogue key, e.g. `1.14[i=1,j=1,m=1,n=-1]`.
    pub id: String,
    /// What the statement was evaluated on (state sets, module, window).
    pub instance: String,
    /// Outcome.
    pub status: Status,
    /// First nonzero residual, rendered, when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    /// Extra diagnostic detail.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CheckRecord {
    /// A passing record.
    pub fn pass(id: impl Into<String>, instance: impl Into<String>) -> Self {
        CheckRecord {
            id: id.into(),
            instance: instance.into(),
            status: Status::Pass,
            residual: None,
            notes: None,
        }
    }

    /// A failing record with a rendered residual witness.
    pub fn fail(
        id: impl Into<String>,
        instance: impl Into<String>,
        residual: impl Into<String>,
    ) -> Self {
        CheckRecord {
            id: id.into(),
            instance: instance.into(),
            status: Status::Fail,
            residual: Some(residual.into()),
            notes: None,
        }
    }

    /// A skipped record with a reason.
    pub fn skipped(
        id: impl Into<String>,
        instance: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        CheckRecord {
            id: id.into(),
            instance: instance.into(),
            status: Status::Skipped,
            residual: None,
            notes: Some(reason.into()),
        }
    }

    /// Attach a note.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes = Some(note.into());
        self
    }
}

/// A titled batch of checked statements.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Human-readable batch title.
    pub title: String,
    /// Echo of the configuration the batch ran under.
    pub config: BTreeMap<String, String>,
    /// The records, in catalogue order.
    pub records: Vec<CheckRecord>,
    /// JSON schema version.
    pub schema_version: u32,
}

impl Report {
    /// New empty report.
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            config: BTreeMap::new(),
            records: Vec::new(),
            schema_version: SCHEMA_VERSION,
        }
    }

    /// Record a configuration key/value pair.
    pub fn set_config(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.config.insert(key.into(), value.into());
    }

    /// Append a record.
    pub fn push(&mut self, rec: CheckRecord) {
        self.records.push(rec);
    }

    /// Append many records.
    pub fn extend(&mut self, recs: impl IntoIterator<Item = CheckRecord>) {
        self.records.extend(recs);
    }

    /// `(passed, failed, skipped)` counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in &self.records {
            match r.status {
                Status::Pass => c.0 += 1,
                Status::Fail => c.1 += 1,
                Status::Skipped => c.2 += 1,
            }
        }
        c
    }

    /// Whether no record failed.
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    /// Stable text rendering: header, one line per record, summary footer.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.title);
        for (k, v) in &self.config {
            let _ = writeln!(out, "   {k} = {v}");
        }
        for r in &self.records {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = write!(out, "{tag} {}", r.id);
            if !r.instance.is_empty() {
                let _ = write!(out, "  ({})", r.instance);
            }
            if let Some(res) = &r.residual {
                let _ = write!(out, "  residual: {res}");
            }
            if let Some(n) = &r.notes {
                let _ = write!(out, "  [{n}]");
            }
            let _ = writeln!(out);
        }
        let (p, f, s) = self.counts();
        let _ = writeln!(out, "-- {p} passed, {f} failed, {s} skipped --");
        out
    }

    /// JSON rendering with the schema version embedded.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization")
    }
}

/// Map a function over work items, in parallel when built with the
/// `parallel` feature (the caller controls thread count through the global
/// rayon pool) and sequentially otherwise.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(|t| f(t)).collect()
}

/// Map a function over work items, in parallel when built with the
/// `parallel` feature and sequentially otherwise.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(|t| f(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_is_line_per_record() {
        let mut rep = Report::new("demo");
        rep.set_config("M", "1");
        rep.push(CheckRecord::pass("1.11[i=1,j=1,m=1,n=-1]", "4 states"));
        rep.push(CheckRecord::fail("1.13[i=1,j=2,m=1,n=0]", "4 states", "(1) at |0,0,0,0>"));
        rep.push(CheckRecord::skipped("1.18", "", "no instances at (M,N)=(1,0)"));
        let text = rep.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "== demo ==");
        assert_eq!(lines[1], "   M = 1");
        assert!(lines[2].starts_with("PASS 1.11[i=1,j=1,m=1,n=-1]"));
        assert!(lines[3].contains("residual: (1) at |0,0,0,0>"));
        assert!(lines[4].starts_with("SKIP 1.18"));
        assert_eq!(lines[5], "-- 1 passed, 1 failed, 1 skipped --");
        assert!(!rep.all_passed());
        assert_eq!(rep.counts(), (1, 1, 1));
    }

    #[test]
    fn json_carries_schema_version() {
        let rep = Report::new("demo");
        let v = rep.to_json();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert!(v["records"].as_array().unwrap().is_empty());
    }

    #[test]
    fn par_map_preserves_order() {
        let items: Vec<u64> = (0..64).collect();
        let out = par_map(items, |x| x * x);
        assert_eq!(out[10], 100);
        assert_eq!(out.len(), 64);
    }
}
