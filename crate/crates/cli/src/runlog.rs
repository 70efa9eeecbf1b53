//! Append-only JSON-lines log with one record per invocation.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use avta::vertices::Counters;
use serde_json::json;

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub command: String,
    /// Arguments as given, program name excluded.
    pub parameters: Vec<String>,
    pub seed: u64,
    pub wall_time_ms: f64,
    pub counters: Counters,
    pub exit_code: i32,
    /// Report or output file, if any was written.
    pub result_path: Option<PathBuf>,
    /// One-line outcome, or the error message.
    pub summary: String,
}

impl RunRecord {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
            "counters": {
                "membership_calls": self.counters.membership_calls,
                "pivots": self.counters.pivots,
                "pivot_searches": self.counters.pivot_searches,
                "work": self.counters.work,
                "witnesses": self.counters.witnesses,
                "discarded": self.counters.discarded,
            },
            "exit_code": self.exit_code,
            "result_path": self.result_path.as_ref().map(|p| p.display().to_string()),
            "summary": self.summary,
        })
    }

    pub fn append_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", self.to_json())
    }
}
