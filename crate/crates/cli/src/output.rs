//! CSV/JSON artifact assembly.
//!
//! Artifacts are rendered to a single string and written in one call, so
//! identical runs produce byte-identical files. Floats use Rust's shortest
//! round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Column-oriented table; all cells pre-rendered.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form of `x`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Renders `table` as CSV with `#`-prefixed metadata lines on top. The
/// first comment always embeds the resolved config; `extra_comments` go
/// below it (e.g. a result summary).
pub fn render_csv(config_json: &str, extra_comments: &[String], table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "# config: {config_json}").unwrap();
    for comment in extra_comments {
        writeln!(out, "# {comment}").unwrap();
    }
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// JSON twin of [`render_csv`]: config, column names, and rows, plus any
/// `extra` top-level values (e.g. `"summary"`).
pub fn render_json(
    config_json: &str,
    extra: &[(&str, serde_json::Value)],
    table: &Table,
) -> String {
    let config: serde_json::Value =
        serde_json::from_str(config_json).expect("config metadata is valid JSON");
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            serde_json::Value::Array(
                row.iter()
                    .map(|cell| {
                        cell.parse::<f64>()
                            .ok()
                            .and_then(serde_json::Number::from_f64)
                            .map(serde_json::Value::Number)
                            .unwrap_or_else(|| serde_json::Value::String(cell.clone()))
                    })
                    .collect(),
            )
        })
        .collect();
    let mut doc = serde_json::Map::new();
    doc.insert("config".to_string(), config);
    for (key, value) in extra {
        doc.insert(key.to_string(), value.clone());
    }
    doc.insert(
        "columns".to_string(),
        serde_json::Value::Array(
            table
                .columns
                .iter()
                .map(|c| serde_json::Value::String(c.clone()))
                .collect(),
        ),
    );
    doc.insert("rows".to_string(), serde_json::Value::Array(rows));
    let mut text =
        serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("artifact serializes");
    text.push('\n');
    text
}

/// Writes to `out` when given, stdout otherwise.
pub fn write_artifact(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(CliError::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
