//! File writers. Floats use Rust's `{:?}` formatting: the shortest decimal
//! string that parses back to the same `f64`, switching to exponent form
//! outside `1e-5..1e16`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const UNITS_COMMENT: &str =
    "# units: frequencies in nu, times in 1/nu, angular momenta in hbar, lengths in trap.r0 units, momenta in hbar/length";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Units {
    pub frequency: &'static str,
    pub time: &'static str,
    pub angular_momentum: &'static str,
    pub length: &'static str,
    pub momentum: &'static str,
    pub entropy: &'static str,
}

pub const UNITS: Units = Units {
    frequency: "nu (trap frequency)",
    time: "1/nu",
    angular_momentum: "hbar",
    length: "same unit as trap.r0",
    momentum: "hbar / length",
    entropy: "bits",
};

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// CSV text: units comment, optional extra comments, header, rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(comments: &[String], columns: &[&str]) -> Self {
        let mut text = String::new();
        text.push_str(UNITS_COMMENT);
        text.push('\n');
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, values: impl IntoIterator<Item = f64>) {
        let cells: Vec<String> = values.into_iter().map(num).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_text(path, &text)
}
