//! CSV tables with `#` metadata lines, written byte-deterministically.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    /// Standard provenance block: tool version, command, sampler and the
    /// full resolved configuration.
    pub fn provenance(&mut self, command: &str, cfg: &ExperimentConfig) -> &mut Self {
        self.meta("tool", format!("naimark {VERSION}"));
        self.meta("command", command);
        self.meta("sampler", naimark::simulator::SAMPLER_NAME);
        for line in cfg.render().lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                self.meta(&format!("config.{k}"), v);
            }
        }
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// 17 significant digits in scientific form; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    fs::write(path, contents).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

/// Reads a table written by [`Table::render`].
pub fn parse_table(text: &str) -> Result<Table, CliError> {
    let mut t = Table::default();
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(" = ") {
                t.meta.push((k.to_string(), v.to_string()));
            }
            continue;
        }
        t.header = line.split(',').map(str::to_string).collect();
        break;
    }
    if t.header.is_empty() {
        return Err(CliError::Config("table has no header row".into()));
    }
    for line in lines {
        t.rows.push(line.split(',').map(str::to_string).collect());
    }
    Ok(t)
}
