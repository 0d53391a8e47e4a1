use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Flags shared by every subcommand. An analysis that uses one declares its default.
pub const GLOBAL_KEYS: [&str; 3] = ["depth", "precision-bits", "window"];

/// One option of a subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Opt {
    pub name: &'static str,
    pub help: &'static str,
    pub default: Option<&'static str>,
    pub positional: bool,
}

impl Opt {
    pub const fn flag(name: &'static str, default: &'static str, help: &'static str) -> Self {
        Opt { name, help, default: Some(default), positional: false }
    }

    pub const fn positional(name: &'static str, help: &'static str) -> Self {
        Opt { name, help, default: None, positional: true }
    }

    pub fn is_global(&self) -> bool {
        GLOBAL_KEYS.contains(&self.name)
    }
}

/// Resolved string parameters of one run; replaying a manifest rebuilds this map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| CliError::Usage(format!("missing value for {key}")))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let s = self.required(key)?;
        s.parse().map_err(|_| CliError::Malformed(format!("{key} = {s:?}")))
    }

    pub fn u32(&self, key: &str) -> Result<u32, CliError> {
        self.parse(key)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.parse(key)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Malformed(format!("{key} must be finite")))
        }
    }

    pub fn string(&self, key: &str) -> Result<String, CliError> {
        self.required(key).map(str::to_string)
    }

    /// `--window a:b`, or `None` when unset or "auto".
    pub fn window(&self) -> Result<Option<(u32, u32)>, CliError> {
        match self.raw("window") {
            None | Some("auto") => Ok(None),
            Some(s) => {
                let bad = || CliError::Malformed(format!("window {s:?} is not a:b"));
                let (a, b) = s.split_once(':').ok_or_else(bad)?;
                let a: u32 = a.trim().parse().map_err(|_| bad())?;
                let b: u32 = b.trim().parse().map_err(|_| bad())?;
                if a >= b {
                    return Err(bad());
                }
                Ok(Some((a, b)))
            }
        }
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self.required(key)?;
        s.split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<_>>>()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CliError::Malformed(format!("{key} = {s:?} is not a list of numbers")))
    }
}

/// Tabular output; every cell is already rendered.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// What a run produces: a human summary, a table and a JSON document.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub table: Table,
    pub json: Value,
}

impl Report {
    pub fn new<T: Serialize>(text: String, table: Table, json: &T) -> Result<Self, CliError> {
        let json = serde_json::to_value(json).map_err(|e| CliError::Io(format!("serializing output: {e}")))?;
        Ok(Report { text, table, json })
    }
}

/// A named analysis selectable from the command line.
pub trait Analysis {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// CSV columns and JSON fields, shown in `--help`.
    fn schema(&self) -> &'static str;
    fn options(&self) -> Vec<Opt>;
    fn run(&self, params: &Params) -> Result<Report, CliError>;
}

/// Shortest round-trip rendering of an f64.
pub fn num(x: f64) -> String {
    format!("{x}")
}
