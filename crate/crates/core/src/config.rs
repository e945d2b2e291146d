//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Keys must be known, may appear once, and every
//! diagnostic carries the 1-based line and column of the offending token.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const KNOWN_KEYS: &[&str] = &[
    // loads and boundary
    "g", "p", "w", "h", "length", "x0", "y0",
    // ode and shooting
    "alpha0", "t0", "s_max", "tol", "alpha_guess", "tension_guess", "multistart",
    // sweeps over load ratios
    "pair", "ratio_min", "ratio_max", "ratio_step", "ratio", "end",
    // closed forms
    "kind", "intensity",
    // bead chain
    "n_beads", "k", "mass", "gamma", "v_eq", "d_max", "t_max", "dt_min", "dt_max", "span",
    "gravity", "contact_threshold", "jitter", "seed",
];

/// Keys holding words rather than numbers.
const TEXT_KEYS: &[&str] = &["pair", "kind", "end"];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn config_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Config { line, column, message: message.into() }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let Some(eq) = content.find('=') else {
                return Err(config_error(line, indent + 1, "expected `key = value`"));
            };
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(config_error(line, eq + 1, "missing key before `=`"));
            }
            if key.contains(char::is_whitespace) {
                return Err(config_error(line, indent + 1, format!("malformed key `{key}`")));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(config_error(line, indent + 1, format!("unknown key `{key}`")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(config_error(line, eq + 2, format!("missing value for `{key}`")));
            }
            if !TEXT_KEYS.contains(&key) && value.parse::<f64>().is_err() {
                return Err(config_error(line, value_col, format!("`{key}` expects a number, got `{value}`")));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(config_error(
                    line,
                    indent + 1,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            entries.insert(
                key.to_string(),
                Entry { value: value.to_string(), line, column: value_col },
            );
        }
        Ok(Config { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Overrides or inserts a value, e.g. from a command-line flag.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), Entry { value: value.into(), line: 0, column: 0 });
    }

    /// Parses the value of `key` if present.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| {
                config_error(e.line, e.column, format!("invalid value `{}` for `{key}`: {err}", e.value))
            }),
        }
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::InvalidInput(format!("missing required key `{key}`")))
    }

    /// Error pointing at the value of `key`, for semantic checks done by the
    /// caller.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> Error {
        match self.entries.get(key) {
            Some(e) if e.line > 0 => config_error(e.line, e.column, message),
            _ => Error::InvalidInput(message.into()),
        }
    }
}
