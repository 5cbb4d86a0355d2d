//! Scenario files: `[section]` headers followed by `key = value` lines.
//! Values with a physical dimension need a unit suffix (`300 nK`,
//! `20 um`, `0.5 mm/s`); lists are comma separated; `#` starts a comment.
//! Every key must be read by the experiment, so typos surface as errors.

use std::cell::Cell;
use std::str::FromStr;

use thiserror::Error;
use tunnelsim_core::{Dimension, Quantity, UnitSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: `{key}` expects a {expected} with a unit suffix (e.g. `{example}`), got `{value}`")]
    Unit { line: usize, key: String, expected: Dimension, example: String, value: String },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ScenarioError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        ScenarioError::Invalid(msg.into())
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

/// Parsed key-value document; keys are `section.key`.
#[derive(Debug, Clone)]
pub struct Document {
    entries: Vec<Entry>,
    units: UnitSystem,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ScenarioError::Syntax { line, message: "unterminated section header".into() })?.trim();
                if !valid_name(name) {
                    return Err(ScenarioError::Syntax { line, message: format!("invalid section name `{name}`") });
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| ScenarioError::Syntax { line, message: format!("expected `key = value`, got `{content}`") })?;
            let k = k.trim();
            if !valid_name(k) {
                return Err(ScenarioError::Syntax { line, message: format!("invalid key `{k}`") });
            }
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(ScenarioError::Duplicate { line, key, first: prev.line });
            }
            entries.push(Entry { key, value: v.trim().to_string(), line, used: Cell::new(false) });
        }
        Ok(Self { entries, units: UnitSystem::default() })
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn set_units(&mut self, units: UnitSystem) {
        self.units = units;
    }

    fn entry(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    /// Names `x` of all sections `[prefix.x]`, in file order.
    pub fn subsections(&self, prefix: &str) -> Vec<String> {
        let p = format!("{prefix}.");
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if let Some(rest) = e.key.strip_prefix(&p) {
                if let Some((name, _)) = rest.split_once('.') {
                    if !out.iter().any(|n| n == name) {
                        out.push(name.to_string());
                    }
                }
            }
        }
        out
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.line)
    }

    fn value_error(&self, e: &Entry, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Value { line: e.line, key: e.key.clone(), message: message.into() }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.clone())
    }

    pub fn req_string(&self, key: &str) -> Result<String, ScenarioError> {
        self.string(key).ok_or_else(|| ScenarioError::Missing { key: key.into() })
    }

    fn parse_quantity(&self, e: &Entry, item: &str, dim: Dimension) -> Result<f64, ScenarioError> {
        let unit_err = || ScenarioError::Unit {
            line: e.line,
            key: e.key.clone(),
            expected: dim,
            example: format!("{} {}", item.split_whitespace().next().unwrap_or("1"), dim.example_unit()),
            value: item.to_string(),
        };
        let q = Quantity::from_str(item).map_err(|_| unit_err())?;
        if !dim.accepts(q.dim) {
            return Err(unit_err());
        }
        let v = self.units.to_internal(q);
        if !v.is_finite() {
            return Err(self.value_error(e, "value is not finite"));
        }
        Ok(v)
    }

    /// A dimensioned value converted to internal units.
    pub fn quantity(&self, key: &str, dim: Dimension) -> Result<Option<f64>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => self.parse_quantity(e, &e.value, dim).map(Some),
        }
    }

    pub fn req_quantity(&self, key: &str, dim: Dimension) -> Result<f64, ScenarioError> {
        self.quantity(key, dim)?.ok_or_else(|| ScenarioError::Missing { key: key.into() })
    }

    pub fn quantities(&self, key: &str, dim: Dimension) -> Result<Option<Vec<f64>>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e.value.split(',').map(|s| self.parse_quantity(e, s.trim(), dim)).collect::<Result<Vec<_>, _>>().map(Some),
        }
    }

    pub fn req_quantities(&self, key: &str, dim: Dimension) -> Result<Vec<f64>, ScenarioError> {
        self.quantities(key, dim)?.ok_or_else(|| ScenarioError::Missing { key: key.into() })
    }

    fn parse_number(&self, e: &Entry, item: &str) -> Result<f64, ScenarioError> {
        item.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.value_error(e, format!("expected a plain number, got `{item}`")))
    }

    /// A dimensionless number (no unit suffix allowed).
    pub fn number(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => self.parse_number(e, &e.value).map(Some),
        }
    }

    pub fn req_number(&self, key: &str) -> Result<f64, ScenarioError> {
        self.number(key)?.ok_or_else(|| ScenarioError::Missing { key: key.into() })
    }

    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e.value.split(',').map(|s| self.parse_number(e, s.trim())).collect::<Result<Vec<_>, _>>().map(Some),
        }
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<u64>().map(Some).map_err(|_| self.value_error(e, format!("expected a non-negative integer, got `{}`", e.value))),
        }
    }

    pub fn boolean(&self, key: &str) -> Result<Option<bool>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" | "on" | "yes" => Ok(Some(true)),
                "false" | "off" | "no" => Ok(Some(false)),
                v => Err(self.value_error(e, format!("expected true or false, got `{v}`"))),
            },
        }
    }

    /// One of `choices`.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Result<Option<String>, ScenarioError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) if choices.contains(&e.value.as_str()) => Ok(Some(e.value.clone())),
            Some(e) => Err(self.value_error(e, format!("expected one of {}, got `{}`", choices.join(", "), e.value))),
        }
    }

    /// Error for a key whose value was read but failed a range check.
    pub fn reject(&self, key: &str, message: impl Into<String>) -> ScenarioError {
        match self.entries.iter().find(|e| e.key == key) {
            Some(e) => self.value_error(e, message),
            None => ScenarioError::Invalid(format!("`{key}`: {}", message.into())),
        }
    }

    /// Fails on the first key that no reader asked for.
    pub fn finish(&self) -> Result<(), ScenarioError> {
        match self.entries.iter().find(|e| !e.used.get()) {
            Some(e) => Err(ScenarioError::UnknownKey { line: e.line, key: e.key.clone() }),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_prefix_keys() {
        let d = Document::parse("a = 1\n[barrier]\nheight = 300 nK # comment\n\n[b.c]\nx=2").unwrap();
        assert_eq!(d.req_number("a").unwrap(), 1.0);
        let h = d.req_quantity("barrier.height", Dimension::Energy).unwrap();
        assert!((h - 53.75).abs() < 0.01);
        assert_eq!(d.req_number("b.c.x").unwrap(), 2.0);
        d.finish().unwrap();
    }

    #[test]
    fn bare_number_for_length_names_key_and_unit() {
        let d = Document::parse("[barrier]\nwidth = 20").unwrap();
        let err = d.req_quantity("barrier.width", Dimension::Length).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("barrier.width") && msg.contains("µm"), "{msg}");
    }

    #[test]
    fn unread_keys_are_reported() {
        let d = Document::parse("[grid]\npoints = 1024\npionts = 2048").unwrap();
        d.integer("grid.points").unwrap();
        assert_eq!(d.finish().unwrap_err(), ScenarioError::UnknownKey { line: 3, key: "grid.pionts".into() });
    }

    #[test]
    fn duplicates_and_garbage_are_syntax_errors() {
        assert!(matches!(Document::parse("a = 1\na = 2"), Err(ScenarioError::Duplicate { line: 2, .. })));
        assert!(matches!(Document::parse("just words"), Err(ScenarioError::Syntax { line: 1, .. })));
        assert!(matches!(Document::parse("[oops"), Err(ScenarioError::Syntax { line: 1, .. })));
    }

    #[test]
    fn subsections_in_file_order() {
        let d = Document::parse("[potential.trap]\nshape = vee\n[potential.beam]\nshape = gaussian\n").unwrap();
        assert_eq!(d.subsections("potential"), vec!["trap".to_string(), "beam".to_string()]);
    }
}
