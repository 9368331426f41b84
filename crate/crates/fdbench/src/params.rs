//! Loose key/value parameter maps.
//!
//! Extractor and learner specs are constructed from these in two places:
//! benchmark config tables and the CLI's `--params k=v,...` flag.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single loosely-typed parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(i) => Some(*i),
            ParamValue::Real(r) if r.fract() == 0.0 => Some(*r as i64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ParamValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(r) => write!(f, "{r}"),
            ParamValue::Str(s) => write!(f, "{s}"),
        }
    }
}

/// Ordered name -> value map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamMap(pub BTreeMap<String, ParamValue>);

impl ParamMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `k=v,k2=v2` (as used by `fdbench extract --params`).
    /// Values parse as int, then float, then bool, else string.
    pub fn parse_cli(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in s.split(',').filter(|i| !i.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParam(format!("expected k=v, got `{item}`")))?;
            map.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: impl Into<String>, value: ParamValue) {
        self.0.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.get(key)
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::InvalidParam(format!("`{key}` must be numeric, got {v}"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_i64()
                .filter(|i| *i >= 0)
                .map(|i| i as usize)
                .ok_or_else(|| {
                    Error::InvalidParam(format!("`{key}` must be a non-negative integer, got {v}"))
                }),
        }
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.0
            .get(key)
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_else(|| default.to_string())
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::InvalidParam(format!("`{key}` must be a bool, got {v}"))),
        }
    }

    /// Error if the map holds keys outside the allowed set; catches typos in
    /// config files early.
    pub fn reject_unknown(&self, context: &str, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParam(format!(
                    "unknown parameter `{k}` for {context} (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn parse_value(v: &str) -> ParamValue {
    if let Ok(i) = v.parse::<i64>() {
        return ParamValue::Int(i);
    }
    if let Ok(r) = v.parse::<f64>() {
        return ParamValue::Real(r);
    }
    match v {
        "true" => ParamValue::Bool(true),
        "false" => ParamValue::Bool(false),
        _ => ParamValue::Str(v.to_string()),
    }
}

/// Convert a TOML table into a ParamMap (used by the benchmark config).
pub fn from_toml_table(table: &toml::Table) -> Result<ParamMap> {
    let mut map = BTreeMap::new();
    for (k, v) in table {
        let pv = match v {
            toml::Value::Integer(i) => ParamValue::Int(*i),
            toml::Value::Float(f) => ParamValue::Real(*f),
            toml::Value::String(s) => ParamValue::Str(s.clone()),
            toml::Value::Boolean(b) => ParamValue::Bool(*b),
            other => {
                return Err(Error::Config(format!(
                    "parameter `{k}` has unsupported type: {other}"
                )))
            }
        };
        map.insert(k.clone(), pv);
    }
    Ok(ParamMap(map))
}
