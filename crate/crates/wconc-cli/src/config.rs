//! Flat `key=value` config files.
//!
//! One pair per line, `#` starts a comment line, blank lines are ignored,
//! later keys override earlier ones. Every key can also be set by the
//! matching command-line flag, which wins over the file.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("key `{key}`: cannot parse `{value}` as {wanted}")]
    BadValue { key: String, value: String, wanted: &'static str },
}

/// Parsed configuration: string values keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, "a number", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parse_with(key, "an unsigned integer", |v| v.parse::<u64>().ok())
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>, ConfigError> {
        self.parse_with(key, "an unsigned integer", |v| v.parse::<u32>().ok())
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.parse_with(key, "true or false", |v| match v {
            "true" | "1" | "yes" => Some(true),
            "false" | "0" | "no" => Some(false),
            _ => None,
        })
    }

    fn parse_with<T>(
        &self,
        key: &str,
        wanted: &'static str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                value: v.clone(),
                wanted,
            }),
        }
    }
}

/// Parse config text. Never panics; any line that is neither blank, a
/// comment, nor `key=value` is an error with its line number.
pub fn parse_config(text: &str) -> Result<ConfigMap, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed { line: i + 1, text: line.to_string() });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line: i + 1 });
        }
        entries.insert(key.to_string(), value.trim().to_string());
    }
    Ok(ConfigMap { entries })
}
