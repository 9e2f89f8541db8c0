//! Flat key-value configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! file   := line*
//! line   := ws* (comment | entry)? ws* '\n'
//! comment:= '#' any*
//! entry  := key ws* '=' ws* value
//! key    := [a-z_][a-z0-9_]*
//! value  := any non-empty text up to an unquoted '#' (trimmed)
//! ```
//!
//! Lists are comma-separated values (`ns = 64, 128, 256`). Duplicate keys
//! are an error. Command-line flags override file entries.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let valid_key = key.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
                && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
            if !valid_key {
                return Err(Error::Parse(format!("line {}: invalid key {key:?}", lineno + 1)));
            }
            if value.is_empty() {
                return Err(Error::Parse(format!("line {}: empty value for {key}", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key}", lineno + 1)));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Parse(format!("{key}: {e}"))))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key).map(|v| parse_list(v).map_err(|e| Error::Parse(format!("{key}: {e}")))).transpose()
    }
}

pub fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|item| item.trim().parse::<T>().map_err(|e| format!("{item:?}: {e}")))
        .collect()
}
