//! Flat `key = value` run-configuration files.
//!
//! Lines are `key = value` pairs; `#` starts a comment and blank lines are
//! ignored. Keys mirror the long command-line flag names, and flags given
//! on the command line override file values. A key that appears twice keeps
//! its last value.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub fn load_key_values(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_key_values(&text)
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Data {
            line: i + 1,
            message: format!("expected `key = value`, got {raw:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::data(i + 1, "empty key"));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}
