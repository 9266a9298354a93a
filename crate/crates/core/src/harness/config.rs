//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the CLI
//! flag names without the leading dashes (`d`, `sigma`, `beta-norm`, ...);
//! underscores are accepted in place of dashes.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::InvalidConfig(format!("line {}: empty key", lineno + 1)));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidConfig(format!("config key `{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let kv = KeyValues::parse("# sweep\nd = 100\nbeta_norm=2.5\n\nthreads = auto\n").unwrap();
        assert_eq!(kv.get::<usize>("d").unwrap(), Some(100));
        assert_eq!(kv.get::<f64>("beta-norm").unwrap(), Some(2.5));
        assert_eq!(kv.raw("threads"), Some("auto"));
        assert_eq!(kv.get::<f64>("sigma").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(KeyValues::parse("d 100").is_err());
        assert!(KeyValues::parse("=3").is_err());
        let kv = KeyValues::parse("d = many").unwrap();
        assert!(kv.get::<usize>("d").is_err());
    }
}
