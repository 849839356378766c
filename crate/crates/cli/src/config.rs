//! Flat `key=value` settings. A key given several times holds a list, which
//! a sweep reads as a grid axis.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{invalid, HarnessResult};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, Vec<String>>,
}

fn split_pair(line: &str) -> Option<(String, String)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.to_string()))
}

impl Settings {
    /// Parse config text. Blank lines and lines starting with `#` are
    /// skipped; everything else must be `key = value`.
    pub fn parse(text: &str) -> HarnessResult<Self> {
        let mut s = Settings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match split_pair(line) {
                Some((k, v)) => s.values.entry(k).or_default().push(v),
                None => {
                    return invalid(format!("line {}: expected key=value, got {raw:?}", no + 1))
                }
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Settings from `key=value` strings given on the command line.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> HarnessResult<Self> {
        let mut s = Settings::default();
        for p in pairs {
            match split_pair(p.as_ref()) {
                Some((k, v)) => s.values.entry(k).or_default().push(v),
                None => return invalid(format!("expected key=value, got {:?}", p.as_ref())),
            }
        }
        Ok(s)
    }

    /// Every key present in `other` replaces the whole list here.
    pub fn override_with(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), vec![value.to_string()]);
    }

    pub fn remove(&mut self, key: &str) -> Option<Vec<String>> {
        self.values.remove(key)
    }

    pub fn get_all(&self, key: &str) -> Option<&[String]> {
        self.values.get(key).map(|v| v.as_slice())
    }

    /// The single value of `key`; an error if it was given more than once.
    pub fn get(&self, key: &str) -> HarnessResult<Option<&str>> {
        match self.values.get(key).map(|v| v.as_slice()) {
            None => Ok(None),
            Some([one]) => Ok(Some(one.as_str())),
            Some(_) => invalid(format!("{key} takes a single value")),
        }
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> HarnessResult<Option<T>> {
        match self.get(key)? {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .or_else(|_| invalid(format!("{key}: cannot parse {v:?}"))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|k| k.as_str())
    }
}
