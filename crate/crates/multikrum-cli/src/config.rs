//! Optional key=value configuration file. Keys are the long flag names;
//! precedence is explicit flag > config file > built-in default, resolved
//! per setting so a config file can fill in any subset.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
    origin: String,
}

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile::default()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::formats::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Lines are `key = value`; blank lines and `#` comments are skipped.
    /// Duplicate keys are rejected so silent overrides cannot hide typos.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "{origin}: line {}: expected key=value, got {line:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(CliError::usage(format!(
                    "{origin}: line {}: empty key",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(CliError::usage(format!(
                    "{origin}: line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile { entries, origin: origin.to_string() })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::usage(format!(
                    "{}: key {key:?}: cannot parse {raw:?}: {e}",
                    self.origin
                ))
            }),
        }
    }

    /// Flag > config > default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get_parsed(key)?.unwrap_or(default)),
        }
    }

    /// Flag > config; error when neither supplies a value.
    pub fn resolve_required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => self.get_parsed(key)?.ok_or_else(|| {
                CliError::usage(format!("missing --{key} (pass the flag or set {key}= in the config file)"))
            }),
        }
    }

    /// Flag > config; None when neither is present.
    pub fn resolve_optional<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get_parsed(key),
        }
    }

    /// Boolean switches: the flag can only turn the setting on; the config
    /// file accepts true/false.
    pub fn resolve_switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.get_parsed::<bool>(key)?.unwrap_or(false))
    }

    /// Comma-separated list: flag > config > default.
    pub fn resolve_list<T: FromStr>(
        &self,
        flag: Option<Vec<T>>,
        key: &str,
        default: Vec<T>,
    ) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim().parse::<T>().map_err(|e| {
                        CliError::usage(format!(
                            "{}: key {key:?}: cannot parse list item {item:?}: {e}",
                            self.origin
                        ))
                    })
                })
                .collect(),
        }
    }
}
