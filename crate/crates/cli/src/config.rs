//! Flat `key = value` configuration files and flag/file resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Every key a config file may set. Each one mirrors a long flag.
pub const KNOWN_KEYS: &[&str] = &[
    "map",
    "point",
    "direct",
    "output",
    "viewport",
    "width",
    "height",
    "y0",
    "delta",
    "n-max",
    "max-steps",
    "escape-radius",
    "bounded-radius",
    "high-threshold",
    "low-threshold",
    "min-oscillations",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl ConfigFile {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// ignored, keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            let key = normalize_key(key);
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Resolves settings flag-first, then file, then default, remembering the
/// effective value of each key for `--print-config`.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    effective: Vec<(&'static str, String)>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Resolver { file, effective: Vec::new() }
    }

    fn file_value<T>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.file.raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: invalid value `{raw}`: {e}"))),
        }
    }

    pub fn value<T>(&mut self, key: &'static str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.effective.push((key, v.to_string()));
        Ok(v)
    }

    /// A value with no default; a usage error when neither source sets it.
    pub fn required<T>(&mut self, key: &'static str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => {
                self.file_value(key)?.ok_or_else(|| CliError::Usage(format!("missing --{key} (flag or config key)")))?
            }
        };
        self.effective.push((key, v.to_string()));
        Ok(v)
    }

    /// A presence flag: set by the flag, or by `key = true` in the file.
    pub fn switch(&mut self, key: &'static str, flag: bool) -> Result<bool, CliError> {
        let v = flag || self.file_value::<bool>(key)?.unwrap_or(false);
        self.effective.push((key, v.to_string()));
        Ok(v)
    }

    pub fn render(&self) -> String {
        self.effective.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
