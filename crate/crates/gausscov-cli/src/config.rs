//! Flat key=value configuration files.
//!
//! A config file supplies defaults for long flags: a flag given on the
//! command line always wins, an absent flag falls back to the config
//! value, and a key absent from both uses the built-in default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub struct Config(BTreeMap<String, String>);

impl Config {
    pub fn empty() -> Self {
        Config(BTreeMap::new())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are
    /// ignored. Keys use the long flag spelling, case-insensitive.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError {
            code: 2,
            message: format!("cannot read config {}: {e}", path.display()),
        })?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError {
                    code: 2,
                    message: format!(
                        "config {} line {}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    ),
                });
            };
            map.insert(
                key.trim().to_ascii_lowercase(),
                value.trim().to_string(),
            );
        }
        Ok(Config(map))
    }

    /// Typed lookup; a present but unparseable value is a usage error.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| CliError {
                code: 2,
                message: format!("config key {key}: cannot parse {raw:?}"),
            }),
        }
    }

    /// Flag value if given, else config value, else the default.
    pub fn resolve<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        Ok(flag.or(self.get(key)?).unwrap_or(default))
    }
}
