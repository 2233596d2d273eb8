//! Flat `key = value` config files.
//!
//! Blank lines and `#` comments are ignored. Keys are the long flag names of
//! the subcommand (underscores may stand for hyphens); `command` and
//! `version` are reserved and checked by the caller. Unknown keys are
//! rejected when the expanded arguments reach the flag parser.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub pairs: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                return Err(format!("config line {}: bad key '{}'", n + 1, k.trim()));
            }
            if key == "config" {
                return Err(format!("config line {}: nested config files are not supported", n + 1));
            }
            if !seen.insert(key.clone()) {
                return Err(format!("config line {}: duplicate key '{key}'", n + 1));
            }
            pairs.push((key, v.trim().to_string()));
        }
        Ok(Config { pairs })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Remove and return a key.
    pub fn take(&mut self, key: &str) -> Option<String> {
        let i = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(i).1)
    }

    /// The pairs as `--key value` arguments.
    pub fn to_args(&self) -> Vec<String> {
        self.pairs.iter().flat_map(|(k, v)| [format!("--{k}"), v.clone()]).collect()
    }

    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
