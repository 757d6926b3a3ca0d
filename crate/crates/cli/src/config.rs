//! Optional `key = value` run configuration; command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

const KEYS: &[&str] = &["tol", "feas-threshold", "max-iters", "seed", "threads", "kind", "format", "grid"];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Blank lines and `#` comments are ignored; keys use the long flag spelling, `_` or `-`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{key}'", n + 1);
            }
            values.insert(key, value.trim().trim_matches('"').to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key '{key}': {e}")))
            .transpose()
    }
}

/// Flag, then config, then default.
pub fn resolve<T>(flag: Option<T>, config: &ConfigFile, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get(key)?.unwrap_or(default)),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        bail!("{name} must be positive, got {v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_aliases() {
        let c = ConfigFile::parse("# run\ntol = 1e-8\nfeas_threshold=2e-7 # loose\n\nkind = \"canonical\"\n").unwrap();
        assert_eq!(c.get::<f64>("tol").unwrap(), Some(1e-8));
        assert_eq!(c.get::<f64>("feas-threshold").unwrap(), Some(2e-7));
        assert_eq!(c.get::<String>("kind").unwrap().as_deref(), Some("canonical"));
        assert_eq!(c.get::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn flags_override_config() {
        let c = ConfigFile::parse("seed = 7").unwrap();
        assert_eq!(resolve(Some(3u64), &c, "seed", 0).unwrap(), 3);
        assert_eq!(resolve(None, &c, "seed", 0u64).unwrap(), 7);
        assert_eq!(resolve(None, &ConfigFile::default(), "seed", 0u64).unwrap(), 0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("tol").is_err());
        let c = ConfigFile::parse("tol = fast").unwrap();
        assert!(c.get::<f64>("tol").is_err());
        assert!(positive("tol", -1.0).is_err());
        assert!(positive("tol", 0.0).is_err());
    }
}
