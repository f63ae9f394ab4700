//! `key = value` configuration files. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Blank lines and `#` comments are ignored; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
            let key = k.trim().replace('-', "_");
            let value = v.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!("config line {}: duplicate key {key}", n + 1)));
            }
        }
        Ok(Settings { values })
    }

    /// Flag value if given, else the config entry, else `default`.
    pub fn pick<T: FromStr>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = self.values.remove(key);
        if let Some(v) = flag {
            return Ok(v);
        }
        match from_file {
            Some(s) => s
                .parse()
                .map_err(|e| CliError::Config(format!("config key {key}: {e}"))),
            None => Ok(default),
        }
    }

    /// Like [`Settings::pick`] without a default.
    pub fn pick_opt<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = self.values.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|s| s.parse().map_err(|e| CliError::Config(format!("config key {key}: {e}"))))
            .transpose()
    }

    /// Errors on keys no option consumed.
    pub fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(CliError::Config(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("# site defaults\nscale = 32\nupdate-shift=3\n\nfilter_len_us = 150 # inline\n").unwrap();
        assert_eq!(s.pick(Some(8u32), "scale", 16).unwrap(), 8);
        assert_eq!(s.pick(None, "update_shift", 2u32).unwrap(), 3);
        assert_eq!(s.pick(None, "filter_len_us", 200u64).unwrap(), 150);
        assert_eq!(s.pick(None, "global_update_us", 20_000u64).unwrap(), 20_000);
        s.finish().unwrap();
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Settings::parse("scale 16").is_err());
        assert!(Settings::parse("a = 1\na = 2").is_err());
        let mut s = Settings::parse("scale = sixteen\nbogus = 1").unwrap();
        assert!(s.pick(None, "scale", 16u32).is_err());
        assert!(s.finish().is_err());
    }
}
