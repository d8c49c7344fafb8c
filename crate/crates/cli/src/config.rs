//! Option layering: command-line flag, then the subcommand's table in the
//! config file, then the file's top level, then the built-in default.

use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct Layers {
    section: toml::Table,
    top: toml::Table,
    /// Resolved values, echoed into JSON output.
    pub resolved: Map<String, Value>,
}

impl Layers {
    pub fn load(path: Option<&Path>, subcommand: &str) -> Result<Self, CliError> {
        let Some(path) = path else {
            let mut l = Layers::default();
            l.resolved.insert("command".into(), Value::String(subcommand.into()));
            return Ok(l);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        let mut top: toml::Table =
            text.parse().map_err(|e| CliError::config("config", format!("{} is not valid TOML: {e}", path.display())))?;
        let section = match top.remove(subcommand) {
            Some(toml::Value::Table(t)) => t,
            Some(_) => return Err(CliError::config("config", format!("[{subcommand}] must be a table"))),
            None => toml::Table::new(),
        };
        let mut resolved = Map::new();
        resolved.insert("command".into(), Value::String(subcommand.into()));
        Ok(Layers { section, top, resolved })
    }

    /// The value of `key` as text, from the flag if given, else the file.
    pub fn get(&mut self, key: &'static str, flag: Option<String>) -> Result<Option<String>, CliError> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.section.get(key).or_else(|| self.top.get(key)) {
                None => None,
                Some(toml::Value::String(s)) => Some(s.clone()),
                Some(toml::Value::Integer(i)) => Some(i.to_string()),
                Some(toml::Value::Float(x)) => Some(x.to_string()),
                Some(toml::Value::Boolean(b)) => Some(b.to_string()),
                Some(_) => return Err(CliError::config(key, "config value must be a string or a number")),
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.into(), Value::String(v.clone()));
        }
        Ok(value)
    }

    /// Like [`Layers::get`], falling back to `default`.
    pub fn get_or(&mut self, key: &'static str, flag: Option<String>, default: &str) -> Result<String, CliError> {
        let v = self.get(key, flag)?.unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.into(), Value::String(v.clone()));
        Ok(v)
    }

    /// Parses the resolved value with `FromStr`.
    pub fn parse<T: std::str::FromStr>(&mut self, key: &'static str, flag: Option<String>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key, flag)? {
            None => Ok(None),
            Some(s) => s.trim().parse().map(Some).map_err(|e| CliError::config(key, format!("cannot parse {s:?}: {e}"))),
        }
    }
}
