//! `--config` files: a flat TOML table whose keys are flag names (`_` and `-`
//! both accepted). Entries are spliced into argv right after the
//! subcommand, so any flag given on the command line wins.

use std::ffi::OsString;
use std::fs;

use anyhow::{Context, Result};

use crate::ConfigError;

/// Path given by `--config <p>` or `--config=<p>`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn flag_values(key: &str, value: &toml::Value) -> Result<Vec<String>, ConfigError> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &toml::Value| -> Result<String, ConfigError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(x) => Ok(x.to_string()),
            _ => Err(ConfigError(format!(
                "config key '{key}' must be a string, number or boolean"
            ))),
        }
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
            vec![flag, parts.join(",")]
        }
        v => vec![flag, scalar(v)?],
    })
}

/// argv with the config file's entries inserted after the subcommand.
pub fn merge_config(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError(format!("config {}: {e}", path.to_string_lossy()))
    })?;

    let mut synthesized = Vec::new();
    for (key, value) in &table {
        if key == "config" {
            return Err(ConfigError("config files cannot nest --config".into()).into());
        }
        synthesized.extend(flag_values(key, value)?.into_iter().map(OsString::from));
    }

    let pos = args
        .iter()
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()))
        .ok_or_else(|| ConfigError("--config needs a subcommand".into()))?;
    let mut out = args[..=pos].to_vec();
    out.extend(synthesized);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
