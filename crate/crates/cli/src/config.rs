//! `--config <path>`: a TOML file of default flag values.
//!
//! Top-level keys apply to any subcommand that accepts a flag of that name
//! and are skipped otherwise. Keys in a `[<subcommand>]` table apply only to
//! that subcommand and must name one of its flags. Flags given on the
//! command line always win.

use std::ffi::OsString;

use clap::Command;
use toml::{Table, Value};

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Unsupported { key: String, reason: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "malformed config: {m}"),
            ConfigError::Unsupported { key, reason } => write!(f, "config key `{key}`: {reason}"),
        }
    }
}

/// Finds `--config <path>` or `--config=<path>` in `args`.
pub fn config_path(args: &[OsString]) -> Option<String> {
    let mut iter = args.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next();
        }
        if let Some(rest) = arg.strip_prefix("--config=") {
            return Some(rest.to_string());
        }
    }
    None
}

fn subcommand_name(args: &[OsString], command: &Command) -> Option<String> {
    args.iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .find(|a| command.find_subcommand(a).is_some())
}

fn present(args: &[OsString], flag: &str) -> bool {
    let long = format!("--{flag}");
    let with_value = format!("--{flag}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == long || a.starts_with(&with_value)
    })
}

fn push_value(out: &mut Vec<OsString>, key: &str, value: &Value) -> Result<(), ConfigError> {
    let flag = format!("--{key}");
    match value {
        Value::Boolean(true) => out.push(flag.into()),
        Value::Boolean(false) => {}
        Value::String(s) => {
            out.push(flag.into());
            out.push(s.into());
        }
        Value::Integer(i) => {
            out.push(flag.into());
            out.push(i.to_string().into());
        }
        Value::Float(x) => {
            out.push(flag.into());
            out.push(x.to_string().into());
        }
        _ => {
            return Err(ConfigError::Unsupported {
                key: key.to_string(),
                reason: "value must be a string, number or boolean".into(),
            })
        }
    }
    Ok(())
}

/// Appends flags from the config file that the user did not pass.
pub fn merge(args: Vec<OsString>, text: &str, command: &Command) -> Result<Vec<OsString>, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let Some(name) = subcommand_name(&args, command) else {
        return Ok(args);
    };
    let sub = command.find_subcommand(&name).expect("found above");
    let accepts = |key: &str| {
        sub.get_arguments()
            .any(|a| a.get_long() == Some(key) && a.get_id() != "config")
    };

    let mut extra = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    if let Some(section) = table.get(&name) {
        let Value::Table(section) = section else {
            return Err(ConfigError::Unsupported {
                key: name,
                reason: "subcommand section must be a table".into(),
            });
        };
        for (key, value) in section {
            if !accepts(key) {
                return Err(ConfigError::Unsupported {
                    key: format!("{name}.{key}"),
                    reason: format!("`{name}` has no --{key} flag"),
                });
            }
            seen.insert(key.clone());
            if !present(&args, key) {
                push_value(&mut extra, key, value)?;
            }
        }
    }
    for (key, value) in &table {
        if matches!(value, Value::Table(_)) || seen.contains(key) || !accepts(key) {
            continue;
        }
        if !present(&args, key) {
            push_value(&mut extra, key, value)?;
        }
    }
    let mut args = args;
    args.extend(extra);
    Ok(args)
}
