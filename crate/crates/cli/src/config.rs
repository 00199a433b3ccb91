//! Flat `key = value` config files whose keys mirror long flag names.
//!
//! ```text
//! # adversary defaults
//! matrix = cesaro
//! mode = blocks
//! n = 65536
//! ```
//!
//! Flags given on the command line win over the file. `true` turns a switch on and `false`
//! leaves it off.

use std::collections::BTreeMap;

use clap::{ArgAction, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", i + 1)));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError(format!(
                "line {}: duplicate key '{key}'",
                i + 1
            )));
        }
    }
    Ok(out)
}

/// Path given by `--config <path>` or `--config=<path>`.
pub fn config_path(args: &[String]) -> Option<String> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    })
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefix))
}

/// Inserts file values for flags of the chosen subcommand that the command line leaves unset.
/// Keys known only to other subcommands are skipped; keys known to none are an error.
pub fn merge(
    cmd: &Command,
    args: &[String],
    config: &BTreeMap<String, String>,
) -> Result<Vec<String>, ConfigError> {
    let Some(pos) = args
        .iter()
        .position(|a| cmd.get_subcommands().any(|s| s.get_name() == a))
    else {
        return Ok(args.to_vec());
    };
    let sub = cmd
        .find_subcommand(&args[pos])
        .expect("position matched a subcommand");
    let mut injected = Vec::new();
    for (key, value) in config {
        let global = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()));
        let local = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = local.or(global) else {
            let elsewhere = cmd.get_subcommands().any(|s| {
                s.get_arguments()
                    .any(|a| a.get_long() == Some(key.as_str()))
            });
            if elsewhere {
                continue;
            }
            return Err(ConfigError(format!("unknown config key '{key}'")));
        };
        if key == "config" || given(args, key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => injected.push(format!("--{key}")),
                "false" => {}
                other => {
                    return Err(ConfigError(format!(
                        "'{key}' expects true or false, got '{other}'"
                    )))
                }
            },
            _ => {
                injected.push(format!("--{key}"));
                injected.push(value.clone());
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let c = parse("# x\n\nmatrix = cesaro\n n=10 \n").unwrap();
        assert_eq!(c.get("matrix").map(String::as_str), Some("cesaro"));
        assert_eq!(c.get("n").map(String::as_str), Some("10"));
        assert!(parse("novalue\n").is_err());
        assert!(parse("a=1\na=2\n").is_err());
    }

    #[test]
    fn finds_config_path() {
        let args: Vec<String> = ["tauber", "density", "--config=a.cfg"]
            .map(String::from)
            .to_vec();
        assert_eq!(config_path(&args).as_deref(), Some("a.cfg"));
        let args: Vec<String> = ["tauber", "--config", "b.cfg"].map(String::from).to_vec();
        assert_eq!(config_path(&args).as_deref(), Some("b.cfg"));
    }
}
