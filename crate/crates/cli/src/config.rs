use std::path::Path;

use clap::{ArgMatches, Command};

/// `key = value` pairs from a config file; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!(
                "{}:{}: expected `key = value`",
                path.display(),
                i + 1
            ));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(format!("{}:{}: empty key", path.display(), i + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given_on_command_line(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter()
        .any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Splice the entries of `--config` into `args` right after the subcommand, skipping keys that
/// the command line sets itself.
pub fn inject_config(cmd: &Command, args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let Some(sub) = cmd.find_subcommand(&args[pos]) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (k, v) in read_config(Path::new(&path))? {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(k.as_str()))
            .ok_or_else(|| format!("unknown config key '{k}' for '{}'", sub.get_name()))?;
        if k == "config" || given_on_command_line(&args, &k) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{k}={v}"));
        } else {
            match v.as_str() {
                "true" => extra.push(format!("--{k}")),
                "false" => {}
                _ => return Err(format!("config key '{k}' takes true or false, got '{v}'")),
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Every argument of the subcommand with its effective value, in declaration order.
pub fn effective(sub: &Command, m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for arg in sub.get_arguments() {
        let id = arg.get_id().as_str();
        if id == "help" || id == "version" {
            continue;
        }
        let Ok(Some(vals)) = m.try_get_raw(id) else {
            continue;
        };
        let vals: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
        out.push((arg.get_long().unwrap_or(id).to_string(), vals.join(",")));
    }
    out
}
