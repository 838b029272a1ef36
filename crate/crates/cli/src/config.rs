//! Flat `key = value` config files, merged into the command line so that
//! explicit flags win over the file and the file wins over defaults.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

/// Options that take a value and may precede the subcommand.
const GLOBAL_VALUE_OPTIONS: &[&str] = &["--jobs", "--seed", "--config"];

pub fn parse(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", origin.display(), i + 1);
        };
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            bail!("{}:{}: empty key", origin.display(), i + 1);
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Position of the subcommand name in `args` (index 0 is the program).
fn subcommand_index(args: &[OsString], cmd: &Command) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if GLOBAL_VALUE_OPTIONS.contains(&a.as_ref()) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return cmd.find_subcommand(a.as_ref()).map(|_| i);
        }
        i += 1;
    }
    None
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
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

/// Returns `args` with the config file's entries inserted right after the
/// subcommand name, ahead of the user's own options.
pub fn merge(args: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
    let entries = parse(&text, path)?;
    let Some(at) = subcommand_index(&args, cmd) else {
        return Ok(args);
    };
    let sub = cmd
        .find_subcommand(args[at].to_string_lossy().as_ref())
        .expect("subcommand was found above");

    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" || key == "dump-config" {
            bail!("{}: `{key}` cannot be set from a config file", path.display());
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            let known_elsewhere = cmd
                .get_subcommands()
                .flat_map(|s| s.get_arguments())
                .any(|a| a.get_long() == Some(key.as_str()));
            if known_elsewhere {
                continue;
            }
            bail!("{}: unknown option `{key}`", path.display());
        };
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => bail!("{}: `{key}` takes true or false, not `{value}`", path.display()),
            },
            _ => injected.push(format!("--{key}={value}").into()),
        }
    }
    let mut out = args[..=at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

/// The effective settings of the chosen subcommand as `key = value` lines,
/// in the format [`parse`] reads.
pub fn dump(cmd: &Command, matches: &clap::ArgMatches) -> String {
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let sub_cmd = cmd.find_subcommand(name).expect("parsed subcommand exists");
    let mut out = format!("# {name}\n");
    let args = cmd
        .get_arguments()
        .map(|a| (a, matches))
        .chain(sub_cmd.get_arguments().filter(|a| !a.is_global_set()).map(|a| (a, sub)));
    for (arg, m) in args {
        let id = arg.get_id().as_str();
        let Some(long) = arg.get_long() else { continue };
        if matches!(long, "config" | "dump-config" | "help" | "version") {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            let on = m.try_get_one::<bool>(id).ok().flatten().copied().unwrap_or(false);
            out.push_str(&format!("{long} = {on}\n"));
            continue;
        }
        if let Some(values) = m.get_raw(id) {
            let v: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
            out.push_str(&format!("{long} = {}\n", v.join(" ")));
        }
    }
    out
}
