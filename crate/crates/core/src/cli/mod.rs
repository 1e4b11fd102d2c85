//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` (`key=value` lines named like
//! the long flags), `--seed`, `--jobs` and `--out`. Flags given on the
//! command line override the file. Each run writes its resolved settings to
//! `config.txt` in the output directory; passing that file back through
//! `--config` repeats the run.

mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;

pub use args::Cli;

/// Bad invocation; reported with exit code 2.
#[derive(Debug)]
pub(crate) struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Turns the `key=value` lines of a config file into long flags, placed
/// right after the subcommand path. Keys also given explicitly are dropped
/// so the command line wins.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, UsageError> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().ok_or_else(|| UsageError("--config needs a file".into()))?);
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| UsageError(format!("{path}: {e}")))?;
    let pairs = crate::genmodels::parse_key_values(&text).map_err(|e| UsageError(format!("{path}: {e}")))?;
    let explicit: std::collections::BTreeSet<&str> = rest
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    let mut injected = Vec::new();
    for (key, value) in pairs {
        let key = key.replace('_', "-");
        if explicit.contains(key.as_str()) {
            continue;
        }
        let flag = format!("--{key}");
        match value.as_str() {
            "true" => injected.push(flag),
            "false" => {}
            _ => {
                injected.push(flag);
                injected.push(value);
            }
        }
    }
    let path_len = 1 + rest.iter().skip(1).take_while(|a| !a.starts_with('-')).count();
    let mut out: Vec<String> = rest[..path_len].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[path_len..]);
    Ok(out)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 on success, 2 for usage errors, 1 for runtime failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cli.jobs() > 0 {
        pool = pool.num_threads(cli.jobs());
    }
    let result = pool
        .build()
        .map_err(anyhow::Error::from)
        .and_then(|pool| pool.install(|| commands::dispatch(&cli)));
    match result {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Writes `value`'s fields as sorted `key=value` lines.
pub(crate) fn write_resolved_config<T: serde::Serialize>(out: &Path, command: &str, value: &T) -> anyhow::Result<()> {
    let json = serde_json::to_value(value)?;
    let mut text = format!("# threadlab {command}\n");
    if let serde_json::Value::Object(map) = json {
        let sorted: std::collections::BTreeMap<_, _> = map.into_iter().collect();
        for (k, v) in sorted {
            let v = match v {
                serde_json::Value::Null => continue,
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            text.push_str(&format!("{k}={v}\n"));
        }
    }
    std::fs::write(out.join("config.txt"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn config_values_precede_explicit_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.txt");
        std::fs::write(&cfg, "k=40\nalpha=4\nexact=true\nbinned=false\n").unwrap();
        let args = strings(&["tl", "simulate", "--alpha", "2", "--config", cfg.to_str().unwrap()]);
        assert_eq!(
            expand_config(args).unwrap(),
            strings(&["tl", "simulate", "--exact", "--k", "40", "--alpha", "2"])
        );
    }

    #[test]
    fn missing_config_is_usage_error() {
        assert!(expand_config(strings(&["tl", "train", "--config", "/nonexistent/x"])).is_err());
        assert!(expand_config(strings(&["tl", "train", "--config"])).is_err());
    }
}
