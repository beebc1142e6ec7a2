//! Flat `key = value` parameters: table defaults, then the config file, then
//! command-line overrides. Keys outside the subcommand's table are rejected.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn p(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { key, default, help }
}

/// Resolved parameter values for one subcommand run.
#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
}

/// `key = value` per line; `#` starts a comment; blank lines ignored.
pub fn parse_config_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value, got {raw:?}", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// `--key value` or `--key=value` pairs; dashes in keys map to underscores.
pub fn parse_overrides(args: &[String]) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let body = a
            .strip_prefix("--")
            .ok_or_else(|| CliError::Config(format!("expected --key value, got {a:?}")))?;
        let (k, v) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("--{body} needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        out.push((k.replace('-', "_"), v));
    }
    Ok(out)
}

impl Params {
    /// Later layers win. Reserved keys (`seed`) are accepted in files and handled by the caller.
    pub fn resolve(table: &[ParamSpec], layers: &[Vec<(String, String)>]) -> CliResult<Self> {
        let mut values: BTreeMap<String, String> =
            table.iter().map(|s| (s.key.to_string(), s.default.to_string())).collect();
        for layer in layers {
            for (k, v) in layer {
                if !values.contains_key(k) {
                    let known: Vec<&str> = table.iter().map(|s| s.key).collect();
                    return Err(CliError::Config(format!("unknown key {k:?}; known keys: {}", known.join(", "))));
                }
                values.insert(k.clone(), v.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key {key} not in table"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse::<T>()
            .map_err(|e| CliError::Config(format!("{key} = {raw:?}: {e}")))
    }

    pub fn get_bool(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Config(format!("{key} = {other:?}: expected true or false"))),
        }
    }

    /// Comma-separated list; empty string gives an empty list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key).trim();
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|e| CliError::Config(format!("{key} entry {v:?}: {e}")))
            })
            .collect()
    }

    /// `None` when the value is empty.
    pub fn get_opt<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key).trim().is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn get_positive(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.get(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{key} = {v}: must be a positive finite number")));
        }
        Ok(v)
    }

    pub fn get_nonzero(&self, key: &str) -> CliResult<usize> {
        let v: usize = self.get(key)?;
        if v == 0 {
            return Err(CliError::Config(format!("{key} must be ≥ 1")));
        }
        Ok(v)
    }
}

/// Help block listing every key, its default and meaning.
pub fn describe(table: &[ParamSpec]) -> String {
    let width = table.iter().map(|s| s.key.len()).max().unwrap_or(0);
    let mut out = String::from("Parameters (config file `key = value`, or `--key value` after the subcommand):\n");
    for s in table {
        let default = if s.default.is_empty() { "<unset>" } else { s.default };
        out.push_str(&format!("  {:width$}  {} [default: {}]\n", s.key, s.help, default));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &[ParamSpec] = &[p("runs", "100", "runs"), p("radius", "0.5", "radius"), p("tag", "", "tag")];

    #[test]
    fn layers_and_overrides() {
        let file = parse_config_text("# comment\nruns = 7\n\nradius=0.25 # trailing\n").unwrap();
        let cli = parse_overrides(&["--runs".into(), "3".into()]).unwrap();
        let p = Params::resolve(TABLE, &[file, cli]).unwrap();
        assert_eq!(p.get::<usize>("runs").unwrap(), 3);
        assert_eq!(p.get::<f64>("radius").unwrap(), 0.25);
        assert_eq!(p.get_opt::<f64>("tag").unwrap(), None);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_config_errors() {
        let bad = parse_config_text("nope = 1").unwrap();
        assert!(matches!(Params::resolve(TABLE, &[bad]), Err(CliError::Config(_))));
        assert!(parse_config_text("just words").is_err());
        assert!(parse_overrides(&["runs".into()]).is_err());
        assert!(parse_overrides(&["--runs".into()]).is_err());
        let p = Params::resolve(TABLE, &[parse_overrides(&["--runs=x".into()]).unwrap()]).unwrap();
        assert!(p.get::<usize>("runs").is_err());
    }

    #[test]
    fn dashed_flags_map_to_keys() {
        let o = parse_overrides(&["--bump-count=4".into()]).unwrap();
        assert_eq!(o, vec![("bump_count".to_string(), "4".to_string())]);
    }
}
