//! TOML case files.
//!
//! A file names a `case_id` and overrides any subset of that case's defaults; every
//! other key is filled in from [`CaseConfig::defaults_for`].

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::simulator::{CaseConfig, CaseId};

/// Reads, completes and validates a case file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<CaseConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn parse_config_str(text: &str) -> Result<CaseConfig> {
    let user: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(syntax_message(text, &e)))?;
    let id_value = user.get("case_id").ok_or_else(|| Error::Config("missing required key `case_id`".into()))?;
    let case_id: CaseId = id_value
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(with_line(text, "case_id", e.message())))?;
    let defaults = Value::try_from(CaseConfig::defaults_for(case_id))
        .map_err(|e| Error::Config(format!("cannot encode defaults: {e}")))?;
    let Value::Table(mut merged) = defaults else { unreachable!("a config encodes as a table") };
    // The custom case's default initial data gives way to whichever form the file uses.
    if user.get("initial").and_then(Value::as_table).is_some_and(|t| t.contains_key("moments") || t.contains_key("lambdas")) {
        merged.remove("initial");
    }
    merge(&mut merged, user);
    let cfg: CaseConfig = Value::Table(merged).try_into().map_err(|e: toml::de::Error| {
        let msg = e.message().to_string();
        let key = backticked(&msg).unwrap_or_default();
        Error::Config(with_line(text, &key, &msg))
    })?;
    cfg.validate().map_err(|e| match e {
        Error::Config(msg) => {
            let key = msg.split(|c: char| !(c.is_alphanumeric() || c == '_')).find(|w| line_of(text, w).is_some());
            Error::Config(with_line(text, key.unwrap_or_default(), &msg))
        }
        e => e,
    })?;
    Ok(cfg)
}

/// Fully expanded TOML text of a configuration.
pub fn config_to_string(cfg: &CaseConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| Error::Config(format!("cannot encode configuration: {e}")))
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

/// 1-based line where `key` is assigned or opens a section.
fn line_of(text: &str, key: &str) -> Option<usize> {
    if key.is_empty() {
        return None;
    }
    text.lines().position(|l| {
        let l = l.trim_start();
        let section = l.strip_prefix('[').map(|r| r.trim_end_matches(']').rsplit('.').next() == Some(key));
        section.unwrap_or(false)
            || l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn with_line(text: &str, key: &str, msg: &str) -> String {
    match line_of(text, key) {
        Some(n) => format!("line {n}: {msg}"),
        None => msg.to_string(),
    }
}

fn syntax_message(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {}", e.message())
        }
        None => e.message().to_string(),
    }
}
