//! Flag/config-file merging. A config file is a JSON object using the flag
//! names as keys; flags given on the command line win.

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use std::path::Path;

/// Keys shared by every subcommand.
pub const GLOBAL_KEYS: [&str; 5] = ["seed", "threads", "output", "format", "corrupt_kernel"];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

pub fn load_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(config_error(format!("{}: top level must be a JSON object", path.display()))),
        Err(e) => Err(config_error(format!("{}: {e}", path.display()))),
    }
}

/// Fill every field missing from `flags` with the file's value.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>, globals: bool) -> Result<T> {
    let mut value = match serde_json::to_value(flags)? {
        Value::Object(m) => m,
        _ => bail!("flag set is not an object"),
    };
    for (k, v) in file {
        if GLOBAL_KEYS.contains(&k.as_str()) != globals {
            continue;
        }
        value.entry(k.clone()).or_insert_with(|| v.clone());
    }
    serde_json::from_value(Value::Object(value)).map_err(|e| config_error(e.to_string()))
}

/// A scalar or an array of scalars, read as a list.
pub fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Option::<Either<T>>::deserialize(de)?.map(|e| match e {
        Either::One(x) => vec![x],
        Either::Many(v) => v,
    }))
}

/// Required field, with a field-level message.
pub fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| config_error(format!("missing required field '{name}'")))
}
