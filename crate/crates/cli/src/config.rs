//! Layered settings: built-in defaults, then the config file, then flags,
//! then environment variables.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const ENV_SEED: &str = "LTLSYN_SEED";
pub const ENV_WORKERS: &str = "LTLSYN_WORKERS";

/// Parsed config file. Each section overrides individual fields of the
/// corresponding defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub gen: Option<toml::Table>,
    pub model: Option<toml::Table>,
    pub train: Option<toml::Table>,
    pub eval: Option<toml::Table>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// `defaults` with the fields present in `section` replaced.
pub fn layer<T: Serialize + DeserializeOwned>(defaults: T, section: Option<&toml::Table>, name: &str) -> Result<T, CliError> {
    let Some(section) = section else {
        return Ok(defaults);
    };
    let mut base = toml::Table::try_from(&defaults).map_err(|e| CliError::Usage(format!("[{name}]: {e}")))?;
    merge(&mut base, section);
    base.try_into().map_err(|e| CliError::Usage(format!("[{name}]: {e}")))
}

fn env_override<T: std::str::FromStr>(var: &str) -> Result<Option<T>, CliError> {
    match std::env::var(var) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{var}: cannot parse `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Effective global settings after all layers.
#[derive(Debug, Clone, Serialize)]
pub struct Globals {
    pub seed: u64,
    pub workers: usize,
}

impl Globals {
    pub fn resolve(file: &ConfigFile, seed_flag: Option<u64>, workers_flag: Option<usize>) -> Result<Self, CliError> {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut seed = file.seed.unwrap_or(0);
        let mut workers = file.workers.unwrap_or(cores);
        if let Some(s) = seed_flag {
            seed = s;
        }
        if let Some(w) = workers_flag {
            workers = w;
        }
        if let Some(s) = env_override(ENV_SEED)? {
            seed = s;
        }
        if let Some(w) = env_override(ENV_WORKERS)? {
            workers = w;
        }
        if workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(Globals { seed, workers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Inner {
        a: u32,
        b: Vec<f64>,
    }

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Outer {
        x: String,
        inner: Inner,
    }

    #[test]
    fn sections_override_single_fields() {
        let d = Outer {
            x: "keep".into(),
            inner: Inner { a: 1, b: vec![0.5] },
        };
        let t: toml::Table = toml::from_str("[inner]\na = 7").unwrap();
        let out = layer(d, Some(&t), "test").unwrap();
        assert_eq!(out.x, "keep");
        assert_eq!(out.inner, Inner { a: 7, b: vec![0.5] });

        let bad: toml::Table = toml::from_str("x = 3").unwrap();
        let d = Outer {
            x: "k".into(),
            inner: Inner { a: 1, b: vec![] },
        };
        assert!(matches!(layer(d, Some(&bad), "test"), Err(CliError::Usage(_))));
    }
}
