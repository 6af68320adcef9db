//! Experiment plumbing behind the `spi` command line: file formats, sweeps,
//! mode comparison, plots, config files and run manifests.

pub mod compare;
pub mod csvio;
pub mod plot;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys accepted in a config file. Each mirrors a command-line flag.
pub const CONFIG_KEYS: &[&str] = &[
    "seed",
    "n_pdls",
    "cap",
    "margin",
    "agents",
    "sims",
    "bins",
    "speed_factor",
    "episodes",
    "max_steps",
    "mode",
    "scenario",
    "alpha",
    "gamma",
    "epsilon_start",
    "epsilon_end",
    "epsilon_decay",
    "angle_bins",
    "k_t",
    "k_r",
    "w1",
    "w2",
    "w3",
    "w4",
    "runs",
    "window",
    "counts",
    "caps",
    "margins",
    "sims_per_cell",
    "plateau_tol",
    "monotone_slack",
];

/// `key=value` settings file. Command-line flags take precedence over it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got {line:?}")))?;
            let k = k.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(Error::parse(i + 1, format!("unknown config key {k:?}")));
            }
            if values.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate config key {k:?}")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::invalid(format!("config {key}={v}: {e}")))
            })
            .transpose()
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| parse_list(v).map_err(|e| Error::invalid(format!("config {key}: {e}"))))
            .transpose()
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

/// Records what produced an output directory.
pub fn write_manifest(dir: &Path, verb: &str, seed: u64, config: &[(String, String)]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut text = format!(
        "verb={verb}\nseed={seed}\nversion={}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in config {
        text.push_str(&format!("{k}={v}\n"));
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, text)?;
    Ok(path)
}
