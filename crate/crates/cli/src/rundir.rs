//! A run directory: the resolved configuration, its digest, and a manifest
//! of every file written into the directory.

use std::{
    collections::BTreeMap,
    fs,
    path::{Path, PathBuf},
};

use jsamode::{
    io::{to_hex, ConfigHash},
    presets::Config,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    config_hash: String,
    files: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    producer: String,
    bytes: u64,
    sha256: String,
}

/// Where the configuration comes from.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub path: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
}

impl ConfigSource {
    /// Explicit file, then preset, then `config.toml` inside `dir`.
    pub fn load(&self, dir: &Path) -> CliResult<Config> {
        let mut config = if let Some(p) = &self.path {
            read_config(p)?
        } else if let Some(name) = &self.preset {
            Config::preset(name).ok_or_else(|| {
                CliError::Precondition(format!(
                    "unknown preset `{name}`; choose one of {}",
                    jsamode::presets::PRESET_NAMES.join(", ")
                ))
            })?
        } else {
            let p = dir.join(CONFIG_FILE);
            if !p.exists() {
                return Err(CliError::Precondition(format!(
                    "no configuration: pass --config or --preset, or run `simulate` into {} first",
                    dir.display()
                )));
            }
            read_config(&p)?
        };
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        Ok(config)
    }
}

fn read_config(path: &Path) -> CliResult<Config> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Config::from_toml(&text).map_err(|e| CliError::file(path, e))
}

pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

pub struct RunDir {
    pub root: PathBuf,
    pub config: Config,
    /// Canonical TOML text of `config`.
    pub config_text: String,
    pub hash: ConfigHash,
    pub force: bool,
    manifest: Manifest,
}

impl RunDir {
    pub fn open(root: &Path, source: &ConfigSource, force: bool) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let config = source.load(root)?;
        let config_text = config.to_toml();
        let hash = sha256(config_text.as_bytes());
        let manifest = match fs::read(root.join(MANIFEST_FILE)) {
            Ok(bytes) => serde_json::from_slice::<Manifest>(&bytes)
                .ok()
                .filter(|m| m.config_hash == to_hex(&hash))
                .unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        Ok(Self {
            root: root.to_path_buf(),
            config,
            config_text,
            hash,
            force,
            manifest: Manifest {
                config_hash: to_hex(&hash),
                ..manifest
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.path(name).is_file()
    }

    pub fn hash_hex(&self) -> String {
        to_hex(&self.hash)
    }

    /// Removes every file recorded by a previous manifest, whatever its
    /// configuration, so stale outputs cannot be picked up as inputs.
    pub fn clear_previous_outputs(&mut self) -> CliResult<()> {
        if let Ok(bytes) = fs::read(self.path(MANIFEST_FILE)) {
            if let Ok(old) = serde_json::from_slice::<Manifest>(&bytes) {
                for name in old.files.keys() {
                    let p = self.path(name);
                    if p.is_file() {
                        fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
                    }
                }
            }
        }
        self.manifest.files.clear();
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8], producer: &str) -> CliResult<()> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        self.manifest.files.insert(
            name.to_string(),
            ManifestEntry {
                producer: producer.to_string(),
                bytes: bytes.len() as u64,
                sha256: to_hex(&sha256(bytes)),
            },
        );
        Ok(())
    }

    /// Fails on a digest that differs from the current configuration's
    /// unless `--force` was given.
    pub fn check_hash(&self, path: &Path, found: Option<ConfigHash>) -> CliResult<()> {
        match found {
            Some(h) if h != self.hash => {
                let err = CliError::HashMismatch {
                    path: path.to_path_buf(),
                    found: to_hex(&h),
                    expected: self.hash_hex(),
                };
                if self.force {
                    log::warn!("{err}");
                    Ok(())
                } else {
                    Err(err)
                }
            }
            Some(_) => Ok(()),
            None => {
                log::warn!("{} carries no config hash", path.display());
                Ok(())
            }
        }
    }

    pub fn save_manifest(&self) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serialises");
        text.push('\n');
        let p = self.path(MANIFEST_FILE);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Text report with the configuration digest on its first line.
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(title: &str, rd: &RunDir) -> Self {
        let mut r = Self { text: String::new() };
        r.line(format!("# {title}"));
        r.line(format!("config_hash: {}", rd.hash_hex()));
        r.line(format!("run: {}", rd.config.run.name));
        r
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        self.line(format!("{key}: {value}"));
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }
}
