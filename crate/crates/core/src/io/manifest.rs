//! Run manifests: a flat key=value record of what produced a run directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Seconds since the Unix epoch.
pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub master_seed: u64,
    pub started: f64,
    pub finished: f64,
    /// The configuration as it was resolved, in config-file form.
    pub config: Vec<(String, String)>,
    /// Headline numbers of the run.
    pub results: Vec<(String, String)>,
    /// Output file name (relative to the run directory) to SHA-256 digest.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, master_seed: u64, config: Vec<(String, String)>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            master_seed,
            started: unix_now(),
            finished: f64::NAN,
            config,
            results: Vec::new(),
            checksums: BTreeMap::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    /// Digest every listed output in `dir`.
    pub fn record_outputs(&mut self, dir: &Path, files: &[PathBuf]) -> Result<()> {
        for f in files {
            let name = f
                .strip_prefix(dir)
                .unwrap_or(f)
                .to_string_lossy()
                .into_owned();
            self.checksums.insert(name, sha256_file(f)?);
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        };
        line("tool", "spinglass");
        line("tool_version", &self.tool_version);
        line("subcommand", &self.subcommand);
        line("master_seed", &self.master_seed.to_string());
        line("started_unix", &format!("{:.3}", self.started));
        line("finished_unix", &format!("{:.3}", self.finished));
        for (k, v) in &self.config {
            line(&format!("config.{k}"), v);
        }
        for (k, v) in &self.results {
            line(&format!("result.{k}"), v);
        }
        for (k, v) in &self.checksums {
            line(&format!("sha256.{k}"), v);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest {
            tool_version: String::new(),
            subcommand: String::new(),
            master_seed: 0,
            started: f64::NAN,
            finished: f64::NAN,
            config: Vec::new(),
            results: Vec::new(),
            checksums: BTreeMap::new(),
        };
        let bad = |l: &str| Error::Schema(format!("malformed manifest line '{l}'"));
        for l in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = l.split_once('=').ok_or_else(|| bad(l))?;
            let v = v.to_string();
            if let Some(k) = k.strip_prefix("config.") {
                m.config.push((k.into(), v));
            } else if let Some(k) = k.strip_prefix("result.") {
                m.results.push((k.into(), v));
            } else if let Some(k) = k.strip_prefix("sha256.") {
                m.checksums.insert(k.into(), v);
            } else {
                match k {
                    "tool" => {}
                    "tool_version" => m.tool_version = v,
                    "subcommand" => m.subcommand = v,
                    "master_seed" => m.master_seed = v.parse().map_err(|_| bad(l))?,
                    "started_unix" => m.started = v.parse().map_err(|_| bad(l))?,
                    "finished_unix" => m.finished = v.parse().map_err(|_| bad(l))?,
                    _ => return Err(bad(l)),
                }
            }
        }
        Ok(m)
    }

    /// Stamp the finish time and write `manifest.txt` into `dir` through a
    /// temporary file and a rename.
    pub fn finish(&mut self, dir: &Path) -> Result<PathBuf> {
        self.finished = unix_now();
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(self.render().as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Files in the run directory whose contents no longer match the manifest.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m = RunManifest::parse(&text)?;
    let mut changed = Vec::new();
    for (name, digest) in &m.checksums {
        let f = dir.join(name);
        match sha256_file(&f) {
            Ok(d) if &d == digest => {}
            _ => changed.push(name.clone()),
        }
    }
    Ok(changed)
}
