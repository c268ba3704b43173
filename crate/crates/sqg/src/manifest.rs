//! Run manifests: what was run, with which parameters, on which inputs, and
//! the SHA-256 of everything it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqg_core::galerkin::SqgParams;

use crate::config::params_to_kv;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    /// Inputs by absolute path.
    pub inputs: Vec<FileDigest>,
    /// Outputs relative to the manifest's directory.
    pub outputs: Vec<FileDigest>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(|e| Error::io(path, e))?))
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, params: Option<&SqgParams>) -> Self {
        let mut m = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv,
            params: BTreeMap::new(),
            seed: 0,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: unix_now(),
            finished: 0.0,
        };
        if let Some(p) = params {
            m.set_params(p);
        }
        m
    }

    pub fn set_params(&mut self, p: &SqgParams) {
        self.params = params_to_kv(p)
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        self.seed = p.seed;
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let abs = std::fs::canonicalize(path).map_err(|e| Error::io(path, e))?;
        let sha256 = file_sha256(&abs)?;
        self.inputs.push(FileDigest { path: abs.display().to_string(), sha256 });
        Ok(())
    }

    /// Writes `bytes` to `dir/name` and records its digest.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn file_name(command: &str, json: bool) -> String {
        format!("{command}.manifest.{}", if json { "json" } else { "txt" })
    }

    /// Stamps the finish time and writes the manifest into `dir`. Consumes
    /// the manifest so a run serializes it once.
    pub fn finish(mut self, dir: &Path, json: bool) -> Result<PathBuf> {
        self.finished = unix_now();
        let text = if json {
            serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n"
        } else {
            self.to_text()
        };
        let path = dir.join(Self::file_name(&self.command, json));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Plain text: one `key = value` per line, repeated `arg`, `input` and
    /// `output` keys, parameters as `param.<key>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        };
        line("tool", &self.tool);
        line("version", &self.version);
        line("command", &self.command);
        for a in &self.argv {
            line("arg", a);
        }
        for (k, v) in &self.params {
            line(&format!("param.{k}"), v);
        }
        line("seed", &self.seed.to_string());
        for d in &self.inputs {
            line("input", &format!("{} {}", d.sha256, d.path));
        }
        for d in &self.outputs {
            line("output", &format!("{} {}", d.sha256, d.path));
        }
        line("started", &format!("{:.6}", self.started));
        line("finished", &format!("{:.6}", self.finished));
        out
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, String> {
        let mut m = RunManifest::new("", Vec::new(), None);
        m.started = 0.0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ").ok_or_else(|| format!("malformed line {line:?}"))?;
            let digest = |v: &str| -> std::result::Result<FileDigest, String> {
                let (sha, path) = v.split_once(' ').ok_or_else(|| format!("malformed digest {v:?}"))?;
                Ok(FileDigest { path: path.to_string(), sha256: sha.to_string() })
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number {v:?}"));
            match k {
                "tool" => m.tool = v.to_string(),
                "version" => m.version = v.to_string(),
                "command" => m.command = v.to_string(),
                "arg" => m.argv.push(v.to_string()),
                "seed" => m.seed = v.parse().map_err(|_| format!("bad seed {v:?}"))?,
                "input" => m.inputs.push(digest(v)?),
                "output" => m.outputs.push(digest(v)?),
                "started" => m.started = num(v)?,
                "finished" => m.finished = num(v)?,
                _ => match k.strip_prefix("param.") {
                    Some(p) => {
                        m.params.insert(p.to_string(), v.to_string());
                    }
                    None => return Err(format!("unknown key {k:?}")),
                },
            }
        }
        Ok(m)
    }

    /// Reads either layout, telling them apart by the leading brace.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim_start().starts_with('{') {
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
        } else {
            Self::from_text(&text).map_err(|r| Error::format(path, r))
        }
    }

    /// Recomputes every digest; outputs resolve against `dir`. Returns the
    /// paths whose contents no longer match.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        let inputs = self.inputs.iter().map(|d| (PathBuf::from(&d.path), d));
        let outputs = self.outputs.iter().map(|d| (dir.join(&d.path), d));
        for (path, d) in inputs.chain(outputs) {
            if file_sha256(&path)? != d.sha256 {
                bad.push(d.path.clone());
            }
        }
        Ok(bad)
    }
}
