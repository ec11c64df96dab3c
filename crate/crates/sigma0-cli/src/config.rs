//! Run configuration: defaults, a `key = value` file, then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use sigma0::orders::Bounds;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "text" => Format::Text,
            _ => bail!("unknown format '{s}' (csv, json, text)"),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "text",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub unit_height: f64,
    pub ideal_norm_cap: f64,
    pub node_limit: u64,
    pub cache_path: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = Bounds::default();
        RunConfig {
            precision_bits: 128,
            unit_height: b.unit_height,
            ideal_norm_cap: b.ideal_norm_cap,
            node_limit: b.node_limit,
            cache_path: None,
            format: Format::Text,
            seed: 0,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = |what: &str| -> Result<f64> {
            let x: f64 = v.parse().with_context(|| format!("{what}: '{v}' is not a number"))?;
            if !(x > 0.0) || !x.is_finite() {
                bail!("{what} must be positive");
            }
            Ok(x)
        };
        match key.trim() {
            "precision_bits" => {
                let p: u32 = v.parse().with_context(|| format!("precision_bits: '{v}'"))?;
                if p < 64 {
                    bail!("precision_bits must be at least 64");
                }
                self.precision_bits = p;
            }
            "unit_height" => self.unit_height = num("unit_height")?,
            "ideal_norm_cap" => self.ideal_norm_cap = num("ideal_norm_cap")?,
            "node_limit" => self.node_limit = num("node_limit")? as u64,
            "cache_path" => self.cache_path = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "format" => self.format = Format::parse(v)?,
            "seed" => self.seed = v.parse().with_context(|| format!("seed: '{v}'"))?,
            "threads" => self.threads = v.parse().with_context(|| format!("threads: '{v}'"))?,
            k => bail!("unknown config key '{k}'"),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected key = value", path.display(), i + 1);
            };
            self.set(k, v).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    /// Settings that can change output; cache location and thread count
    /// only change runtime.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("precision_bits", self.precision_bits.to_string());
        m.insert("unit_height", self.unit_height.to_string());
        m.insert("ideal_norm_cap", self.ideal_norm_cap.to_string());
        m.insert("node_limit", self.node_limit.to_string());
        m.insert("format", self.format.as_str().to_string());
        m.insert("seed", self.seed.to_string());
        m
    }

    /// sha256 over the sorted `key=value` lines.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds { unit_height: self.unit_height, ideal_norm_cap: self.ideal_norm_cap, node_limit: self.node_limit }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m: serde_json::Map<String, serde_json::Value> =
            self.entries().into_iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v))).collect();
        serde_json::Value::Object(m)
    }
}
