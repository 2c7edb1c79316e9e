//! Line-oriented experiment configs.
//!
//! ```text
//! # comment
//! experiment = ivx-null
//! n = 250, 500, 1000
//! reps = 5000
//! seed = 42
//! level = 0.05
//! output = results/ivx.csv
//!
//! [dgp]
//! c = -5
//! method.c_z = -1      # dotted keys work outside sections too
//! ```
//!
//! Grid files hold several blocks separated by a line `---`. Every block
//! after the first starts from the first block's settings and overrides
//! them.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::series::RngSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Row label in grid tables; defaults to the experiment name.
    pub label: String,
    pub n: Vec<usize>,
    pub reps: usize,
    pub seed: RngSpec,
    pub level: f64,
    pub output: Option<PathBuf>,
    /// Column reported by grid tables.
    pub report: Option<String>,
    pub dgp: BTreeMap<String, String>,
    pub method: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Config with defaults for everything except the experiment name.
    pub fn new(experiment: &str, n: usize, reps: usize, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            label: experiment.to_string(),
            n: vec![n],
            reps,
            seed: RngSpec::new(seed, 0),
            level: 0.05,
            output: None,
            report: None,
            dgp: BTreeMap::new(),
            method: BTreeMap::new(),
        }
    }

    pub fn with_dgp(mut self, key: &str, value: impl ToString) -> Self {
        self.dgp.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_method(mut self, key: &str, value: impl ToString) -> Self {
        self.method.insert(key.to_string(), value.to_string());
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks = parse_grid(text)?;
        if blocks.len() != 1 {
            return Err(Error::config("---", "single-experiment config contains several blocks"));
        }
        Ok(blocks.remove(0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::config("reps", "must be >= 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::config("level", format!("{} outside (0, 1)", self.level)));
        }
        if self.n.is_empty() || self.n.iter().any(|n| *n < 2) {
            return Err(Error::config("n", "need one or more sample sizes >= 2"));
        }
        Ok(())
    }
}

/// Raw `key -> (value, line)` map of one block.
type Block = BTreeMap<String, (String, usize)>;

fn parse_blocks(text: &str) -> Result<Vec<Block>> {
    let mut blocks = vec![Block::new()];
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "---" {
            blocks.push(Block::new());
            section.clear();
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::config(format!("line {line_no}"), "unterminated section header"))?
                .trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::config(format!("line {line_no}"), "bad section name"));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {line_no}"), "expected `key = value`"))?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::config(format!("line {line_no}"), format!("bad key `{k}`")));
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        let block = blocks.last_mut().expect("at least one block");
        if block.insert(key.clone(), (v.trim().to_string(), line_no)).is_some() {
            return Err(Error::config(key, format!("duplicate key on line {line_no}")));
        }
    }
    Ok(blocks)
}

/// Parse a file of one or more `---`-separated blocks.
pub fn parse_grid(text: &str) -> Result<Vec<ExperimentConfig>> {
    let blocks = parse_blocks(text)?;
    let base = blocks[0].clone();
    let mut out = Vec::new();
    if blocks.len() == 1 {
        out.push(build(&base)?);
        return Ok(out);
    }
    for b in &blocks[1..] {
        let mut merged = base.clone();
        merged.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
        out.push(build(&merged)?);
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(key, format!("cannot parse `{v}`")))
}

fn build(block: &Block) -> Result<ExperimentConfig> {
    let experiment = block
        .get("experiment")
        .map(|v| v.0.clone())
        .ok_or_else(|| Error::config("experiment", "missing"))?;
    let mut cfg = ExperimentConfig::new(&experiment, 2, 1, 0);
    cfg.n.clear();
    let mut stream = 0u64;
    let mut have_n = false;
    let mut have_reps = false;
    for (key, (value, _)) in block {
        match key.as_str() {
            "experiment" => {}
            "label" => cfg.label = value.clone(),
            "n" => {
                have_n = true;
                for part in value.split(',') {
                    cfg.n.push(num("n", part.trim())?);
                }
            }
            "reps" => {
                have_reps = true;
                cfg.reps = num(key, value)?;
            }
            "seed" => cfg.seed.seed = num(key, value)?,
            "stream" => stream = num(key, value)?,
            "level" => cfg.level = num(key, value)?,
            "output" => cfg.output = Some(PathBuf::from(value)),
            "report" => cfg.report = Some(value.clone()),
            k => {
                if let Some(rest) = k.strip_prefix("dgp.") {
                    cfg.dgp.insert(rest.to_string(), value.clone());
                } else if let Some(rest) = k.strip_prefix("method.") {
                    cfg.method.insert(rest.to_string(), value.clone());
                } else {
                    return Err(Error::config(k, "unknown key"));
                }
            }
        }
    }
    if !have_n {
        return Err(Error::config("n", "missing"));
    }
    if !have_reps {
        return Err(Error::config("reps", "missing"));
    }
    cfg.seed.stream = stream;
    cfg.validate()?;
    Ok(cfg)
}

/// Typed reader over one nested section that rejects keys nobody asked for.
pub(crate) struct Params<'a> {
    section: &'static str,
    map: &'a BTreeMap<String, String>,
    seen: Vec<&'static str>,
}

impl<'a> Params<'a> {
    pub fn new(section: &'static str, map: &'a BTreeMap<String, String>) -> Self {
        Params { section, map, seen: Vec::new() }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.section)
    }

    fn raw(&mut self, k: &'static str) -> Option<&'a str> {
        self.seen.push(k);
        self.map.get(k).map(|s| s.as_str())
    }

    pub fn f64(&mut self, k: &'static str, default: f64) -> Result<f64> {
        match self.raw(k) {
            Some(v) => num(&self.key(k), v),
            None => Ok(default),
        }
    }

    pub fn opt_f64(&mut self, k: &'static str) -> Result<Option<f64>> {
        self.raw(k).map(|v| num(&self.key(k), v)).transpose()
    }

    pub fn usize(&mut self, k: &'static str, default: usize) -> Result<usize> {
        match self.raw(k) {
            Some(v) => num(&self.key(k), v),
            None => Ok(default),
        }
    }

    pub fn bool(&mut self, k: &'static str, default: bool) -> Result<bool> {
        match self.raw(k) {
            Some(v) => num(&self.key(k), v),
            None => Ok(default),
        }
    }

    pub fn list(&mut self, k: &'static str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(k) {
            Some(v) => v.split(',').map(|p| num(&self.key(k), p.trim())).collect(),
            None => Ok(default.to_vec()),
        }
    }

    /// Parse through `FromStr`, reporting failures against this key.
    pub fn parsed<T: std::str::FromStr>(&mut self, k: &'static str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(k) {
            Some(v) => v.parse().map_err(|e: T::Err| Error::config(self.key(k), e.to_string())),
            None => Ok(default),
        }
    }

    pub fn string(&mut self, k: &'static str, default: &str) -> Result<String> {
        Ok(self.raw(k).unwrap_or(default).to_string())
    }

    /// Map an error from a nested spec constructor onto this section.
    pub fn wrap<T>(&self, k: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| Error::config(self.key(k), e.to_string()))
    }

    pub fn finish(self) -> Result<()> {
        for k in self.map.keys() {
            if !self.seen.contains(&k.as_str()) {
                return Err(Error::config(self.key(k), "not recognized by this experiment"));
            }
        }
        Ok(())
    }
}
