//! Line-oriented `key = value` run configuration.
//!
//! Keys are namespaced (`geometry.kappa0`, `plasma.beta`, `sweep.kappa0`,
//! `abc.A`, ...). `#` starts a comment. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "config line {l}, key '{k}': {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "config key '{k}': {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    fn at(entry: &Entry, key: &str, message: impl Into<String>) -> Self {
        Self {
            line: entry.line,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

/// Keys accepted in a config file or via `--set`.
pub const KNOWN_KEYS: &[&str] = &[
    "scheme",
    "run.seed",
    "run.threads",
    "output.format",
    "output.path",
    "geometry.kappa0",
    "geometry.tau0",
    "flow.v_s",
    "flow.v_n",
    "flow.v_n_meansq",
    "plasma.alpha",
    "plasma.lambda",
    "plasma.beta",
    "plasma.eta",
    "sweep.kappa0",
    "sweep.tau0",
    "sweep.v_s",
    "sweep.alpha",
    "sweep.lambda",
    "sweep.beta",
    "sweep.row_cap",
    "couple.tau0",
    "couple.v_s",
    "couple.alpha",
    "couple.lambda",
    "couple.beta",
    "verify.draws",
    "verify.dt",
    "verify.t_end",
    "verify.order_dt",
    "verify.fault",
    "helix.a",
    "helix.b_pitch",
    "helix.s",
    "helix.draws",
    "abc.A",
    "abc.B",
    "abc.C",
    "abc.x",
    "abc.y",
    "abc.z",
    "abc.bracket",
    "tube.r",
    "tube.s",
    "tube.theta0",
    "tube.tau0",
    "tube.b_theta",
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    raw: String,
    line: Option<usize>,
}

/// Inclusive evenly spaced grid `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn point(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            count: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + span * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(lineno),
                    key: None,
                    message: format!("expected 'key = value', found '{line}'"),
                });
            };
            cfg.insert(key.trim(), value.trim(), Some(lineno))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("--set expects key=value, got '{assignment}'")))?;
        self.insert(key.trim(), value.trim(), None)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError {
                line,
                key: Some(key.to_string()),
                message: "unknown key".to_string(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError {
                line,
                key: Some(key.to_string()),
                message: "empty value".to_string(),
            });
        }
        if let (Some(_), Some(first)) = (line, self.entries.get(key).and_then(|e| e.line)) {
            return Err(ConfigError {
                line,
                key: Some(key.to_string()),
                message: format!("duplicate key (first set on line {first})"),
            });
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                raw: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }

    /// Sorted `(key, raw value)` pairs.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, e)| (k.clone(), e.raw.clone()))
            .collect()
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.raw.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        parse_f64(&entry.raw)
            .map(Some)
            .ok_or_else(|| ConfigError::at(entry, key, format!("expected a number, got '{}'", entry.raw)))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or_else(|| ConfigError {
            line: None,
            key: Some(key.to_string()),
            message: "required key is missing".to_string(),
        })
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        entry
            .raw
            .parse::<u64>()
            .map(Some)
            .map_err(|_| ConfigError::at(entry, key, format!("expected a nonnegative integer, got '{}'", entry.raw)))
    }

    /// A single value or a `min:max:count` grid.
    pub fn axis(&self, key: &str) -> Result<Option<Axis>, ConfigError> {
        let Some(entry) = self.entries.get(key) else {
            return Ok(None);
        };
        parse_axis(&entry.raw)
            .map(Some)
            .map_err(|msg| ConfigError::at(entry, key, msg))
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line_of(key),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_f64(raw: &str) -> Option<f64> {
    let v: f64 = raw.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

pub fn parse_axis(raw: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [v] => parse_f64(v)
            .map(Axis::point)
            .ok_or_else(|| format!("expected a number or min:max:count, got '{raw}'")),
        [lo, hi, n] => {
            let min = parse_f64(lo).ok_or_else(|| format!("bad grid minimum '{lo}'"))?;
            let max = parse_f64(hi).ok_or_else(|| format!("bad grid maximum '{hi}'"))?;
            let count: usize = n.parse().map_err(|_| format!("bad grid count '{n}'"))?;
            if count < 1 {
                return Err("grid count must be at least 1".to_string());
            }
            if min > max {
                return Err(format!("grid minimum {min} exceeds maximum {max}"));
            }
            if count == 1 && min != max {
                return Err("a single-point grid needs min == max".to_string());
            }
            Ok(Axis { min, max, count })
        }
        _ => Err(format!("expected a number or min:max:count, got '{raw}'")),
    }
}
