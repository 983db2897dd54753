//! Flat `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl FromStr for KeyValues {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(format!("line {}: duplicate key {key:?}", i + 1));
            }
        }
        Ok(Self { entries })
    }
}

impl KeyValues {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, value: &str) -> Result<T, String> {
        let line = self.entries.get(key).map_or(0, |(l, _)| *l);
        value.parse().map_err(|_| format!("line {line}: bad value {value:?} for {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.raw(key).map(|v| self.parse(key, v)).transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, String> {
        self.get(key)?.ok_or_else(|| format!("missing key {key:?}"))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// A comma- or whitespace-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, String> {
        self.raw(key)
            .map(|v| v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(|s| self.parse(key, s)).collect())
            .transpose()
    }

    /// Row vectors separated by `;`.
    pub fn rows(&self, key: &str) -> Result<Vec<Vec<f64>>, String> {
        let raw = self.raw(key).ok_or_else(|| format!("missing key {key:?}"))?;
        raw.split(';')
            .filter(|r| !r.trim().is_empty())
            .map(|row| row.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(|s| self.parse(key, s)).collect())
            .collect()
    }
}

/// Settings of a plane-pair verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairConfig {
    pub n: usize,
    pub a: f64,
    pub plane1: Vec<Vec<f64>>,
    pub plane2: Vec<Vec<f64>>,
    pub grid: usize,
    pub half_width: f64,
    pub seed: u64,
    pub closedness_points: usize,
    pub value_samples: usize,
    pub spot_checks: usize,
    pub ball_divisions: usize,
    pub quadrature_order: usize,
    pub epsilons: Vec<f64>,
}

const PAIR_KEYS: [&str; 13] = [
    "n",
    "a",
    "plane1",
    "plane2",
    "grid",
    "half_width",
    "seed",
    "closedness_points",
    "value_samples",
    "spot_checks",
    "ball_divisions",
    "quadrature_order",
    "epsilons",
];

impl FromStr for PairConfig {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let kv: KeyValues = text.parse()?;
        if let Some(unknown) = kv.keys().find(|k| !PAIR_KEYS.contains(k)) {
            return Err(format!("unknown key {unknown:?}"));
        }
        let plane1 = kv.rows("plane1")?;
        let plane2 = kv.rows("plane2")?;
        let dim = plane1.first().map_or(0, Vec::len);
        if plane1.is_empty() || plane2.is_empty() || plane1.iter().chain(&plane2).any(|r| r.len() != dim) {
            return Err("plane bases must be nonempty lists of equal-length rows".into());
        }
        Ok(Self {
            n: kv.require("n")?,
            a: kv.require("a")?,
            plane1,
            plane2,
            grid: kv.get_or("grid", 10)?,
            half_width: kv.get_or("half_width", 1.0)?,
            seed: kv.get_or("seed", 0)?,
            closedness_points: kv.get_or("closedness_points", 32)?,
            value_samples: kv.get_or("value_samples", 200)?,
            spot_checks: kv.get_or("spot_checks", 16)?,
            ball_divisions: kv.get_or("ball_divisions", 4)?,
            quadrature_order: kv.get_or("quadrature_order", 2)?,
            epsilons: kv.list("epsilons")?.unwrap_or_else(|| vec![0.05, 0.1, 0.2]),
        })
    }
}
