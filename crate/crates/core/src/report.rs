//! Check outcomes and residual bookkeeping.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
    Skipped,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis-not-met",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

/// Where the worst residual of a check was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub label: String,
}

impl Witness {
    pub fn new(point: &Vector, vectors: &[&Vector], label: impl Into<String>) -> Self {
        Witness {
            point: point.iter().copied().collect(),
            vectors: vectors.iter().map(|v| v.iter().copied().collect()).collect(),
            label: label.into(),
        }
    }
}

/// Running max/mean of a residual family with the argmax witness.
#[derive(Debug, Clone, Default)]
pub struct Residuals {
    max: f64,
    sum: f64,
    count: usize,
    witness: Option<Witness>,
}

impl Residuals {
    pub fn new() -> Self {
        Residuals::default()
    }

    /// Record one residual. NaN counts as an infinite residual.
    pub fn record(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        let value = if value.is_nan() { f64::INFINITY } else { value.abs() };
        if self.witness.is_none() || value > self.max {
            self.max = value;
            self.witness = Some(witness());
        }
        self.sum += value;
        self.count += 1;
    }

    /// Merge `other` after `self`; ties keep the earlier witness.
    pub fn merge(&mut self, other: Residuals) {
        if let Some(w) = other.witness {
            if self.witness.is_none() || other.max > self.max {
                self.max = other.max;
                self.witness = Some(w);
            }
        }
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn stats(&self) -> Stats {
        let mean = if self.count == 0 { 0.0 } else { self.sum / self.count as f64 };
        Stats { max: self.max, mean, count: self.count }
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    pub fn below(&self, tol: f64) -> bool {
        self.max < tol
    }
}

/// Map `f` over indexed items in parallel, then fold the per-item residuals
/// in index order so results do not depend on scheduling.
pub fn reduce_ordered<T, F>(items: &[T], f: F) -> Residuals
where
    T: Sync,
    F: Fn(usize, &T) -> Residuals + Sync + Send,
{
    let parts: Vec<Residuals> = items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    let mut acc = Residuals::new();
    for p in parts {
        acc.merge(p);
    }
    acc
}

/// As [`reduce_ordered`] but with several residual families per item.
pub fn reduce_ordered_many<T, F, const K: usize>(items: &[T], f: F) -> [Residuals; K]
where
    T: Sync,
    F: Fn(usize, &T) -> [Residuals; K] + Sync + Send,
{
    let parts: Vec<[Residuals; K]> = items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    let mut acc: [Residuals; K] = std::array::from_fn(|_| Residuals::new());
    for p in parts {
        for (a, r) in acc.iter_mut().zip(p) {
            a.merge(r);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Wall time in milliseconds. Not serialized, so JSON reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub wall_ms: f64,
}

impl CheckReport {
    pub fn new(name: &str, status: Status) -> Self {
        CheckReport {
            name: name.to_string(),
            status,
            residual: None,
            witness: None,
            values: BTreeMap::new(),
            classification: None,
            message: None,
            wall_ms: 0.0,
        }
    }

    /// Report whose residual and witness come from the worst of `families`.
    pub fn from_families(name: &str, status: Status, families: &[(&str, &Residuals)]) -> Self {
        let mut r = CheckReport::new(name, status);
        let mut combined = Residuals::new();
        for (label, fam) in families {
            r.values.insert(format!("{label}_max"), fam.max());
            combined.merge((*fam).clone());
        }
        r.residual = Some(combined.stats());
        r.witness = combined.witness().cloned();
        r
    }

    pub fn skipped(name: &str, why: impl Into<String>) -> Self {
        CheckReport::new(name, Status::Skipped).with_message(why)
    }

    pub fn with_message(mut self, msg: impl Into<String>) -> Self {
        self.message = Some(msg.into());
        self
    }

    pub fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.as_ref().map_or(0.0, |s| s.max)
    }
}
