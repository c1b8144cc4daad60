//! Instance manifests.
//!
//! A manifest is a TOML document:
//!
//! ```toml
//! name = "slant-alpha"
//! description = "one line"
//! seed = 7
//! checks = ["slant", "phi_squared"]   # optional; default is the full suite
//!
//! [params]
//! alpha = "pi/3"                       # number or constant expression
//!
//! [total]
//! coords = ["x1", "x2", "x3", "x4"]    # or dim = 4 for x1..x4
//! metric = "euclidean"                 # or a full matrix of entries
//! complex_structure = "standard"       # or a full matrix of entries
//!
//! [base]
//! coords = ["y1", "y2"]
//! metric = "euclidean"
//!
//! [map]
//! components = ["x1*sin(alpha) - x3*cos(alpha)", "x4"]
//!
//! [region]
//! min = [-1, -1, -1, -1]
//! max = [1, 1, 1, 1]
//!
//! [tolerances]                         # optional overrides
//! [sampling]                           # points = 100, dirs = 8
//! [output]                             # path, format = "json" | "text"
//! ```
//!
//! Matrix entries are numbers or expression strings over the chart's
//! coordinates and the declared parameters. A full metric matrix must be
//! symmetric entry by entry (compared after parsing).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, ExprError, ScalarField};
use crate::geometry::{standard_complex_structure, Chart, HermitianChart};
use crate::sampling::Region;
use crate::submersion::SubmersionInstance;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// `"euclidean"`/`"identity"` for metrics, `"standard"` for J.
    Named(String),
    Rows(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub coords: Option<Vec<String>>,
    pub metric: MatrixSpec,
    #[serde(default)]
    pub complex_structure: Option<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub components: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub points: usize,
    pub dirs: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { points: 100, dirs: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, Entry>,
    pub total: ChartSpec,
    pub base: ChartSpec,
    pub map: MapSpec,
    pub region: Region,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub output: Output,
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    Manifest::from_toml(&text)
}

fn field_error(field: &str, e: ExprError) -> Error {
    match e {
        ExprError::UnknownIdentifier { name, .. } => {
            Error::manifest(field, format!("unknown identifier or unbound parameter '{name}'"))
        }
        ExprError::UnboundParameter(name) => Error::manifest(field, format!("unbound parameter '{name}'")),
        other => Error::Expr(other),
    }
}

/// Value of a constant expression (no coordinates, no parameters).
pub fn constant_value(field: &str, entry: &Entry) -> Result<f64> {
    match entry {
        Entry::Number(x) => Ok(*x),
        Entry::Expr(s) => {
            ScalarField::parse(s, &[], &BTreeMap::new()).and_then(|f| f.eval_real(&[])).map_err(|e| field_error(field, e))
        }
    }
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Manifest = toml::from_str(text).map_err(|e| {
            let field = e.span().map_or_else(|| "manifest".to_string(), |s| format!("byte {}", s.start));
            Error::manifest(field, e.message().to_string())
        })?;
        m.validate_shape()?;
        Ok(m)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.sampling.points == 0 {
            return Err(Error::manifest("sampling.points", "must be positive"));
        }
        if let Some(checks) = &self.checks {
            for c in checks {
                if !super::CHECKS.contains(&c.as_str()) {
                    return Err(Error::manifest("checks", format!("unknown check '{c}'")));
                }
            }
        }
        Ok(())
    }

    /// Bound parameter values.
    pub fn param_values(&self) -> Result<BTreeMap<String, f64>> {
        self.params
            .iter()
            .map(|(k, v)| constant_value(&format!("params.{k}"), v).map(|x| (k.clone(), x)))
            .collect()
    }

    /// Override a declared parameter, `value` being a constant expression.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        if !self.params.contains_key(name) {
            return Err(Error::manifest("params", format!("no parameter named '{name}'")));
        }
        let entry = Entry::Expr(value.to_string());
        constant_value(&format!("params.{name}"), &entry)?;
        self.params.insert(name.to_string(), entry);
        Ok(())
    }

    pub fn build(&self) -> Result<SubmersionInstance> {
        let params = self.param_values()?;
        let total_coords = coords(&self.total, "total", "x")?;
        let m = total_coords.len();
        if m % 2 == 1 {
            return Err(Error::manifest("total.dim", "total dim must be even"));
        }
        let base_coords = coords(&self.base, "base", "y")?;
        let n = base_coords.len();
        if n >= m {
            return Err(Error::manifest("base.dim", "base dim must be smaller than total dim"));
        }
        if self.base.complex_structure.is_some() {
            return Err(Error::manifest("base.complex_structure", "the base carries no complex structure"));
        }
        let g1 = metric(&self.total.metric, "total.metric", &total_coords, &params)?;
        let j_spec = self
            .total
            .complex_structure
            .as_ref()
            .ok_or_else(|| Error::manifest("total.complex_structure", "missing"))?;
        let j = complex_structure(j_spec, &total_coords, &params)?;
        let total = HermitianChart::new(Chart::from_rows(total_coords.clone(), g1)?, j)?;
        let base = Chart::from_rows(base_coords.clone(), metric(&self.base.metric, "base.metric", &base_coords, &params)?)?;
        if self.map.components.len() != n {
            return Err(Error::manifest(
                "map.components",
                format!("expected {n} components for base dim {n}, found {}", self.map.components.len()),
            ));
        }
        let map = self
            .map
            .components
            .iter()
            .enumerate()
            .map(|(a, c)| field(&format!("map.components[{a}]"), c, &total_coords, &params))
            .collect::<Result<Vec<_>>>()?;
        if self.region.dim() != m {
            return Err(Error::manifest("region", format!("expected {m} bounds, found {}", self.region.dim())));
        }
        let region = Region::new(self.region.min.clone(), self.region.max.clone())?;
        SubmersionInstance::new(self.name.clone(), total, base, map, region, self.seed, self.tolerances)
    }
}

fn coords(spec: &ChartSpec, block: &str, stem: &str) -> Result<Vec<String>> {
    let names = match (&spec.coords, spec.dim) {
        (Some(c), Some(d)) if c.len() != d => {
            return Err(Error::manifest(format!("{block}.dim"), format!("dim {d} but {} coords", c.len())))
        }
        (Some(c), _) => c.clone(),
        (None, Some(d)) => (1..=d).map(|i| format!("{stem}{i}")).collect(),
        (None, None) => return Err(Error::manifest(block, "needs dim or coords")),
    };
    if names.is_empty() {
        return Err(Error::manifest(format!("{block}.dim"), "must be positive"));
    }
    for (i, c) in names.iter().enumerate() {
        if names[..i].contains(c) {
            return Err(Error::manifest(format!("{block}.coords"), format!("duplicate coordinate '{c}'")));
        }
        if expr::UnaryFn::from_name(c).is_some() {
            return Err(Error::manifest(format!("{block}.coords"), format!("'{c}' is a function name")));
        }
    }
    Ok(names)
}

fn field(name: &str, entry: &Entry, coords: &[String], params: &BTreeMap<String, f64>) -> Result<ScalarField> {
    match entry {
        Entry::Number(x) => Ok(ScalarField::constant(*x, coords)),
        Entry::Expr(s) => ScalarField::parse(s, coords, params).map_err(|e| field_error(name, e)),
    }
}

fn rows(
    spec: &MatrixSpec,
    name: &str,
    coords: &[String],
    params: &BTreeMap<String, f64>,
    named: impl Fn(&str) -> Option<Vec<Vec<f64>>>,
) -> Result<Vec<Vec<ScalarField>>> {
    let m = coords.len();
    match spec {
        MatrixSpec::Named(s) => {
            let vals = named(s).ok_or_else(|| Error::manifest(name, format!("unknown matrix name '{s}'")))?;
            Ok(vals.iter().map(|r| r.iter().map(|x| ScalarField::constant(*x, coords)).collect()).collect())
        }
        MatrixSpec::Rows(r) => {
            if r.len() != m || r.iter().any(|row| row.len() != m) {
                return Err(Error::manifest(name, format!("expected a {m}×{m} matrix")));
            }
            r.iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter().enumerate().map(|(j, e)| field(&format!("{name}[{i}][{j}]"), e, coords, params)).collect()
                })
                .collect()
        }
    }
}

fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|i| (0..m).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn metric(spec: &MatrixSpec, name: &str, coords: &[String], params: &BTreeMap<String, f64>) -> Result<Vec<Vec<ScalarField>>> {
    let m = coords.len();
    let r = rows(spec, name, coords, params, |s| matches!(s, "euclidean" | "identity").then(|| identity(m)))?;
    for i in 0..m {
        for j in (i + 1)..m {
            if r[i][j].ast().to_string() != r[j][i].ast().to_string() {
                return Err(Error::manifest(format!("{name}[{j}][{i}]"), "metric must be symmetric"));
            }
        }
    }
    Ok(r)
}

fn complex_structure(spec: &MatrixSpec, coords: &[String], params: &BTreeMap<String, f64>) -> Result<Vec<Vec<ScalarField>>> {
    let m = coords.len();
    rows(spec, "total.complex_structure", coords, params, |s| {
        (s == "standard").then(|| {
            let j = standard_complex_structure(m);
            (0..m).map(|i| (0..m).map(|k| j[(i, k)]).collect()).collect()
        })
    })
}
