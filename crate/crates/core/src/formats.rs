//! Versioned JSON documents for instances, maps, gauges and PBVP problems.
//!
//! Every document carries `"schema": "1"`. Fields the reader does not know
//! are collected as dotted paths; [`Strictness::Strict`] turns them into an
//! error, [`Strictness::Warn`] hands them back next to the parsed value.
//! Right-hand-side specs reject unknown parameters in both modes, since a
//! misspelt parameter would otherwise silently fall back to its default.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cyclic_contraction::{ContractionError, CyclicMap, GaugeSpec};
use crate::fixed_point::{FixedPointError, PairMaps};
use crate::metric_graph::{CoordMetric, FiniteMetricGraph, MetricGraphError, Side, SpaceBuilder};
use crate::pbvp::{ComparisonSpec, GridFunction, PbvpError, RhsSpec, TimeGrid, DEFAULT_NODES};

pub const SCHEMA: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unsupported schema {0:?}, expected \"1\"")]
    Schema(String),
    #[error("unknown fields: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Space(#[from] MetricGraphError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error(transparent)]
    Pbvp(#[from] PbvpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    Strict,
    #[default]
    Warn,
}

/// A parsed value with the unknown-field paths that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Parsed<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Parsed<U> {
        Parsed {
            value: f(self.value),
            warnings: self.warnings,
        }
    }
}

trait Versioned {
    fn schema(&self) -> &str;
}

fn parse_doc<T: DeserializeOwned + Versioned>(text: &str, strictness: Strictness) -> Result<Parsed<T>, FormatError> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string()))
        .map_err(|e| FormatError::Json(e.to_string()))?;
    de.end().map_err(|e| FormatError::Json(e.to_string()))?;
    if value.schema() != SCHEMA {
        return Err(FormatError::Schema(value.schema().to_string()));
    }
    if strictness == Strictness::Strict && !unknown.is_empty() {
        return Err(FormatError::UnknownFields(unknown));
    }
    Ok(Parsed {
        value,
        warnings: unknown,
    })
}

/// Serialises `value` as a JSON object with `"schema": "1"` first.
pub fn with_schema<T: Serialize>(value: &T) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match serde_json::to_value(value) {
        Ok(Value::Object(fields)) => out.extend(fields),
        Ok(other) => {
            out.insert("value".into(), other);
        }
        Err(e) => {
            out.insert("error".into(), Value::String(e.to_string()));
        }
    }
    Value::Object(out)
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn schema(&self) -> &str {
                &self.schema
            }
        }
    )*};
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Explicit `distances` matrix.
    Table,
    L1,
    L2,
    Sup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub label: String,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub schema: String,
    pub metric: MetricKind,
    pub points: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    /// Directed edges by label.
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    /// Add every loop `(x, x)` instead of requiring it in `edges`.
    #[serde(default)]
    pub auto_loops: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub schema: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDoc {
    pub schema: String,
    pub t1: BTreeMap<String, String>,
    pub t2: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeDoc {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<GaugeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<GaugeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<GaugeSpec>,
}

/// Starting function: one constant or one value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDoc {
    Constant(f64),
    Values(Vec<f64>),
}

fn default_period() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbvpDoc {
    pub schema: String,
    pub rhs: RhsSpec,
    /// Second right-hand side for the common-solution solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs2: Option<RhsSpec>,
    pub alpha: f64,
    pub h: ComparisonSpec,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    pub w0: InitialDoc,
}

versioned!(InstanceDoc, MapDoc, PairDoc, GaugeDoc, PbvpDoc);

impl InstanceDoc {
    pub fn build(&self) -> Result<FiniteMetricGraph, FormatError> {
        let mut builder = SpaceBuilder::new();
        for p in &self.points {
            match &p.coords {
                Some(c) => builder.add_point_at(p.label.clone(), p.side, c.clone()),
                None => builder.add_point(p.label.clone(), p.side),
            };
        }
        let ids: BTreeMap<&str, usize> = self.points.iter().enumerate().map(|(i, p)| (p.label.as_str(), i)).collect();
        for (from, to) in &self.edges {
            let id = |l: &String| ids.get(l.as_str()).copied().ok_or_else(|| MetricGraphError::UnknownPoint(l.clone()));
            builder.add_edge(id(from)?, id(to)?);
        }
        let metric = match self.metric {
            MetricKind::Table => {
                let table = self
                    .distances
                    .clone()
                    .ok_or_else(|| FormatError::Invalid("metric \"table\" needs a `distances` matrix".into()))?;
                return Ok(builder.build_with_table(table, self.auto_loops)?);
            }
            MetricKind::L1 => CoordMetric::L1,
            MetricKind::L2 => CoordMetric::L2,
            MetricKind::Sup => CoordMetric::Sup,
        };
        if self.distances.is_some() {
            return Err(FormatError::Invalid("`distances` is only allowed with metric \"table\"".into()));
        }
        Ok(builder.build_with_metric(metric, self.auto_loops)?)
    }

    /// Explicit table, explicit loops, no coordinates.
    pub fn from_space(space: &FiniteMetricGraph) -> Self {
        Self {
            schema: SCHEMA.into(),
            metric: MetricKind::Table,
            points: (0..space.len())
                .map(|x| PointDoc {
                    label: space.label(x).to_string(),
                    side: space.side(x),
                    coords: None,
                })
                .collect(),
            distances: Some(space.distance_table()),
            edges: space
                .edges()
                .map(|(x, y)| (space.label(x).to_string(), space.label(y).to_string()))
                .collect(),
            auto_loops: false,
        }
    }
}

pub fn parse_instance(text: &str, strictness: Strictness) -> Result<Parsed<FiniteMetricGraph>, FormatError> {
    let doc = parse_doc::<InstanceDoc>(text, strictness)?;
    let space = doc.value.build()?;
    Ok(Parsed {
        value: space,
        warnings: doc.warnings,
    })
}

pub fn parse_map(
    text: &str,
    space: &FiniteMetricGraph,
    strictness: Strictness,
) -> Result<Parsed<CyclicMap>, FormatError> {
    let doc = parse_doc::<MapDoc>(text, strictness)?;
    let map = CyclicMap::from_labels(space, &doc.value.map)?;
    Ok(doc.map(|_| map))
}

/// The raw label table, for one-sided maps such as `T₁` alone.
pub fn parse_map_doc(text: &str, strictness: Strictness) -> Result<Parsed<MapDoc>, FormatError> {
    parse_doc(text, strictness)
}

pub fn parse_pair(text: &str, space: &FiniteMetricGraph, strictness: Strictness) -> Result<Parsed<PairMaps>, FormatError> {
    let doc = parse_doc::<PairDoc>(text, strictness)?;
    let pair = PairMaps::from_labels(space, &doc.value.t1, &doc.value.t2)?;
    Ok(doc.map(|_| pair))
}

pub fn parse_gauges(text: &str, strictness: Strictness) -> Result<Parsed<GaugeDoc>, FormatError> {
    parse_doc(text, strictness)
}

pub fn parse_pbvp(text: &str, strictness: Strictness) -> Result<Parsed<PbvpDoc>, FormatError> {
    let doc = parse_doc::<PbvpDoc>(text, strictness)?;
    doc.value.rhs.validate()?;
    if let Some(r) = &doc.value.rhs2 {
        r.validate()?;
    }
    doc.value.h.validate()?;
    if !(doc.value.alpha.is_finite() && doc.value.alpha > 0.0) {
        return Err(PbvpError::InvalidAlpha(doc.value.alpha).into());
    }
    doc.value.initial()?;
    Ok(doc)
}

impl PbvpDoc {
    pub fn grid(&self) -> Result<TimeGrid, FormatError> {
        Ok(TimeGrid::new(self.period, self.nodes)?)
    }

    pub fn initial(&self) -> Result<GridFunction, FormatError> {
        let grid = self.grid()?;
        let w = match &self.w0 {
            InitialDoc::Constant(c) => GridFunction::constant(grid, *c),
            InitialDoc::Values(v) => GridFunction::new(grid, v.clone())?,
        };
        if w.values.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::Invalid("w0 must be finite".into()));
        }
        Ok(w)
    }
}

pub fn map_doc(space: &FiniteMetricGraph, map: &CyclicMap) -> MapDoc {
    MapDoc {
        schema: SCHEMA.into(),
        map: map.to_labels(space),
    }
}

pub fn pair_doc(space: &FiniteMetricGraph, pair: &PairMaps) -> PairDoc {
    PairDoc {
        schema: SCHEMA.into(),
        t1: pair.t1_labels(space),
        t2: pair.t2_labels(space),
    }
}
