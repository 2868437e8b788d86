//! Executable versions of the worked examples, with the results they are
//! expected to produce.
//!
//! Each builder returns a ready-to-solve bundle and checks the structural
//! properties the example is supposed to have. [`reproduce`] reruns the
//! example end to end and compares every expected result with what the
//! solvers actually produce.

mod ex22;
mod ex33;
mod ex35;
mod ex41;
mod ex53;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ex22::{alpha_grid, build_ex22, Ex22};
pub use ex33::{build_ex33, Ex33};
pub use ex35::{build_ex35, Ex35};
pub use ex41::{build_ex41, Ex41};
pub use ex53::{build_ex53, Ex53};

use crate::bpp_solver::BppError;
use crate::cyclic_contraction::{ContractionError, CyclicMap, GaugeSpec};
use crate::fixed_point::{FixedPointError, PairMaps, PsiGauge};
use crate::metric_graph::{FiniteMetricGraph, MetricGraphError, PointId};
use crate::pbvp::PbvpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleId {
    Ex22Kappa,
    Ex33DyadicL1,
    Ex35NotBpo,
    Ex41FixedPoint,
    Ex53Pbvp,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::Ex22Kappa,
        ExampleId::Ex33DyadicL1,
        ExampleId::Ex35NotBpo,
        ExampleId::Ex41FixedPoint,
        ExampleId::Ex53Pbvp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Ex22Kappa => "ex22_kappa",
            ExampleId::Ex33DyadicL1 => "ex33_dyadic_l1",
            ExampleId::Ex35NotBpo => "ex35_not_bpo",
            ExampleId::Ex41FixedPoint => "ex41_fixed_point",
            ExampleId::Ex53Pbvp => "ex53_pbvp",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| CorpusError::UnknownExample(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("parameter `{name}` = {value} outside {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("built instance lacks a claimed property: {0}")]
    ClaimFailed(String),
    #[error(transparent)]
    Space(#[from] MetricGraphError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Bpp(#[from] BppError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error(transparent)]
    Pbvp(#[from] PbvpError),
}

/// Builder knobs; unset fields take each example's default.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExampleParams {
    /// Number of `κ` classes kept (ex22).
    pub truncation: Option<usize>,
    /// Number of dyadic levels kept (ex33, ex35, ex41).
    pub depth: Option<usize>,
    /// Time-grid nodes (ex41, ex53).
    pub nodes: Option<usize>,
}

impl ExampleParams {
    /// Parses `key=value` pairs.
    pub fn parse<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Self, CorpusError> {
        let mut out = Self::default();
        for pair in pairs {
            let (key, value) = pair.split_once('=').ok_or_else(|| CorpusError::UnknownParam(pair.to_string()))?;
            let slot = match key.trim() {
                "truncation" | "n" => &mut out.truncation,
                "depth" => &mut out.depth,
                "nodes" => &mut out.nodes,
                other => return Err(CorpusError::UnknownParam(other.to_string())),
            };
            let parsed = value.trim().parse().map_err(|_| CorpusError::ParamOutOfRange {
                name: "value",
                value: value.to_string(),
                range: "non-negative integers",
            })?;
            *slot = Some(parsed);
        }
        Ok(out)
    }
}

pub(crate) fn in_range(
    name: &'static str,
    value: usize,
    lo: usize,
    hi: usize,
    range: &'static str,
) -> Result<usize, CorpusError> {
    if (lo..=hi).contains(&value) {
        Ok(value)
    } else {
        Err(CorpusError::ParamOutOfRange {
            name,
            value: value.to_string(),
            range,
        })
    }
}

/// A cyclic map on a finite instance with its gauges.
#[derive(Debug, Clone)]
pub struct CyclicBundle {
    pub space: FiniteMetricGraph,
    pub map: CyclicMap,
    pub phi1: GaugeSpec,
    pub phi2: GaugeSpec,
    /// Points where a truncated infinite instance was cut off. The map is
    /// clamped there, so the contraction inequality may fail on pairs that
    /// involve them by at most the cut-off scale.
    pub truncation_boundary: BTreeSet<PointId>,
}

/// A `ψ`-contraction pair with a recommended seed.
#[derive(Debug, Clone)]
pub struct PairBundle {
    pub space: FiniteMetricGraph,
    pub pair: PairMaps,
    pub psi: PsiGauge,
    pub seed: PointId,
}

/// What a check's expected value rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Stated in the worked example itself.
    Stated,
    /// Computed independently (closed form or brute force).
    Derived,
    /// Follows immediately from the construction.
    Trivial,
    /// A discrepancy with the worked example that the run reproduces.
    Finding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub basis: Basis,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(
        name: impl Into<String>,
        basis: Basis,
        expected: impl Into<String>,
        observed: impl Into<String>,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            basis,
            expected: expected.into(),
            observed: observed.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub example: ExampleId,
    pub params: ExampleParams,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

pub fn reproduce(id: ExampleId, params: &ExampleParams) -> Result<ReproduceReport, CorpusError> {
    let checks = match id {
        ExampleId::Ex22Kappa => ex22::reproduce(params)?,
        ExampleId::Ex33DyadicL1 => ex33::reproduce(params)?,
        ExampleId::Ex35NotBpo => ex35::reproduce(params)?,
        ExampleId::Ex41FixedPoint => ex41::reproduce(params)?,
        ExampleId::Ex53Pbvp => ex53::reproduce(params)?,
    };
    Ok(ReproduceReport {
        example: id,
        params: params.clone(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

pub(crate) fn label_set(space: &FiniteMetricGraph, ids: &BTreeSet<PointId>) -> String {
    let labels: Vec<&str> = ids.iter().map(|&x| space.label(x)).collect();
    format!("{{{}}}", labels.join(", "))
}
