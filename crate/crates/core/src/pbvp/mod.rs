//! Periodic boundary value problems `u' = f(t, u)`, `u(0) = u(T)`.
//!
//! The problem is rewritten as the fixed-point equation
//! `u(t) = ∫₀ᵀ G(t, s) [f(s, u(s)) + α u(s)] ds` with the two-branch
//! exponential Green's kernel, discretised on a uniform grid with a
//! trapezoid rule split at the kernel's jump, and solved by Picard
//! iteration.

mod kernel;
mod rhs;
mod solve;

use serde::Serialize;
use thiserror::Error;

pub use kernel::{GreensKernel, IntegralOperator};
pub use rhs::{ComparisonSpec, Rhs, RhsSpec};
pub use solve::{
    derivative, is_lower_solution, ode_residuals, solve_common_pbvp, solve_pbvp, state_samples, verify_condition_iv,
    CommonPbvpReport, CommonPbvpSolution, ConditionIvWitness, LowerSolutionWitness, PbvpOptions, PbvpReport,
    PbvpSolution,
};

pub const DEFAULT_NODES: usize = 201;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbvpError {
    #[error("grid needs a positive finite period and at least 3 nodes (got T = {period}, N = {nodes})")]
    InvalidGrid { period: f64, nodes: usize },
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("({t}, {s}) is outside the square [0, T]²")]
    OutOfDomain { t: f64, s: f64 },
    #[error("right-hand side is not finite at t = {t}, state {state}")]
    EvaluationFailure { t: f64, state: f64 },
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("sup h / alpha = {0} is not below 1")]
    BetaNotContractive(f64),
    #[error("initial function is not a lower solution: {0:?}")]
    NotLowerSolution(LowerSolutionWitness),
    #[error("comparison condition fails: {0:?}")]
    ConditionIvViolated(ConditionIvWitness),
    #[error("iterate {iteration} lost the ordering at node {node}")]
    MonotonicityBroken { iteration: usize, node: usize },
    #[error("no convergence after {iterations} iterations (last increment {increment})")]
    NoConvergence { iterations: usize, increment: f64 },
    #[error("invalid function specification: {0}")]
    BadSpec(String),
}

/// Uniform nodes `tᵢ = i T / (N − 1)` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub period: f64,
    pub nodes: usize,
}

impl TimeGrid {
    pub fn new(period: f64, nodes: usize) -> Result<Self, PbvpError> {
        if !(period.is_finite() && period > 0.0) || nodes < 3 {
            return Err(PbvpError::InvalidGrid { period, nodes });
        }
        Ok(Self { period, nodes })
    }

    pub fn step(&self) -> f64 {
        self.period / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.nodes - 1 {
            self.period
        } else {
            self.period * i as f64 / (self.nodes - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.node(i)).collect()
    }
}

/// Values of a function at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self, PbvpError> {
        if values.len() != grid.nodes {
            return Err(PbvpError::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.nodes],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.times().into_iter().map(f).collect(),
        }
    }

    /// `|u(0) − u(T)|`
    pub fn periodicity_residual(&self) -> f64 {
        (self.values[0] - self.values[self.grid.nodes - 1]).abs()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        sup_diff(&self.values, &other.values)
    }

    /// Rows `t,u` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u\n");
        for (t, u) in self.grid.times().iter().zip(&self.values) {
            // shortest round-trip form, exponent notation for tiny values
            out.push_str(&format!("{t:?},{u:?}\n"));
        }
        out
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
