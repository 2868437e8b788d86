//! `u' = −eᵗ u` on `[0, 1]` with `u(0) = u(1)`, shifted by `α = e²` and
//! compared against `h(t) = e² − eᵗ`. The only periodic solution is zero.

use super::{in_range, Basis, CheckResult, CorpusError, ExampleParams};
use crate::pbvp::{
    solve_common_pbvp, solve_pbvp, ComparisonSpec, GridFunction, PbvpOptions, RhsSpec, TimeGrid, DEFAULT_NODES,
};

pub const PERIOD: f64 = 1.0;
/// Starting lower solution.
pub const LOWER_START: f64 = -1.0;

#[derive(Debug, Clone)]
pub struct Ex53 {
    pub rhs: RhsSpec,
    pub alpha: f64,
    pub h: ComparisonSpec,
    pub w0: GridFunction,
}

impl Ex53 {
    /// `sup h / α = (e² − 1) / e²`.
    pub fn beta(&self) -> f64 {
        (self.alpha - 1.0) / self.alpha
    }
}

pub fn build_ex53(params: &ExampleParams) -> Result<Ex53, CorpusError> {
    let nodes = in_range("nodes", params.nodes.unwrap_or(DEFAULT_NODES), 3, 100_001, "[3, 100001]")?;
    let grid = TimeGrid::new(PERIOD, nodes)?;
    Ok(Ex53 {
        rhs: RhsSpec::ExpLinear { c: -1.0 },
        alpha: 2f64.exp(),
        h: ComparisonSpec::ExpGap { level: None },
        w0: GridFunction::constant(grid, LOWER_START),
    })
}

pub(super) fn reproduce(params: &ExampleParams) -> Result<Vec<CheckResult>, CorpusError> {
    let ex = build_ex53(params)?;
    let mut checks = Vec::new();
    let sol = solve_pbvp(&ex.rhs, ex.alpha, &ex.h, &ex.w0, &PbvpOptions::default())?;
    let r = &sol.report;
    let norm = sol.u.sup_norm();
    checks.push(CheckResult::new(
        "solution is zero",
        Basis::Stated,
        "‖u‖∞ ≤ 1e-6",
        format!("{norm:e}"),
        norm <= 1e-6,
    ));
    checks.push(CheckResult::new(
        "periodic",
        Basis::Trivial,
        "|u(0) − u(T)| ≤ 1e-9",
        format!("{:e}", r.periodicity_residual),
        r.periodicity_residual <= 1e-9,
    ));
    checks.push(CheckResult::new(
        "measured contraction ratio within β",
        Basis::Stated,
        format!("≤ {} + 1e-6", ex.beta()),
        format!("{} over {} iterations", r.max_ratio, r.iterations),
        (r.beta - ex.beta()).abs() <= 1e-12 && r.max_ratio <= ex.beta() + 1e-6,
    ));
    checks.push(CheckResult::new(
        "first Picard step is ordered above the lower solution",
        Basis::Stated,
        "true",
        r.first_step_monotone.to_string(),
        r.first_step_monotone,
    ));
    let common = solve_common_pbvp(&ex.rhs, &ex.rhs, ex.alpha, &ex.h, &ex.w0, &PbvpOptions::default())?;
    let gap = common.u.sup_distance(&sol.u);
    checks.push(CheckResult::new(
        "common solver with f₁ = f₂ agrees",
        Basis::Trivial,
        "≤ 1e-8",
        format!("{gap:e}"),
        gap <= 1e-8,
    ));
    Ok(checks)
}
