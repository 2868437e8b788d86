// `!(a <= b)` is deliberate throughout: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;

use super::{
    ComparisonSpec, GreensKernel, GridFunction, IntegralOperator, PbvpError, Rhs, TimeGrid, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::par::Execution;
use crate::Verdict;

#[derive(Debug, Clone, PartialEq)]
pub struct PbvpOptions {
    /// Stop once `‖u_{k+1} − u_k‖∞ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Slack for the finite-difference lower-solution test.
    pub lower_tol: f64,
    pub check_lower: bool,
    pub check_condition_iv: bool,
    /// Fail when an ordered step is followed by an unordered one.
    pub check_monotone: bool,
    pub execution: Execution,
}

impl Default for PbvpOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            lower_tol: 1e-9,
            check_lower: true,
            check_condition_iv: true,
            check_monotone: true,
            execution: Execution::default(),
        }
    }
}

/// Second-order finite differences: central inside, one-sided at the ends,
/// or with `periodic` the wrap-around central difference at both ends.
pub fn derivative(u: &GridFunction, periodic: bool) -> Vec<f64> {
    let v = &u.values;
    let n = v.len();
    let h = u.grid.step();
    let mut d: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
            _ if i == n - 1 => (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h),
            _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect();
    if periodic {
        // u(0) = u(T), so u(-h) = u(T - h)
        let wrap = (v[1] - v[n - 2]) / (2.0 * h);
        d[0] = wrap;
        d[n - 1] = wrap;
    }
    d
}

/// `max |u'(tᵢ) − f(tᵢ, uᵢ)|` with one-sided and with periodic end
/// differences.
pub fn ode_residuals(f: &dyn Rhs, u: &GridFunction) -> (f64, f64) {
    let residual = |d: Vec<f64>| {
        d.iter()
            .enumerate()
            .map(|(i, di)| (di - f.eval(u.grid.node(i), u.values[i])).abs())
            .fold(0.0, f64::max)
    };
    (residual(derivative(u, false)), residual(derivative(u, true)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerSolutionWitness {
    Derivative { node: usize, t: f64, derivative: f64, rhs: f64 },
    Boundary { start: f64, end: f64 },
}

/// `w'(tᵢ) ≤ f(tᵢ, w(tᵢ)) + tol` at every node and `w(0) ≤ w(T) + tol`.
pub fn is_lower_solution(f: &dyn Rhs, w: &GridFunction, tol: f64) -> Verdict<LowerSolutionWitness> {
    let d = derivative(w, false);
    for (i, &di) in d.iter().enumerate() {
        let t = w.grid.node(i);
        let rhs = f.eval(t, w.values[i]);
        if !(di <= rhs + tol) {
            return Verdict::Fails(LowerSolutionWitness::Derivative {
                node: i,
                t,
                derivative: di,
                rhs,
            });
        }
    }
    let (start, end) = (w.values[0], w.values[w.values.len() - 1]);
    if !(start <= end + tol) {
        return Verdict::Fails(LowerSolutionWitness::Boundary { start, end });
    }
    Verdict::Holds
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionIvWitness {
    Inequality { t: f64, s1: f64, s2: f64, lhs: f64, rhs: f64 },
    SupNotBelowAlpha { sup_h: f64, alpha: f64 },
}

/// `count` evenly spaced states covering `[lo, hi]`.
pub fn state_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Sampled check of
/// `|f₁(t, s₂) + α s₂ − (f₂(t, s₁) + α s₁)| ≤ h(t) (s₂ − s₁)` for `s₁ ≤ s₂`,
/// plus `sup h < α`. Equal states are included, so distinct `f₁`, `f₂` are
/// caught wherever they differ.
pub fn verify_condition_iv(
    f1: &dyn Rhs,
    f2: &dyn Rhs,
    alpha: f64,
    h: &ComparisonSpec,
    t_samples: &[f64],
    s_pairs: &[(f64, f64)],
) -> Verdict<ConditionIvWitness> {
    let sup_h = t_samples.iter().map(|&t| h.eval(t, alpha)).fold(f64::NEG_INFINITY, f64::max);
    if !(sup_h < alpha) {
        return Verdict::Fails(ConditionIvWitness::SupNotBelowAlpha { sup_h, alpha });
    }
    for &t in t_samples {
        let ht = h.eval(t, alpha);
        for &(s1, s2) in s_pairs {
            let lhs = (f1.eval(t, s2) + alpha * s2 - (f2.eval(t, s1) + alpha * s1)).abs();
            let rhs = ht * (s2 - s1);
            let slack = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
            if !(lhs <= rhs + slack) {
                return Verdict::Fails(ConditionIvWitness::Inequality { t, s1, s2, lhs, rhs });
            }
        }
    }
    Verdict::Holds
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbvpReport {
    pub iterations: usize,
    pub increments: Vec<f64>,
    /// `incₖ / incₖ₋₁`, recorded while the previous increment is above the
    /// round-off floor.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub beta: f64,
    pub periodicity_residual: f64,
    pub ode_residual: f64,
    pub ode_residual_periodic: f64,
    /// `w₀ ≤ F w₀` pointwise.
    pub first_step_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbvpSolution {
    pub u: GridFunction,
    pub report: PbvpReport,
}

fn beta_of(h: &ComparisonSpec, alpha: f64, grid: &TimeGrid) -> Result<f64, PbvpError> {
    h.validate()?;
    let sup_h = grid.times().into_iter().map(|t| h.eval(t, alpha)).fold(f64::NEG_INFINITY, f64::max);
    let beta = sup_h / alpha;
    if !(beta < 1.0) {
        return Err(PbvpError::BetaNotContractive(beta));
    }
    Ok(beta)
}

fn ratio_floor(u: &GridFunction) -> f64 {
    1e-13 * u.sup_norm().max(1.0)
}

fn ordered(lo: &[f64], hi: &[f64], tol: f64) -> Option<usize> {
    lo.iter().zip(hi).position(|(a, b)| *a > b + tol)
}

/// Picard iteration `u_{k+1} = F u_k` from `u₁ = F w₀`.
pub fn solve_pbvp(
    f: &dyn Rhs,
    alpha: f64,
    h: &ComparisonSpec,
    w0: &GridFunction,
    opts: &PbvpOptions,
) -> Result<PbvpSolution, PbvpError> {
    let grid = w0.grid;
    let op = IntegralOperator::new(GreensKernel::new(alpha, grid.period)?, grid, opts.execution)?;
    let beta = beta_of(h, alpha, &grid)?;
    if opts.check_lower {
        if let Verdict::Fails(w) = is_lower_solution(f, w0, opts.lower_tol) {
            return Err(PbvpError::NotLowerSolution(w));
        }
    }
    let mut u = op.apply(f, w0)?;
    let first_step_monotone = ordered(&w0.values, &u.values, opts.tol).is_none();
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    for k in 1..=opts.max_iter {
        let next = op.apply(f, &u)?;
        let inc = next.sup_distance(&u);
        if let Some(&prev) = increments.last() {
            if prev > ratio_floor(&u) {
                ratios.push(inc / prev);
            }
        }
        increments.push(inc);
        u = next;
        if inc <= opts.tol {
            let (ode_residual, ode_residual_periodic) = ode_residuals(f, &u);
            return Ok(PbvpSolution {
                report: PbvpReport {
                    iterations: k,
                    max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                    increments,
                    ratios,
                    beta,
                    periodicity_residual: u.periodicity_residual(),
                    ode_residual,
                    ode_residual_periodic,
                    first_step_monotone,
                },
                u,
            });
        }
    }
    Err(PbvpError::NoConvergence {
        iterations: opts.max_iter,
        increment: increments.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonPbvpReport {
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub beta: f64,
    /// `‖u − ∫G[f₁(u) + αu]‖∞`
    pub residual_f1: f64,
    /// `‖u − ∫G[f₂(u) + αu]‖∞`
    pub residual_f2: f64,
    pub periodicity_residual: f64,
    /// `xₙ ≤ xₙ₊₁` pointwise for each step, starting with `w₀ ≤ x₀`.
    pub monotone_steps: Vec<bool>,
    pub condition_iv_checked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonPbvpSolution {
    pub u: GridFunction,
    pub report: CommonPbvpReport,
}

/// Alternates `F₁u = ∫G[f₂(u) + αu]` and `F₂u = ∫G[f₁(u) + αu]` from
/// `x₀ = F₂ w₀`, until a step is below `tol` and `u` is within `tol` of
/// both operators' images.
pub fn solve_common_pbvp(
    f1: &dyn Rhs,
    f2: &dyn Rhs,
    alpha: f64,
    h: &ComparisonSpec,
    w0: &GridFunction,
    opts: &PbvpOptions,
) -> Result<CommonPbvpSolution, PbvpError> {
    let grid = w0.grid;
    let op = IntegralOperator::new(GreensKernel::new(alpha, grid.period)?, grid, opts.execution)?;
    let beta = beta_of(h, alpha, &grid)?;
    if opts.check_lower {
        if let Verdict::Fails(w) = is_lower_solution(f1, w0, opts.lower_tol) {
            return Err(PbvpError::NotLowerSolution(w));
        }
    }
    let mut x = op.apply(f1, w0)?;
    if opts.check_condition_iv {
        let (lo, hi) = w0
            .values
            .iter()
            .chain(&x.values)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let states = state_samples(lo - 1.0, hi + 1.0, 17);
        let pairs: Vec<(f64, f64)> = states
            .iter()
            .enumerate()
            .flat_map(|(k, &s1)| states[k..].iter().map(move |&s2| (s1, s2)))
            .collect();
        if let Verdict::Fails(w) = verify_condition_iv(f1, f2, alpha, h, &grid.times(), &pairs) {
            return Err(PbvpError::ConditionIvViolated(w));
        }
    }
    let mut monotone_steps = vec![ordered(&w0.values, &x.values, opts.tol).is_none()];
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    for n in 0..opts.max_iter {
        // F₁ after an F₂ image and the other way round
        let rhs: &dyn Rhs = if n % 2 == 0 { f2 } else { f1 };
        let next = op.apply(rhs, &x)?;
        let inc = next.sup_distance(&x);
        if let Some(&prev) = increments.last() {
            if prev > ratio_floor(&x) {
                ratios.push(inc / prev);
            }
        }
        increments.push(inc);
        let bad_node = ordered(&x.values, &next.values, opts.tol);
        if opts.check_monotone && monotone_steps.last() == Some(&true) {
            if let Some(node) = bad_node {
                return Err(PbvpError::MonotonicityBroken { iteration: n + 1, node });
            }
        }
        monotone_steps.push(bad_node.is_none());
        x = next;
        if inc <= opts.tol {
            let residual_f1 = op.apply(f1, &x)?.sup_distance(&x);
            let residual_f2 = op.apply(f2, &x)?.sup_distance(&x);
            if residual_f1 <= opts.tol && residual_f2 <= opts.tol {
                return Ok(CommonPbvpSolution {
                    report: CommonPbvpReport {
                        iterations: n + 1,
                        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                        increments,
                        ratios,
                        beta,
                        residual_f1,
                        residual_f2,
                        periodicity_residual: x.periodicity_residual(),
                        monotone_steps,
                        condition_iv_checked: opts.check_condition_iv,
                    },
                    u: x,
                });
            }
        }
    }
    Err(PbvpError::NoConvergence {
        iterations: opts.max_iter,
        increment: increments.last().copied().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbvp::{sup_diff, RhsSpec};
    use std::f64::consts::{E, TAU};

    fn example() -> (RhsSpec, f64, ComparisonSpec) {
        (RhsSpec::ExpLinear { c: -1.0 }, E * E, ComparisonSpec::ExpGap { level: None })
    }

    #[test]
    fn lower_solution_examples() {
        let (f, _, _) = example();
        let grid = TimeGrid::new(1.0, 51).unwrap();
        assert!(is_lower_solution(&f, &GridFunction::constant(grid, -1.0), 1e-12).holds());
        match is_lower_solution(&f, &GridFunction::constant(grid, 1.0), 1e-12) {
            Verdict::Fails(LowerSolutionWitness::Derivative { node, .. }) => assert_eq!(node, 0),
            other => panic!("{other:?}"),
        }
        // w(0) > w(T) with a flat enough slope
        let w = GridFunction::from_fn(grid, |t| -2.0 - 0.1 * t);
        assert!(matches!(
            is_lower_solution(&f, &w, 1e-12),
            Verdict::Fails(LowerSolutionWitness::Boundary { .. })
        ));
    }

    #[test]
    fn example_converges_to_zero() {
        let (f, alpha, h) = example();
        let grid = TimeGrid::new(1.0, 201).unwrap();
        let sol = solve_pbvp(&f, alpha, &h, &GridFunction::constant(grid, -1.0), &PbvpOptions::default()).unwrap();
        assert!(sol.u.sup_norm() <= 1e-6);
        assert_eq!(sol.report.periodicity_residual, 0.0);
        assert!(sol.report.max_ratio <= sol.report.beta + 1e-6);
        assert!(sol.report.first_step_monotone);
    }

    #[test]
    fn constant_fixed_point() {
        let alpha = 2.0;
        let f = RhsSpec::Linear {
            slope: -alpha,
            offset: alpha * 0.75,
        };
        let grid = TimeGrid::new(1.0, 101).unwrap();
        let h = ComparisonSpec::Constant { value: 0.0 };
        let opts = PbvpOptions {
            check_lower: false,
            ..PbvpOptions::default()
        };
        let sol = solve_pbvp(&f, alpha, &h, &GridFunction::constant(grid, 0.0), &opts).unwrap();
        assert!(sol.u.values.iter().all(|v| (v - 0.75).abs() < 1e-3));
    }

    #[test]
    fn beta_must_be_below_one() {
        let (f, alpha, _) = example();
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let h = ComparisonSpec::Constant { value: alpha };
        assert!(matches!(
            solve_pbvp(&f, alpha, &h, &GridFunction::constant(grid, -1.0), &PbvpOptions::default()),
            Err(PbvpError::BetaNotContractive(_))
        ));
        assert!(matches!(
            verify_condition_iv(&f, &f, alpha, &h, &grid.times(), &[(0.0, 1.0)]),
            Verdict::Fails(ConditionIvWitness::SupNotBelowAlpha { .. })
        ));
    }

    #[test]
    fn condition_iv_example_holds_and_detects_perturbation() {
        let (f, alpha, h) = example();
        let grid = TimeGrid::new(1.0, 21).unwrap();
        let states = state_samples(-2.0, 2.0, 9);
        let pairs: Vec<_> = states
            .iter()
            .flat_map(|&a| states.iter().filter(move |&&b| b >= a).map(move |&b| (a, b)))
            .collect();
        assert!(verify_condition_iv(&f, &f, alpha, &h, &grid.times(), &pairs).holds());
        let g = |t: f64, s: f64| -(t.exp()) * s + 1e-3 * (TAU * t).sin();
        assert!(!verify_condition_iv(&f, &g, alpha, &h, &grid.times(), &pairs).holds());
    }

    #[test]
    fn common_problem_reduces_to_single() {
        let (f, alpha, h) = example();
        let grid = TimeGrid::new(1.0, 101).unwrap();
        let w0 = GridFunction::constant(grid, -1.0);
        let both = solve_common_pbvp(&f, &f, alpha, &h, &w0, &PbvpOptions::default()).unwrap();
        let single = solve_pbvp(&f, alpha, &h, &w0, &PbvpOptions::default()).unwrap();
        assert!(both.u.sup_norm() <= 1e-6);
        assert!(both.u.sup_distance(&single.u) <= 1e-9);
        assert!(both.report.monotone_steps.iter().all(|&m| m));
    }

    #[test]
    fn perturbed_pair_is_rejected() {
        let f1 = |_t: f64, s: f64| -s;
        let f2 = |t: f64, s: f64| -s + 1e-2 * (TAU * t).cos();
        let grid = TimeGrid::new(1.0, 51).unwrap();
        let h = ComparisonSpec::Constant { value: 1.0 };
        let err = solve_common_pbvp(&f1, &f2, 2.0, &h, &GridFunction::constant(grid, 0.0), &PbvpOptions::default())
            .unwrap_err();
        assert!(matches!(err, PbvpError::ConditionIvViolated(_)));
    }

    #[test]
    fn derivative_orders() {
        let grid = TimeGrid::new(1.0, 101).unwrap();
        let u = GridFunction::from_fn(grid, |t| (TAU * t).sin());
        let exact: Vec<f64> = grid.times().iter().map(|t| TAU * (TAU * t).cos()).collect();
        for periodic in [false, true] {
            let err = sup_diff(&derivative(&u, periodic), &exact);
            assert!(err < 3e-2, "periodic={periodic} err={err}");
        }
    }
}
