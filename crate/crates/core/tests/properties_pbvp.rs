use std::f64::consts::E;

use proptest::prelude::*;

use bestprox::par::Execution;
use bestprox::pbvp::{
    solve_pbvp, ComparisonSpec, GreensKernel, GridFunction, IntegralOperator, PbvpOptions, RhsSpec, TimeGrid,
};

/// `max_t |Σ W(t, ·) − 1/α| · (N − 1)²` measured at `α = e²`, `T = 1`
/// (≈ 0.6157 for N = 201 and 401), rounded up and frozen.
const MASS_CONSTANT: f64 = 0.62;

/// Sup difference between the solutions on `N` and `2N − 1` nodes, times
/// `(N − 1)²`, for the cosine-forced family below; measured below 0.5 and
/// frozen with headroom.
const REFINEMENT_CONSTANT: f64 = 1.0;

fn operator(alpha: f64, period: f64, nodes: usize) -> IntegralOperator {
    let grid = TimeGrid::new(period, nodes).unwrap();
    IntegralOperator::new(GreensKernel::new(alpha, period).unwrap(), grid, Execution::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_positive(alpha in 0.05f64..20.0, period in 0.1f64..3.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let k = GreensKernel::new(alpha, period).unwrap();
        prop_assert!(k.value(a * period, b * period).unwrap() > 0.0);
        let op = operator(alpha, period, 17);
        for i in 0..17 {
            prop_assert!(op.row(i).iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn kernel_mass_is_second_order(nodes in 41usize..1001) {
        let alpha = E * E;
        let worst = operator(alpha, 1.0, nodes)
            .row_masses()
            .iter()
            .fold(0.0f64, |m, v| m.max((v - 1.0 / alpha).abs()));
        let h = 1.0 / (nodes - 1) as f64;
        prop_assert!(worst <= MASS_CONSTANT * h * h, "N = {}: {:e}", nodes, worst);
    }

    #[test]
    fn operator_outputs_are_periodic(
        alpha in 0.1f64..10.0,
        values in prop::collection::vec(-1e3f64..1e3, 5..60),
        slope in -5.0f64..5.0,
    ) {
        let grid = TimeGrid::new(1.5, values.len()).unwrap();
        let op = IntegralOperator::new(GreensKernel::new(alpha, 1.5).unwrap(), grid, Execution::default()).unwrap();
        let u = GridFunction::new(grid, values).unwrap();
        let f = RhsSpec::Linear { slope, offset: 1.0 };
        let fu = op.apply(&f, &u).unwrap();
        let scale = fu.sup_norm().max(1.0);
        prop_assert!(fu.periodicity_residual() <= 1e-12 * scale);
    }

    #[test]
    fn picard_increments_contract_by_beta(alpha in 0.5f64..10.0, sigma in 0.05f64..1.95, offset in -3.0f64..3.0) {
        // f + α s = α (1 − σ) s + offset, Lipschitz in s with constant α |1 − σ|
        let f = RhsSpec::Linear { slope: -alpha * sigma, offset };
        let beta = (1.0 - sigma).abs();
        let h = ComparisonSpec::Constant { value: alpha * beta };
        let grid = TimeGrid::new(1.0, 81).unwrap();
        let w0 = GridFunction::from_fn(grid, |t| (6.0 * t).cos());
        let opts = PbvpOptions { check_lower: false, ..PbvpOptions::default() };
        let sol = solve_pbvp(&f, alpha, &h, &w0, &opts).unwrap();
        prop_assert!((sol.report.beta - beta).abs() <= 1e-12);
        // the discrete operator norm exceeds β by the quadrature error of the row masses
        let mass = operator(alpha, 1.0, 81).row_masses().into_iter().fold(0.0, f64::max);
        let discrete = beta * alpha * mass;
        let step = alpha / 80.0;
        prop_assert!(discrete - beta <= beta * step * step / 4.0, "{} vs {}", discrete, beta);
        // increments near round-off carry relative noise, so skip those
        let scale = sol.u.sup_norm().max(1.0);
        for w in sol.report.increments.windows(2) {
            if w[0] >= 1e-6 * scale {
                prop_assert!(w[1] / w[0] <= discrete + 1e-7, "ratio {} > {}", w[1] / w[0], discrete);
            }
        }
    }

    #[test]
    fn first_step_rises_above_a_lower_solution(
        alpha in 0.5f64..10.0,
        sigma in 0.05f64..1.0,
        offset in -3.0f64..3.0,
        margin in 0.0f64..5.0,
    ) {
        let slope = -alpha * sigma;
        // constant w with slope·w + offset ≥ 0 is a lower solution
        let level = offset / (alpha * sigma) - margin;
        let f = RhsSpec::Linear { slope, offset };
        let grid = TimeGrid::new(1.0, 61).unwrap();
        let w0 = GridFunction::constant(grid, level);
        let op = IntegralOperator::new(GreensKernel::new(alpha, 1.0).unwrap(), grid, Execution::default()).unwrap();
        let u1 = op.apply(&f, &w0).unwrap();
        for (w, u) in w0.values.iter().zip(&u1.values) {
            prop_assert!(*w <= u + 1e-9 * w.abs().max(1.0));
        }
        let h = ComparisonSpec::Constant { value: alpha * (1.0 - sigma) };
        let sol = solve_pbvp(&f, alpha, &h, &w0, &PbvpOptions::default()).unwrap();
        prop_assert!(sol.report.first_step_monotone);
    }

    #[test]
    fn refinement_changes_solution_at_second_order(nodes in 51usize..301, lambda in 0.5f64..2.0) {
        let f = RhsSpec::CosineForced { lambda, amplitude: 1.0, frequency: 1.0 };
        let alpha = lambda + 1.0;
        let h = ComparisonSpec::Constant { value: 1.0 };
        let solve = |n: usize| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            // f(t, −2/λ) = 2 + cos 2πt ≥ 0, so the constant is a lower solution
            let w0 = GridFunction::constant(grid, -2.0 / lambda);
            solve_pbvp(&f, alpha, &h, &w0, &PbvpOptions::default()).unwrap().u
        };
        let coarse = solve(nodes);
        let fine = solve(2 * nodes - 1);
        let diff = coarse
            .values
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, v)| m.max((v - fine.values[2 * i]).abs()));
        let step = 1.0 / (nodes - 1) as f64;
        prop_assert!(diff <= REFINEMENT_CONSTANT * step * step, "N = {}: {:e}", nodes, diff);
    }
}
