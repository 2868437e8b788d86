use serde::Serialize;

use super::{GridFunction, PbvpError, Rhs, TimeGrid};
use crate::par::Execution;

/// `G(t, s) = e^{α(T+s−t)} / (e^{αT} − 1)` for `s < t` and
/// `e^{α(s−t)} / (e^{αT} − 1)` for `s > t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreensKernel {
    pub alpha: f64,
    pub period: f64,
}

impl GreensKernel {
    pub fn new(alpha: f64, period: f64) -> Result<Self, PbvpError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(PbvpError::InvalidAlpha(alpha));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(PbvpError::InvalidGrid { period, nodes: 0 });
        }
        Ok(Self { alpha, period })
    }

    fn denominator(&self) -> f64 {
        (self.alpha * self.period).exp_m1()
    }

    /// Pointwise value. On the diagonal the left limit (`s ↑ t`) is used,
    /// except at `t = s = 0` where only the right limit exists; this keeps
    /// `G(0, s) = G(T, s)` for every `s`.
    pub fn value(&self, t: f64, s: f64) -> Result<f64, PbvpError> {
        let inside = |x: f64| (0.0..=self.period).contains(&x);
        if !inside(t) || !inside(s) {
            return Err(PbvpError::OutOfDomain { t, s });
        }
        let exponent = if s < t || (s == t && t > 0.0) {
            self.alpha * (self.period + s - t)
        } else {
            self.alpha * (s - t)
        };
        Ok(exponent.exp() / self.denominator())
    }
}

/// `(Fu)(tᵢ) = Σⱼ Wᵢⱼ [f(tⱼ, uⱼ) + α uⱼ]` with trapezoid weights on `[0, tᵢ]`
/// and `[tᵢ, T]` separately, each side using its own one-sided kernel limit.
///
/// Weights depend on `(i, j)` only through the integer offset in the
/// exponent, so rows `0` and `N − 1` come out bitwise equal and every output
/// is exactly periodic.
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    kernel: GreensKernel,
    grid: TimeGrid,
    weights: Vec<f64>,
    execution: Execution,
}

impl IntegralOperator {
    pub fn new(kernel: GreensKernel, grid: TimeGrid, execution: Execution) -> Result<Self, PbvpError> {
        if kernel.period != grid.period {
            return Err(PbvpError::GridMismatch);
        }
        let n = grid.nodes;
        let h = grid.step();
        let rate = kernel.alpha * h;
        let denom = kernel.denominator();
        // e^{α h k} / (e^{αT} − 1) for k = 0..N-1
        let powers: Vec<f64> = (0..n).map(|k| (rate * k as f64).exp() / denom).collect();
        let rows = execution.map_range(n, |i| {
            let mut row = vec![0.0; n];
            // left part, s in [0, t_i]: G = powers[N-1 + j - i]
            if i > 0 {
                for (j, w) in row.iter_mut().enumerate().take(i + 1) {
                    let end = if j == 0 || j == i { 0.5 } else { 1.0 };
                    *w += end * h * powers[n - 1 + j - i];
                }
            }
            // right part, s in [t_i, T]: G = powers[j - i]
            if i < n - 1 {
                for (j, w) in row.iter_mut().enumerate().skip(i) {
                    let end = if j == i || j == n - 1 { 0.5 } else { 1.0 };
                    *w += end * h * powers[j - i];
                }
            }
            row
        });
        Ok(Self {
            kernel,
            grid,
            weights: rows.concat(),
            execution,
        })
    }

    pub fn kernel(&self) -> &GreensKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.nodes;
        &self.weights[i * n..(i + 1) * n]
    }

    /// Quadrature of `∫₀ᵀ G(tᵢ, s) ds` for every node.
    pub fn row_masses(&self) -> Vec<f64> {
        (0..self.grid.nodes).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `Σⱼ Wᵢⱼ gⱼ` for every `i`, summed left to right.
    pub fn integrate(&self, g: &[f64]) -> Vec<f64> {
        self.execution
            .map_range(self.grid.nodes, |i| self.row(i).iter().zip(g).map(|(w, v)| w * v).sum())
    }

    /// `Fu` for the right-hand side `f`.
    pub fn apply(&self, f: &dyn Rhs, u: &GridFunction) -> Result<GridFunction, PbvpError> {
        if u.grid != self.grid {
            return Err(PbvpError::GridMismatch);
        }
        let alpha = self.kernel.alpha;
        let mut g = Vec::with_capacity(self.grid.nodes);
        for (i, &state) in u.values.iter().enumerate() {
            let t = self.grid.node(i);
            let v = f.eval(t, state) + alpha * state;
            if !v.is_finite() {
                return Err(PbvpError::EvaluationFailure { t, state });
            }
            g.push(v);
        }
        Ok(GridFunction {
            grid: self.grid,
            values: self.integrate(&g),
        })
    }
}
