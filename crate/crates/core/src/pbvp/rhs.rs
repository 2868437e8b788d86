use serde::{Deserialize, Serialize};

use super::PbvpError;

/// A scalar right-hand side `f(t, s)` of time and state.
pub trait Rhs: Sync {
    fn eval(&self, t: f64, s: f64) -> f64;
}

impl<F> Rhs for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn eval(&self, t: f64, s: f64) -> f64 {
        self(t, s)
    }
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

/// Built-in right-hand sides.
///
/// JSON form is flat: `{"kind": "exp_linear", "c": -1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsSpec {
    /// `slope · s + offset`
    Linear {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `c · eᵗ · s`
    ExpLinear {
        #[serde(default = "minus_one")]
        c: f64,
    },
    /// `−λ s + amplitude · cos(2π · frequency · t)`
    CosineForced {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    /// Bilinear interpolation of `values[i][j] = f(t[i], s[j])`, clamped
    /// outside the table.
    Table { t: Vec<f64>, s: Vec<f64>, values: Vec<Vec<f64>> },
}

impl RhsSpec {
    pub fn validate(&self) -> Result<(), PbvpError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            RhsSpec::Linear { slope, offset } => finite(&[*slope, *offset]),
            RhsSpec::ExpLinear { c } => c.is_finite(),
            RhsSpec::CosineForced {
                lambda,
                amplitude,
                frequency,
            } => finite(&[*lambda, *amplitude, *frequency]),
            RhsSpec::Table { t, s, values } => {
                check_axis(t)?;
                check_axis(s)?;
                if values.len() != t.len() || values.iter().any(|row| row.len() != s.len()) {
                    return Err(PbvpError::BadSpec(format!(
                        "table values must be {} rows of {} entries",
                        t.len(),
                        s.len()
                    )));
                }
                values.iter().all(|row| finite(row))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(PbvpError::BadSpec("non-finite parameter".into()))
        }
    }
}

fn check_axis(axis: &[f64]) -> Result<(), PbvpError> {
    if axis.is_empty() || axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PbvpError::BadSpec("table axes must be non-empty, finite and increasing".into()));
    }
    Ok(())
}

/// Index of the cell containing `x` and the fractional position inside it,
/// clamped to the axis range.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    if axis.len() == 1 || x <= axis[0] {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if x >= axis[last] {
        return (last - 1, 1.0);
    }
    let k = axis.partition_point(|&a| a <= x) - 1;
    (k, (x - axis[k]) / (axis[k + 1] - axis[k]))
}

fn interp_1d(axis: &[f64], values: &[f64], x: f64) -> f64 {
    if axis.len() == 1 {
        return values[0];
    }
    let (k, w) = locate(axis, x);
    values[k] * (1.0 - w) + values[k + 1] * w
}

impl Rhs for RhsSpec {
    fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            RhsSpec::Linear { slope, offset } => slope * s + offset,
            RhsSpec::ExpLinear { c } => c * t.exp() * s,
            RhsSpec::CosineForced {
                lambda,
                amplitude,
                frequency,
            } => -lambda * s + amplitude * (std::f64::consts::TAU * frequency * t).cos(),
            RhsSpec::Table { t: ts, s: ss, values } => {
                if ts.len() == 1 {
                    return interp_1d(ss, &values[0], s);
                }
                let (i, w) = locate(ts, t);
                let lo = interp_1d(ss, &values[i], s);
                let hi = interp_1d(ss, &values[i + 1], s);
                lo * (1.0 - w) + hi * w
            }
        }
    }
}

/// The comparison function `h(t)` bounding the state-Lipschitz constant of
/// `f + α·id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparisonSpec {
    Constant { value: f64 },
    /// `level − eᵗ`, with `level` defaulting to `α`.
    ExpGap {
        #[serde(default)]
        level: Option<f64>,
    },
    /// Piecewise-linear in `t`, clamped outside the table.
    Table { t: Vec<f64>, values: Vec<f64> },
}

impl ComparisonSpec {
    pub fn validate(&self) -> Result<(), PbvpError> {
        match self {
            ComparisonSpec::Constant { value } if !value.is_finite() => {
                Err(PbvpError::BadSpec("h value must be finite".into()))
            }
            ComparisonSpec::ExpGap { level: Some(l) } if !l.is_finite() => {
                Err(PbvpError::BadSpec("h level must be finite".into()))
            }
            ComparisonSpec::Table { t, values } => {
                check_axis(t)?;
                if values.len() != t.len() || values.iter().any(|v| !v.is_finite()) {
                    return Err(PbvpError::BadSpec("h table needs one finite value per time".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64, alpha: f64) -> f64 {
        match self {
            ComparisonSpec::Constant { value } => *value,
            ComparisonSpec::ExpGap { level } => level.unwrap_or(alpha) - t.exp(),
            ComparisonSpec::Table { t: ts, values } => interp_1d(ts, values, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shapes() {
        let f: RhsSpec = serde_json::from_str(r#"{"kind":"exp_linear","c":-1.0}"#).unwrap();
        assert_eq!(f, RhsSpec::ExpLinear { c: -1.0 });
        assert_eq!(f.eval(0.0, 2.0), -2.0);
        let h: ComparisonSpec = serde_json::from_str(r#"{"kind":"exp_gap"}"#).unwrap();
        assert_eq!(h.eval(0.0, 5.0), 4.0);
        assert!(serde_json::from_str::<RhsSpec>(r#"{"kind":"linear","slope":1,"bogus":2}"#).is_err());
        assert!(serde_json::from_str::<RhsSpec>(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn table_is_bilinear_and_clamped() {
        let f = RhsSpec::Table {
            t: vec![0.0, 1.0],
            s: vec![0.0, 2.0],
            values: vec![vec![0.0, 2.0], vec![1.0, 3.0]],
        };
        f.validate().unwrap();
        // f = t + s on the square
        assert!((f.eval(0.25, 0.5) - 0.75).abs() < 1e-15);
        assert_eq!(f.eval(-1.0, 10.0), 2.0);
        let bad = RhsSpec::Table {
            t: vec![0.0, 1.0],
            s: vec![0.0],
            values: vec![vec![0.0]],
        };
        assert!(bad.validate().is_err());
    }
}
