use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ContractionError;
use crate::Verdict;

/// Snap radius used before computing `κ` so that `z = 1/n` entered in
/// floating point lands on the boundary case.
pub const KAPPA_SNAP: f64 = 1e-12;

/// `κ_z = n + 1` where `1/(n+1) ≤ z < 1/n`, for `0 < z < 1`.
pub fn kappa(z: f64) -> Result<u64, ContractionError> {
    if !(z > 0.0 && z < 1.0) {
        return Err(ContractionError::OutOfDomain(z));
    }
    let inv = 1.0 / z;
    let nearest = inv.round();
    if (z - 1.0 / nearest).abs() <= KAPPA_SNAP {
        // z = 1/k exactly: 1/k ≤ z < 1/(k-1) gives κ = k
        return Ok(nearest as u64);
    }
    Ok(inv.ceil() as u64)
}

/// [`kappa`] extended to `[0, 1]` with `κ_0 = 0` and `κ_1 = 1`.
pub fn kappa_total(z: f64) -> Result<u64, ContractionError> {
    if z == 0.0 {
        Ok(0)
    } else if z == 1.0 {
        Ok(1)
    } else {
        kappa(z)
    }
}

/// Monotonicity class a gauge is meant to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneClass {
    /// Strictly increasing (the `φ₁` role).
    Increasing,
    /// `s ↦ φ(s) − s` non-decreasing (the `φ₂` role).
    NondecreasingMinusIdentity,
    /// Non-decreasing with values in `[0, 1)` (the `ψ` role).
    IntoUnitInterval,
}

/// A named scalar gauge on `[0, ∞)`.
///
/// JSON form: `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGauge", into = "RawGauge")]
pub enum GaugeSpec {
    /// `c · s`
    Linear { c: f64 },
    /// `c + s`
    AffineShift { c: f64 },
    /// `⌊s⌋ + {s} / κ_{s}` with `{s} = 0` mapping to `⌊s⌋`.
    FloorFraction,
    Identity,
    /// Constant `c`; useful as a `ψ` gauge.
    Constant { c: f64 },
    /// Piecewise-linear interpolant through `(s, value)` knots sorted by
    /// `s`, continued linearly past both end segments.
    Table { knots: Vec<(f64, f64)> },
    /// The `ψ` induced by an increasing `φ` through
    /// `t (1 − ψ(t)) = φ(t) − φ(d_ab)` on `t > d_ab`, extended constantly by
    /// its right limit at `d_ab` below that.
    Induced { phi: Box<GaugeSpec>, d_ab: f64 },
}

impl GaugeSpec {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            GaugeSpec::Linear { c } => c * s,
            GaugeSpec::AffineShift { c } => c + s,
            GaugeSpec::FloorFraction => {
                let whole = s.floor();
                let frac = s - whole;
                if frac == 0.0 {
                    whole
                } else {
                    // frac ∈ (0, 1) here, so kappa cannot fail
                    whole + frac / kappa(frac).unwrap_or(1) as f64
                }
            }
            GaugeSpec::Identity => s,
            GaugeSpec::Constant { c } => *c,
            GaugeSpec::Table { knots } => interpolate(knots, s),
            GaugeSpec::Induced { phi, d_ab } => {
                let h = 1e-9 * d_ab.max(1.0);
                let t = s.max(d_ab + h);
                1.0 - (phi.eval(t) - phi.eval(*d_ab)) / t
            }
        }
    }

    /// The class the gauge naturally belongs to, if any.
    pub fn natural_class(&self) -> Option<MonotoneClass> {
        match self {
            GaugeSpec::Linear { c } if *c > 0.0 => Some(MonotoneClass::Increasing),
            GaugeSpec::FloorFraction | GaugeSpec::Identity => Some(MonotoneClass::Increasing),
            GaugeSpec::AffineShift { .. } => Some(MonotoneClass::NondecreasingMinusIdentity),
            GaugeSpec::Constant { c } if (0.0..1.0).contains(c) => Some(MonotoneClass::IntoUnitInterval),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GaugeSpec::Linear { .. } => "linear",
            GaugeSpec::AffineShift { .. } => "affine_shift",
            GaugeSpec::FloorFraction => "floor_fraction",
            GaugeSpec::Identity => "identity",
            GaugeSpec::Constant { .. } => "constant",
            GaugeSpec::Table { .. } => "table",
            GaugeSpec::Induced { .. } => "induced",
        }
    }
}

fn interpolate(knots: &[(f64, f64)], s: f64) -> f64 {
    match knots {
        [] => 0.0,
        [(_, v)] => *v,
        _ => {
            let seg = knots
                .windows(2)
                .position(|w| s <= w[1].0)
                .unwrap_or(knots.len() - 2);
            let (s0, v0) = knots[seg];
            let (s1, v1) = knots[seg + 1];
            v0 + (v1 - v0) * (s - s0) / (s1 - s0)
        }
    }
}

/// Which gauge of a pair failed its class check, and the adjacent grid
/// samples that show it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeWitness {
    pub gauge: usize,
    pub class: MonotoneClass,
    pub s_lo: f64,
    pub s_hi: f64,
    pub value_lo: f64,
    pub value_hi: f64,
}

/// Checks one gauge against a class on consecutive samples of an ascending
/// grid.
pub fn check_class(g: &GaugeSpec, class: MonotoneClass, grid: &[f64]) -> Option<GaugeWitness> {
    let witness = |i: usize, lo: f64, hi: f64| GaugeWitness {
        gauge: 0,
        class,
        s_lo: grid[i],
        s_hi: grid[i + 1],
        value_lo: lo,
        value_hi: hi,
    };
    if class == MonotoneClass::IntoUnitInterval {
        if let Some(i) = grid.iter().position(|&s| !(0.0..1.0).contains(&g.eval(s))) {
            let v = g.eval(grid[i]);
            return Some(GaugeWitness {
                gauge: 0,
                class,
                s_lo: grid[i],
                s_hi: grid[i],
                value_lo: v,
                value_hi: v,
            });
        }
    }
    for i in 0..grid.len().saturating_sub(1) {
        let (s0, s1) = (grid[i], grid[i + 1]);
        if s1 <= s0 {
            continue;
        }
        let (v0, v1) = (g.eval(s0), g.eval(s1));
        let ok = match class {
            MonotoneClass::Increasing => v1 > v0,
            MonotoneClass::NondecreasingMinusIdentity => (v1 - s1) >= (v0 - s0) - 1e-12,
            MonotoneClass::IntoUnitInterval => v1 >= v0 - 1e-12,
        };
        if !ok {
            return Some(witness(i, v0, v1));
        }
    }
    None
}

/// `φ₁` strictly increasing and `φ₂ − I` non-decreasing on the grid.
pub fn verify_gauge_classes(g1: &GaugeSpec, g2: &GaugeSpec, grid: &[f64]) -> Verdict<GaugeWitness> {
    let first = check_class(g1, MonotoneClass::Increasing, grid).map(|w| GaugeWitness { gauge: 1, ..w });
    let second = || {
        check_class(g2, MonotoneClass::NondecreasingMinusIdentity, grid).map(|w| GaugeWitness { gauge: 2, ..w })
    };
    Verdict::from_witness(first.or_else(second))
}

#[derive(Serialize, Deserialize)]
struct RawGauge {
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
}

fn param(params: &Map<String, Value>, key: &str) -> Result<f64, String> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("gauge parameter `{key}` missing or not a number"))
}

impl TryFrom<RawGauge> for GaugeSpec {
    type Error = String;

    fn try_from(raw: RawGauge) -> Result<Self, Self::Error> {
        let p = &raw.params;
        Ok(match raw.kind.as_str() {
            "linear" => GaugeSpec::Linear { c: param(p, "c")? },
            "affine_shift" => GaugeSpec::AffineShift {
                c: p.get("c").and_then(Value::as_f64).unwrap_or(0.0),
            },
            "floor_fraction" => GaugeSpec::FloorFraction,
            "identity" => GaugeSpec::Identity,
            "constant" => GaugeSpec::Constant { c: param(p, "c")? },
            "table" => {
                let knots: Vec<(f64, f64)> = serde_json::from_value(
                    p.get("knots").cloned().ok_or("gauge parameter `knots` missing")?,
                )
                .map_err(|e| format!("bad knots: {e}"))?;
                if knots.len() < 2 {
                    return Err("table gauge needs at least two knots".into());
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err("table knots must be strictly increasing in s".into());
                }
                GaugeSpec::Table { knots }
            }
            "induced" => GaugeSpec::Induced {
                phi: Box::new(
                    serde_json::from_value(p.get("phi").cloned().ok_or("gauge parameter `phi` missing")?)
                        .map_err(|e| format!("bad phi: {e}"))?,
                ),
                d_ab: param(p, "d_ab")?,
            },
            other => return Err(format!("unknown gauge kind `{other}`")),
        })
    }
}

impl From<GaugeSpec> for RawGauge {
    fn from(g: GaugeSpec) -> Self {
        let kind = g.kind_name().to_string();
        let mut params = Map::new();
        match g {
            GaugeSpec::Linear { c } | GaugeSpec::AffineShift { c } | GaugeSpec::Constant { c } => {
                params.insert("c".into(), c.into());
            }
            GaugeSpec::Table { knots } => {
                params.insert("knots".into(), serde_json::to_value(knots).unwrap_or(Value::Null));
            }
            GaugeSpec::Induced { phi, d_ab } => {
                params.insert("phi".into(), serde_json::to_value(*phi).unwrap_or(Value::Null));
                params.insert("d_ab".into(), d_ab.into());
            }
            GaugeSpec::FloorFraction | GaugeSpec::Identity => {}
        }
        RawGauge { kind, params }
    }
}
