use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use bestprox::bpp_solver::{iterate_orbit, solve_bpp as run_bpp, BppError, BppOptions, Hypothesis, MAX_ITER, TOL_BPP};
use bestprox::corpus::{
    build_ex22, build_ex33, build_ex35, build_ex41, build_ex53, reproduce as run_reproduce, CorpusError, CyclicBundle,
    ExampleId, ExampleParams,
};
use bestprox::cyclic_contraction::{
    verify_with_geometry, ContractionError, ContractionOptions, ContractionReport, CyclicMap, GaugeSpec, PairSelection, Violation,
};
use bestprox::fixed_point::{
    check_uniqueness_regime, solve_common_fixed_point, verify_g_psi_contraction, FixedPointError, FixedPointOptions,
    PairMaps, PsiGauge, PsiMode, PsiOptions, TOL_FIXED,
};
use bestprox::formats::{
    map_doc, pair_doc, parse_gauges, parse_instance, parse_map, parse_map_doc, parse_pair, parse_pbvp, with_schema,
    GaugeDoc, InitialDoc, InstanceDoc, Parsed, PbvpDoc, Strictness, SCHEMA,
};
use bestprox::metric_graph::{
    a_is_weakly_connected, check_property_star, has_property_uc, is_g_chebyshev, is_sharp_proximal, pair_distance,
    FiniteMetricGraph, PairGeometry, PointId, Scope,
};
use bestprox::pbvp::{solve_common_pbvp, solve_pbvp as run_pbvp, PbvpError, PbvpOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bestprox::Verdict;

use crate::output::{read, Failure, Success};
use crate::{BppArgs, Common, ExportArgs, FixedPointArgs, Outcome, PbvpArgs, PsiModeArg, ReproduceArgs, VerifyArgs};

const TOL_INEQ_DEFAULT: f64 = 1e-9;

/// Collects unknown-field warnings across the input files of one run.
#[derive(Default)]
struct Loader {
    strictness: Strictness,
    warnings: Vec<String>,
}

impl Loader {
    fn new(common: &Common) -> Self {
        Self {
            strictness: if common.strict { Strictness::Strict } else { Strictness::Warn },
            warnings: Vec::new(),
        }
    }

    fn take<T>(&mut self, path: &Path, parsed: Parsed<T>) -> T {
        self.warnings
            .extend(parsed.warnings.into_iter().map(|w| format!("{}: {w}", path.display())));
        parsed.value
    }

    fn load<T, E: std::fmt::Display>(
        &mut self,
        path: &Path,
        parse: impl FnOnce(&str, Strictness) -> Result<Parsed<T>, E>,
    ) -> Result<T, Failure> {
        let text = read(path)?;
        let parsed = parse(&text, self.strictness).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(self.take(path, parsed))
    }

    fn instance(&mut self, path: &Path) -> Result<FiniteMetricGraph, Failure> {
        self.load(path, parse_instance)
    }

    fn gauges(&mut self, path: &Path) -> Result<GaugeDoc, Failure> {
        self.load(path, parse_gauges)
    }
}

fn tolerance(tol: Option<f64>, default: f64) -> Result<f64, Failure> {
    match tol {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(Failure::Input(format!("--tol must be positive and finite, got {t}"))),
    }
}

fn iterations(max_iter: Option<usize>, default: usize) -> Result<usize, Failure> {
    match max_iter {
        Some(0) => Err(Failure::Input("--max-iter must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

fn point(space: &FiniteMetricGraph, label: &str) -> Result<PointId, Failure> {
    space.id_of(label).map_err(Failure::input)
}

fn label(space: &FiniteMetricGraph, x: PointId) -> Value {
    Value::String(space.label(x).to_string())
}

fn labels<'a>(space: &FiniteMetricGraph, ids: impl IntoIterator<Item = &'a PointId>) -> Vec<Value> {
    ids.into_iter().map(|&x| label(space, x)).collect()
}

fn violation_json(space: &FiniteMetricGraph, v: &Violation) -> Value {
    json!({
        "x": label(space, v.x),
        "y": label(space, v.y),
        "lhs": v.lhs,
        "rhs": v.rhs,
        "excess": v.excess(),
        "kind": v.kind,
    })
}

fn contraction_json(space: &FiniteMetricGraph, r: &ContractionReport) -> Value {
    json!({
        "holds": r.holds,
        "is_contraction": r.is_contraction(),
        "checked_pairs": r.checked_pairs,
        "violations": r.violations.iter().map(|v| violation_json(space, v)).collect::<Vec<_>>(),
        "near_violations": r.near_violations.iter().map(|v| violation_json(space, v)).collect::<Vec<_>>(),
        "t2_edge_witness": r.t2_edge_witness.map(|(x, y)| vec![label(space, x), label(space, y)]),
        "proximal_witness": r.proximal_witness.map(|x| label(space, x)),
    })
}

fn verdict_json<W>(verdict: &Verdict<W>, witness: impl FnOnce(&W) -> Value) -> Value {
    match verdict {
        Verdict::Holds => json!({ "holds": true }),
        Verdict::Fails(w) => json!({ "holds": false, "witness": witness(w) }),
    }
}

fn triple(space: &FiniteMetricGraph, (x, y, z): &(PointId, PointId, PointId)) -> Value {
    json!([label(space, *x), label(space, *y), label(space, *z)])
}

fn hypothesis_json(space: &FiniteMetricGraph, h: &Hypothesis) -> Value {
    let (name, witness) = match h {
        Hypothesis::PropertyUc(w) => (
            "property_uc",
            json!({ "x": label(space, w.x), "u": label(space, w.u), "y": label(space, w.y) }),
        ),
        Hypothesis::PropertyStar(t) => ("property_star", triple(space, t)),
        Hypothesis::SharpProximal(w) => (
            "sharp_proximal",
            json!({ "point": label(space, w.point), "partners": labels(space, &w.partners) }),
        ),
        Hypothesis::SeedNotAdmissible(x) => ("seed_not_admissible", label(space, *x)),
        Hypothesis::Contraction(r) => ("contraction", contraction_json(space, r)),
    };
    json!({ "hypothesis": name, "message": relabel(space, h), "witness": witness })
}

/// The library message refers to ids; keep it but with labels where cheap.
fn relabel(space: &FiniteMetricGraph, h: &Hypothesis) -> String {
    match h {
        Hypothesis::SeedNotAdmissible(x) => format!("seed {} is not in the admissible set", space.label(*x)),
        other => other.to_string(),
    }
}

/// The standing predicates of an instance, with labelled witnesses.
struct Predicates {
    json: Value,
    /// Property UC, transitivity on `A`, sharp proximality.
    standing: bool,
    /// Transitivity on `A ∪ B`.
    star_union: bool,
}

fn predicates(space: &FiniteMetricGraph, geom: &PairGeometry) -> Predicates {
    let sharp = is_sharp_proximal(space, geom);
    let uc = has_property_uc(space, geom);
    let star_a = check_property_star(space, Scope::A);
    let star_union = check_property_star(space, Scope::Union);
    let json = json!({
        "sharp_proximal": verdict_json(&sharp, |w| json!({ "point": label(space, w.point), "partners": labels(space, &w.partners) })),
        "g_chebyshev": verdict_json(&is_g_chebyshev(space, geom), |(x, y)| json!([label(space, *x), label(space, *y)])),
        "property_uc": verdict_json(&uc, |w| json!({ "x": label(space, w.x), "u": label(space, w.u), "y": label(space, w.y) })),
        "property_star_a": verdict_json(&star_a, |t| triple(space, t)),
        "property_star_union": verdict_json(&star_union, |t| triple(space, t)),
        "a_weakly_connected": a_is_weakly_connected(space),
        "uniqueness_regime": check_uniqueness_regime(space),
    });
    Predicates {
        json,
        standing: sharp.holds() && uc.holds() && star_a.holds(),
        star_union: star_union.holds(),
    }
}

fn geometry_json(space: &FiniteMetricGraph, geom: &PairGeometry) -> Value {
    json!({ "d_ab": geom.d_ab, "a0": labels(space, &geom.a0), "b0": labels(space, &geom.b0) })
}

fn exclude_ids(space: &FiniteMetricGraph, exclude: &[String]) -> Result<BTreeSet<PointId>, Failure> {
    exclude.iter().filter(|l| !l.is_empty()).map(|l| point(space, l)).collect()
}

fn cyclic_phis(gauges: &GaugeDoc) -> Result<(GaugeSpec, GaugeSpec), Failure> {
    match (&gauges.phi1, &gauges.phi2) {
        (Some(p1), Some(p2)) => Ok((p1.clone(), p2.clone())),
        _ => Err(Failure::Input("the gauges file needs both `phi1` and `phi2` for a cyclic map".into())),
    }
}

/// Gauge-class failures are reported as violations; anything else is an
/// input problem.
fn contraction_result(
    result: Result<ContractionReport, ContractionError>,
) -> Result<Result<ContractionReport, Value>, Failure> {
    match result {
        Ok(r) => Ok(Ok(r)),
        Err(ContractionError::GaugeClassViolation(w)) => Ok(Err(json!({
            "kind": "gauge_class",
            "message": ContractionError::GaugeClassViolation(w.clone()).to_string(),
            "witness": w,
        }))),
        Err(e) => Err(Failure::input(e)),
    }
}

fn psi_mode(mode: PsiModeArg) -> PsiMode {
    match mode {
        PsiModeArg::Basic => PsiMode::Basic,
        PsiModeArg::Strengthened => PsiMode::Strengthened,
    }
}

fn psi_of(gauges: &GaugeDoc) -> Result<PsiGauge, Failure> {
    gauges
        .psi
        .clone()
        .map(PsiGauge)
        .ok_or_else(|| Failure::Input("the gauges file needs a `psi` entry".into()))
}

fn psi_result(result: Result<ContractionReport, FixedPointError>) -> Result<Result<ContractionReport, Value>, Failure> {
    match result {
        Ok(r) => Ok(Ok(r)),
        Err(e @ FixedPointError::GaugeClassViolation(_)) | Err(e @ FixedPointError::InvalidPsi(_)) => {
            Ok(Err(json!({ "kind": "psi_gauge", "message": e.to_string() })))
        }
        Err(e) => Err(Failure::input(e)),
    }
}

fn witness_doc(command: &str, items: Vec<Value>) -> Value {
    json!({ "schema": SCHEMA, "command": command, "items": items })
}

fn conclude(command: &str, report: Value, items: Vec<Value>, warnings: Vec<String>) -> Outcome {
    if items.is_empty() {
        Ok(Success::json(report, warnings))
    } else {
        Err(Failure::Violation {
            report,
            witness: witness_doc(command, items),
            warnings,
        })
    }
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let mut loader = Loader::new(&args.common);
    let space = loader.instance(&args.instance)?;
    let tol = tolerance(args.tol, TOL_INEQ_DEFAULT)?;
    let geom = pair_distance(&space).map_err(Failure::input)?;
    let gauges = args.gauges.as_deref().map(|p| loader.gauges(p)).transpose()?;
    let map = args.map.as_deref().map(|p| loader.load(p, |t, s| parse_map(t, &space, s))).transpose()?;
    let pair = args.pair.as_deref().map(|p| loader.load(p, |t, s| parse_pair(t, &space, s))).transpose()?;
    let exclude = exclude_ids(&space, &args.exclude)?;
    let preds = predicates(&space, &geom);
    let check = !args.no_check_hypotheses;
    let mut items = Vec::new();
    let mut report = json!({
        "schema": SCHEMA,
        "command": "verify",
        "geometry": geometry_json(&space, &geom),
        "hypotheses": preds.json,
    });

    if let Some(map) = &map {
        let gauges = gauges.as_ref().ok_or_else(|| Failure::Input("--map needs --gauges".into()))?;
        let (phi1, phi2) = cyclic_phis(gauges)?;
        let opts = ContractionOptions {
            selection: if args.all_pairs { PairSelection::AllPairs } else { PairSelection::EdgeEligible },
            tol,
            exclude: exclude.clone(),
            ..ContractionOptions::default()
        };
        match contraction_result(verify_with_geometry(&space, &geom, map, &phi1, &phi2, &opts))? {
            Ok(r) => {
                let ok = r.is_contraction() && (!args.strict_inequality || r.holds_strictly());
                let body = contraction_json(&space, &r);
                if !ok {
                    items.push(json!({ "kind": "g_cyclic_contraction", "selection": opts.selection, "report": body }));
                }
                report["contraction"] = body;
            }
            Err(w) => {
                report["contraction"] = w.clone();
                items.push(w);
            }
        }
    }

    if let Some(pair) = &pair {
        let gauges = gauges.as_ref().ok_or_else(|| Failure::Input("--pair needs --gauges".into()))?;
        let psi = psi_of(gauges)?;
        let opts = PsiOptions {
            mode: psi_mode(args.psi_mode),
            tol,
            ..PsiOptions::default()
        };
        match psi_result(verify_g_psi_contraction(&space, pair, &psi, &opts))? {
            Ok(r) => {
                let ok = r.is_contraction() && (!args.strict_inequality || r.holds_strictly());
                let body = contraction_json(&space, &r);
                if !ok {
                    items.push(json!({ "kind": "g_psi_contraction", "mode": opts.mode, "report": body }));
                }
                report["psi_contraction"] = body;
            }
            Err(w) => {
                report["psi_contraction"] = w.clone();
                items.push(w);
            }
        }
        if check && !preds.star_union {
            items.push(json!({ "kind": "hypothesis", "hypotheses": report["hypotheses"]["property_star_union"] }));
        }
    }
    if check && (map.is_some() || pair.is_none()) && !preds.standing {
        items.push(json!({ "kind": "hypothesis", "hypotheses": report["hypotheses"] }));
    }
    report["verified"] = Value::Bool(items.is_empty());
    report["warnings"] = json!(loader.warnings);
    conclude("verify", report, items, loader.warnings)
}

pub fn solve_bpp(args: &BppArgs) -> Outcome {
    let mut loader = Loader::new(&args.common);
    let space = loader.instance(&args.instance)?;
    let map: CyclicMap = loader.load(&args.map, |t, s| parse_map(t, &space, s))?;
    let x0 = point(&space, &args.x0)?;
    let tol = tolerance(args.tol, TOL_BPP)?;
    let max_iter = iterations(args.max_iter, MAX_ITER)?;
    let check = !args.no_check_hypotheses;
    let mut report = json!({ "schema": SCHEMA, "command": "solve-bpp", "x0": label(&space, x0) });

    if let Some(path) = &args.gauges {
        let gauges = loader.gauges(path)?;
        let (phi1, phi2) = cyclic_phis(&gauges)?;
        let geom = pair_distance(&space).map_err(Failure::input)?;
        let opts = ContractionOptions {
            exclude: exclude_ids(&space, &args.exclude)?,
            ..ContractionOptions::default()
        };
        let verdict = match contraction_result(verify_with_geometry(&space, &geom, &map, &phi1, &phi2, &opts))? {
            Ok(r) if r.is_contraction() => None,
            Ok(r) => Some(json!({ "kind": "g_cyclic_contraction", "report": contraction_json(&space, &r) })),
            Err(w) => Some(w),
        };
        report["contraction_verified"] = Value::Bool(verdict.is_none());
        if let (true, Some(item)) = (check, verdict) {
            return conclude("solve-bpp", report, vec![item], loader.warnings);
        }
    }

    let opts = BppOptions {
        tol,
        max_iter,
        check_hypotheses: check,
        ..BppOptions::default()
    };
    let trace = iterate_orbit(&space, &map, x0, max_iter, tol).map_err(Failure::input)?;
    report["points"] = json!(labels(&space, &trace.points));
    report["gaps"] = json!(trace.gaps);
    report["stop_reason"] = json!(trace.stop_reason);
    report["t2_fixed"] = json!(trace.t2_fixed);
    let item = match run_bpp(&space, &map, x0, &opts) {
        Ok(r) => {
            report["bpp"] = label(&space, r.bpp);
            report["achieved_gap"] = json!(r.achieved_gap);
            report["iterations"] = json!(r.iterations);
            report["component"] = json!(labels(&space, &r.component));
            None
        }
        Err(BppError::HypothesisViolated(h)) => Some(json!({ "kind": "hypothesis", "detail": hypothesis_json(&space, &h) })),
        Err(e @ BppError::NoConvergence { .. }) => Some(json!({ "kind": "no_convergence", "message": e.to_string() })),
        Err(e) => return Err(Failure::input(e)),
    };
    report["warnings"] = json!(loader.warnings);
    conclude("solve-bpp", report, item.into_iter().collect(), loader.warnings)
}

pub fn solve_fixed_point(args: &FixedPointArgs) -> Outcome {
    let mut loader = Loader::new(&args.common);
    let space = loader.instance(&args.instance)?;
    let pair: PairMaps = match (&args.pair, &args.t1, &args.t2) {
        (Some(p), _, _) => loader.load(p, |t, s| parse_pair(t, &space, s))?,
        (None, Some(t1), Some(t2)) => {
            let m1 = loader.load(t1, parse_map_doc)?;
            let m2 = loader.load(t2, parse_map_doc)?;
            PairMaps::from_labels(&space, &m1.map, &m2.map).map_err(Failure::input)?
        }
        _ => return Err(Failure::Input("give --pair, or both --t1 and --t2".into())),
    };
    let psi = psi_of(&loader.gauges(&args.psi)?)?;
    let x0 = point(&space, &args.x0)?;
    let tol = tolerance(args.tol, TOL_FIXED)?;
    let max_iter = iterations(args.max_iter, 10_000)?;
    let check = !args.no_check_hypotheses;
    let mut report = json!({
        "schema": SCHEMA,
        "command": "solve-fixed-point",
        "x0": label(&space, x0),
        "uniqueness_regime": check_uniqueness_regime(&space),
    });

    let psi_opts = PsiOptions {
        mode: psi_mode(args.psi_mode),
        ..PsiOptions::default()
    };
    let verdict = match psi_result(verify_g_psi_contraction(&space, &pair, &psi, &psi_opts))? {
        Ok(r) if r.is_contraction() => None,
        Ok(r) => Some(json!({ "kind": "g_psi_contraction", "mode": psi_opts.mode, "report": contraction_json(&space, &r) })),
        Err(w) => Some(w),
    };
    report["psi_contraction_verified"] = Value::Bool(verdict.is_none());
    if let (true, Some(item)) = (check, verdict) {
        return conclude("solve-fixed-point", report, vec![item], loader.warnings);
    }

    let opts = FixedPointOptions {
        tol,
        max_iter,
        check_hypotheses: check,
    };
    let item = match solve_common_fixed_point(&space, &pair, &psi, x0, &opts) {
        Ok(r) => {
            report["p"] = label(&space, r.p);
            report["residual_t1"] = json!(r.residual_t1);
            report["residual_t2"] = json!(r.residual_t2);
            report["points"] = json!(labels(&space, &r.trace.points));
            report["gaps"] = json!(r.trace.gaps);
            report["apriori"] = json!(r.trace.apriori);
            None
        }
        Err(FixedPointError::HypothesisViolated(h)) => Some(json!({ "kind": "hypothesis", "detail": hypothesis_json(&space, &h) })),
        Err(e @ FixedPointError::NoConvergence { .. }) => Some(json!({ "kind": "no_convergence", "message": e.to_string() })),
        Err(e) => return Err(Failure::input(e)),
    };
    report["warnings"] = json!(loader.warnings);
    conclude("solve-fixed-point", report, item.into_iter().collect(), loader.warnings)
}

/// `const:<value>` or a JSON array.
fn initial_value(spec: &str) -> Result<Value, Failure> {
    if let Some(c) = spec.strip_prefix("const:") {
        let v: f64 = c
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("--w0: `{c}` is not a number")))?;
        return Ok(json!(v));
    }
    serde_json::from_str::<Vec<f64>>(spec)
        .map(|v| json!(v))
        .map_err(|e| Failure::Input(format!("--w0 must be `const:<value>` or a JSON array: {e}")))
}

fn inline_json(flag: &str, text: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("--{flag}: {e}")))
}

fn pbvp_problem(args: &PbvpArgs, loader: &mut Loader) -> Result<PbvpDoc, Failure> {
    let mut doc = match &args.problem {
        Some(p) => inline_json("problem", &read(p)?)?,
        None => json!({ "schema": SCHEMA }),
    };
    let Some(fields) = doc.as_object_mut() else {
        return Err(Failure::Input("the problem file must hold a JSON object".into()));
    };
    if let Some(r) = &args.rhs {
        fields.insert("rhs".into(), inline_json("rhs", r)?);
    }
    if let Some(r) = &args.rhs2 {
        fields.insert("rhs2".into(), inline_json("rhs2", r)?);
    }
    if let Some(h) = &args.h {
        fields.insert("h".into(), inline_json("h", h)?);
    }
    if let Some(a) = args.alpha {
        fields.insert("alpha".into(), json!(a));
    }
    if let Some(t) = args.period {
        fields.insert("period".into(), json!(t));
    }
    if let Some(n) = args.nodes {
        fields.insert("nodes".into(), json!(n));
    }
    if let Some(w) = &args.w0 {
        fields.insert("w0".into(), initial_value(w)?);
    }
    let text = doc.to_string();
    let source = args.problem.as_deref().unwrap_or(Path::new("<flags>"));
    let parsed = parse_pbvp(&text, loader.strictness).map_err(|e| Failure::Input(format!("{}: {e}", source.display())))?;
    Ok(loader.take(source, parsed))
}

fn pbvp_violation(e: PbvpError) -> Result<Value, Failure> {
    match e {
        PbvpError::NotLowerSolution(w) => Ok(json!({ "kind": "not_lower_solution", "witness": w })),
        PbvpError::ConditionIvViolated(w) => Ok(json!({ "kind": "comparison_condition", "witness": w })),
        e @ (PbvpError::BetaNotContractive(_)
        | PbvpError::MonotonicityBroken { .. }
        | PbvpError::NoConvergence { .. }
        | PbvpError::EvaluationFailure { .. }) => Ok(json!({ "kind": "solver", "message": e.to_string() })),
        e => Err(Failure::input(e)),
    }
}

pub fn solve_pbvp(args: &PbvpArgs) -> Outcome {
    let mut loader = Loader::new(&args.common);
    let problem = pbvp_problem(args, &mut loader)?;
    let check = !args.no_check_hypotheses;
    let opts = PbvpOptions {
        tol: tolerance(args.tol, DEFAULT_TOL)?,
        max_iter: iterations(args.max_iter, DEFAULT_MAX_ITER)?,
        check_lower: check,
        check_condition_iv: check,
        check_monotone: check,
        ..PbvpOptions::default()
    };
    let w0 = problem.initial().map_err(Failure::input)?;
    let mut report = json!({ "schema": SCHEMA, "command": "solve-pbvp", "problem": problem });
    let solved = match &problem.rhs2 {
        None => run_pbvp(&problem.rhs, problem.alpha, &problem.h, &w0, &opts).map(|s| (s.u, json!(s.report))),
        Some(rhs2) => {
            solve_common_pbvp(&problem.rhs, rhs2, problem.alpha, &problem.h, &w0, &opts).map(|s| (s.u, json!(s.report)))
        }
    };
    let (u, solver_report) = match solved {
        Ok(v) => v,
        Err(e) => {
            let item = pbvp_violation(e)?;
            report["warnings"] = json!(loader.warnings);
            return conclude("solve-pbvp", report, vec![item], loader.warnings);
        }
    };
    report["report"] = solver_report;
    report["sup_norm"] = json!(u.sup_norm());
    report["warnings"] = json!(loader.warnings);
    let csv = u.to_csv();
    let mut with_solution = report.clone();
    with_solution["solution"] = json!({ "t": u.grid.times(), "u": u.values });
    let csv_out = args
        .common
        .out
        .as_deref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(Success {
        report: if csv_out { report } else { with_solution },
        csv: Some(csv),
        report_path: args.report.clone(),
        warnings: loader.warnings,
    })
}

fn example(id: &str, params: &[String]) -> Result<(ExampleId, ExampleParams), Failure> {
    let id: ExampleId = id.parse().map_err(Failure::input)?;
    let params = ExampleParams::parse(params.iter().map(String::as_str)).map_err(Failure::input)?;
    Ok((id, params))
}

fn corpus_failure(e: CorpusError) -> Failure {
    match e {
        CorpusError::UnknownExample(_) | CorpusError::ParamOutOfRange { .. } | CorpusError::UnknownParam(_) => {
            Failure::input(e)
        }
        other => Failure::Violation {
            report: json!({ "schema": SCHEMA, "command": "reproduce", "pass": false, "error": other.to_string() }),
            witness: witness_doc("reproduce", vec![json!({ "kind": "build", "message": other.to_string() })]),
            warnings: Vec::new(),
        },
    }
}

pub fn reproduce(args: &ReproduceArgs) -> Outcome {
    let (id, params) = example(&args.example, &args.params)?;
    let report = run_reproduce(id, &params).map_err(corpus_failure)?;
    let failing: Vec<Value> = report
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| json!({ "kind": "check", "check": c }))
        .collect();
    let mut body = with_schema(&report);
    body["command"] = json!("reproduce");
    conclude("reproduce", body, failing, Vec::new())
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<String, Failure> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(name.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(Failure::input)
}

fn export_cyclic(dir: &Path, b: &CyclicBundle) -> Result<Value, Failure> {
    let files = vec![
        write_json(dir, "instance.json", &to_value(&InstanceDoc::from_space(&b.space))?)?,
        write_json(dir, "map.json", &to_value(&map_doc(&b.space, &b.map))?)?,
        write_json(
            dir,
            "gauges.json",
            &to_value(&GaugeDoc {
                schema: SCHEMA.into(),
                phi1: Some(b.phi1.clone()),
                phi2: Some(b.phi2.clone()),
                psi: None,
            })?,
        )?,
    ];
    Ok(json!({ "files": files, "exclude": labels(&b.space, &b.truncation_boundary) }))
}

pub fn export(args: &ExportArgs) -> Outcome {
    let (id, params) = example(&args.example, &args.params)?;
    let dir = args.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    let build = |e: CorpusError| corpus_failure(e);
    let mut manifest = match id {
        ExampleId::Ex22Kappa => export_cyclic(dir, &build_ex22(&params).map_err(build)?.bundle)?,
        ExampleId::Ex33DyadicL1 => export_cyclic(dir, &build_ex33(&params).map_err(build)?.bundle)?,
        ExampleId::Ex35NotBpo => export_cyclic(dir, &build_ex35(&params).map_err(build)?.bundle)?,
        ExampleId::Ex41FixedPoint => {
            let b = build_ex41(&params).map_err(build)?.bundle;
            let files = vec![
                write_json(dir, "instance.json", &to_value(&InstanceDoc::from_space(&b.space))?)?,
                write_json(dir, "pair.json", &to_value(&pair_doc(&b.space, &b.pair))?)?,
                write_json(
                    dir,
                    "gauges.json",
                    &to_value(&GaugeDoc {
                        schema: SCHEMA.into(),
                        phi1: None,
                        phi2: None,
                        psi: Some(b.psi.0.clone()),
                    })?,
                )?,
            ];
            json!({ "files": files, "seed": label(&b.space, b.seed) })
        }
        ExampleId::Ex53Pbvp => {
            let ex = build_ex53(&params).map_err(build)?;
            let grid = ex.w0.grid;
            let doc = PbvpDoc {
                schema: SCHEMA.into(),
                rhs: ex.rhs.clone(),
                rhs2: None,
                alpha: ex.alpha,
                h: ex.h.clone(),
                period: grid.period,
                nodes: grid.nodes,
                w0: InitialDoc::Values(ex.w0.values.clone()),
            };
            json!({ "files": [write_json(dir, "problem.json", &to_value(&doc)?)?] })
        }
    };
    manifest["schema"] = json!(SCHEMA);
    manifest["command"] = json!("export");
    manifest["example"] = json!(id);
    manifest["params"] = to_value(&params)?;
    Ok(Success::json(manifest, Vec::new()))
}
