//! The subcommands, each producing a [`Report`] and possibly a deferred failure.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Map, Value};
use treeiso_core::asymptotics::{self as asy, AsymptoticsConfig, Family};
use treeiso_core::enumerate::{enumerate_polya, Ceilings, PolyaRecord};
use treeiso_core::model::DegreeModel;
use treeiso_core::oracles::{catalan, plane_decay_table, Oracle};
use treeiso_core::samplers::CiMethod;
use treeiso_core::{Real, TruncSeries};

use crate::args::{render_rational, ModelSpec};
use crate::cache;
use crate::failure::{Failure, Outcome};
use crate::mc;
use crate::report::{Format, Report, Table};

/// A finished command: its report, and a failure to signal after the report is written.
#[derive(Debug)]
pub struct Done {
    pub report: Report,
    pub breach: Option<Failure>,
}

impl Done {
    fn ok(report: Report) -> Self {
        Done { report, breach: None }
    }
}

/// Fully resolved settings of a run; unused fields are `null`.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub command: String,
    pub model: Option<ModelSpec>,
    pub n: Option<Vec<usize>>,
    pub order: Option<usize>,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub format: Format,
    pub output: Option<String>,
    pub ceilings: Option<CeilingsView>,
    #[serde(flatten)]
    pub options: Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str, format: Format, output: Option<&Path>) -> Self {
        RunConfig {
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            model: None,
            n: None,
            order: None,
            precision: None,
            seed: None,
            workers: None,
            format,
            output: output.map(|p| p.display().to_string()),
            ceilings: None,
            options: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.options.insert(key.into(), serde_json::to_value(v).expect("plain value"));
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CeilingsView {
    pub unrestricted: usize,
    pub restricted: usize,
}

impl From<Ceilings> for CeilingsView {
    fn from(c: Ceilings) -> Self {
        CeilingsView { unrestricted: c.unrestricted, restricted: c.restricted }
    }
}

fn quantity(model: &DegreeModel) -> &'static str {
    match model {
        DegreeModel::Finite { .. } => "g_n",
        DegreeModel::Unbounded(treeiso_core::model::UnboundedWeights::Ones) => "q_n",
        DegreeModel::Unbounded(_) => "p_n",
    }
}

fn exact_probability(o: &Oracle, n: usize) -> Outcome<Option<BigRational>> {
    let m = o.model();
    if !m.size_reachable(n) {
        return Ok(None);
    }
    Ok(Some(match m {
        DegreeModel::Finite { .. } => o.p_gw(n)?,
        DegreeModel::Unbounded(treeiso_core::model::UnboundedWeights::Ones) => o.q_plane(n)?,
        DegreeModel::Unbounded(_) => o.p_labeled(n)?,
    }))
}

fn record_json(r: &PolyaRecord) -> Vec<Value> {
    vec![
        json!(r.code.to_hex()),
        json!(r.n),
        json!(r.aut.to_string()),
        json!(r.pr.to_string()),
        json!(r.weight.numer().to_string()),
        json!(r.weight.denom().to_string()),
    ]
}

pub const RECORD_COLUMNS: [&str; 6] = ["code_hex", "n", "aut", "pr", "weight_num", "weight_den"];

/// Exact `p_n`, `g_n` or `q_n` for every size in `ns`.
pub fn exact(mut cfg: RunConfig, spec: &ModelSpec, ns: &[usize], ceilings: Ceilings, digits: usize, dump: bool) -> Outcome<Done> {
    if dump && cfg.format == Format::Csv {
        return Err(Failure::invalid("--dump-classes needs json or jsonl output"));
    }
    let max_n = *ns.iter().max().expect("non-empty range");
    let oracle = Oracle::new(&spec.model, max_n, &ceilings)?;
    cfg.model = Some(spec.clone());
    cfg.n = Some(ns.to_vec());
    cfg.ceilings = Some(ceilings.into());
    cfg.set("digits", digits);
    cfg.set("dump_classes", dump);
    let mut t = Table::new(&["n", "quantity", "value", "decimal", "classes"]);
    let mut classes = Vec::new();
    for &n in ns {
        let p = exact_probability(&oracle, n)?;
        t.push(vec![
            json!(n),
            json!(quantity(&spec.model)),
            p.as_ref().map_or(Value::Null, |q| json!(q.to_string())),
            p.as_ref().map_or(Value::Null, |q| json!(render_rational(q, digits))),
            json!(oracle.class_count(n)?),
        ]);
        if dump {
            let mut err = None;
            oracle.for_each(n, &mut |v| match PolyaRecord::from_view(oracle.table(), v, &spec.model) {
                Ok(r) => classes.push(Value::Object(
                    RECORD_COLUMNS.iter().map(|c| c.to_string()).zip(record_json(&r)).collect(),
                )),
                Err(e) => err = Some(e),
            })?;
            if let Some(e) = err {
                return Err(e.into());
            }
        }
    }
    let mut report = Report::new(cfg, t)?;
    if dump {
        report.extra.insert("classes".into(), Value::Array(classes));
    }
    Ok(Done::ok(report))
}

/// Coefficients of `P(x,t)` (family `polya`) or `P_D(x,t)`, with an oracle check for small sizes.
#[allow(clippy::too_many_arguments)]
pub fn series(
    mut cfg: RunConfig,
    family: &str,
    spec: Option<&ModelSpec>,
    t: &BigRational,
    order: usize,
    precision: usize,
    digits: usize,
    oracle_max: usize,
    ceilings: Ceilings,
) -> Outcome<Done> {
    if order == 0 {
        return Err(Failure::invalid("order must be at least 1"));
    }
    let model = match spec {
        None => DegreeModel::labeled(),
        Some(s) if s.model.is_finite() => s.model.clone(),
        Some(_) => return Err(Failure::invalid("degree families need a finite degree set")),
    };
    cfg.model = spec.cloned();
    cfg.order = Some(order);
    cfg.ceilings = Some(ceilings.into());
    cfg.set("family", family);
    cfg.set("t", t.to_string());
    cfg.set("digits", digits);
    cfg.set("oracle_max", oracle_max);
    let exact_mode = t.is_integer();
    cfg.precision = if exact_mode { None } else { Some(precision) };
    let coeffs: Vec<(Value, Value)> = if exact_mode {
        let s = if spec.is_none() { Family::polya(t.clone(), order).series()?.clone() } else { Family::degree(&model, t.clone(), order)?.series()?.clone() };
        (1..=order).map(|k| (json!(s.coeff(k).to_string()), json!(render_rational(&s.coeff(k), digits)))).collect()
    } else {
        let tr = Real::from_ratio(t, precision);
        let s: TruncSeries<Real> = if spec.is_none() { Family::polya(tr, order).series()?.clone() } else { Family::degree(&model, tr, order)?.series()?.clone() };
        (1..=order)
            .map(|k| {
                let d = s.coeff(k).to_decimal(digits);
                (json!(d.clone()), json!(d))
            })
            .collect()
    };
    // Integer t with an enumeration route: Σ_P |Aut P|^{-t}, or Σ_P W(P)^t for t ≤ 2.
    let check_t = t.to_u32().filter(|&v| exact_mode && !t.is_negative() && (spec.is_none() || v <= 2));
    let check_to = order.min(oracle_max).min(ceilings.for_model(&model));
    let oracle = match check_t {
        Some(_) if check_to >= 1 => Some(Oracle::new(&model, check_to, &ceilings)?),
        _ => None,
    };
    cfg.set("oracle_checked_through", if oracle.is_some() { check_to } else { 0 });
    let mut t_out = Table::new(&["n", "coefficient", "decimal", "oracle", "agrees"]);
    let mut mismatches = Vec::new();
    for (k, (c, d)) in (1..=order).zip(coeffs) {
        let mut o_val = Value::Null;
        let mut agrees = Value::Null;
        if let (Some(o), Some(tv)) = (&oracle, check_t) {
            if k <= check_to {
                let want = oracle_coefficient(o, k, tv, spec.is_none())?;
                let ok = c == json!(want.to_string());
                if !ok {
                    mismatches.push(k);
                }
                o_val = json!(want.to_string());
                agrees = json!(ok);
            }
        }
        t_out.push(vec![json!(k), c, d, o_val, agrees]);
    }
    let report = Report::new(cfg, t_out)?;
    let breach = (!mismatches.is_empty()).then(|| Failure::tolerance(format!("series differs from enumeration at n = {mismatches:?}")));
    Ok(Done { report, breach })
}

fn oracle_coefficient(o: &Oracle, n: usize, t: u32, polya: bool) -> Outcome<BigRational> {
    if polya {
        return Ok(o.aut_power_sum(n, t)?);
    }
    if !o.model().size_reachable(n) {
        return Ok(BigRational::zero());
    }
    Ok(match t {
        0 => BigRational::from_integer(BigInt::from(o.class_count(n)?)),
        1 => o.weight_sums(n)?.0,
        _ => o.weight_sums(n)?.1,
    })
}

/// Monte Carlo collision estimates with an exact comparison where enumeration is cheap.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    mut cfg: RunConfig,
    spec: &ModelSpec,
    ns: &[usize],
    samples: u64,
    seed: u64,
    workers: usize,
    method: CiMethod,
    strict: bool,
    exact_max: usize,
    ceilings: Ceilings,
) -> Outcome<Done> {
    if samples == 0 {
        return Err(Failure::invalid("samples must be at least 1"));
    }
    let pool = mc::pool(workers)?;
    cfg.model = Some(spec.clone());
    cfg.n = Some(ns.to_vec());
    cfg.seed = Some(seed);
    cfg.workers = Some(pool.current_num_threads());
    cfg.ceilings = Some(ceilings.into());
    cfg.set("samples", samples);
    cfg.set("ci", if method == CiMethod::Wilson { "wilson" } else { "normal" });
    cfg.set("strict", strict);
    cfg.set("exact_max", exact_max);
    let model = mc::mc_model(&spec.model);
    let exact_to = ns.iter().copied().filter(|&n| n <= exact_max.min(ceilings.for_model(&spec.model))).max();
    let oracle = match exact_to {
        Some(m) => Some(Oracle::new(&spec.model, m, &ceilings)?),
        None => None,
    };
    let mut t = Table::new(&[
        "n", "model", "estimate", "ci_low", "ci_high", "samples", "seed", "hits", "method", "exact", "covered",
    ]);
    let mut missed = Vec::new();
    for &n in ns {
        let est = pool.install(|| mc::estimate(n, &model, samples, seed, method))?;
        let exact = match &oracle {
            Some(o) if n <= o.max_n() => exact_probability(o, n)?,
            _ => None,
        };
        let covered = exact.as_ref().map(|q| est.contains(treeiso_core::series::ratio_to_f64(q)));
        if covered == Some(false) {
            missed.push(n);
        }
        t.push(vec![
            json!(n),
            json!(spec.name),
            json!(est.estimate),
            json!(est.ci_low),
            json!(est.ci_high),
            json!(est.samples),
            json!(seed),
            json!(est.hits),
            json!(if est.method == CiMethod::Wilson { "wilson" } else { "normal" }),
            exact.as_ref().map_or(Value::Null, |q| json!(q.to_string())),
            covered.map_or(Value::Null, |c| json!(c)),
        ]);
    }
    let report = Report::new(cfg, t)?;
    let breach = (strict && !missed.is_empty())
        .then(|| Failure::tolerance(format!("exact value outside the interval at n = {missed:?}")));
    Ok(Done { report, breach })
}

/// A computed constant and, when the literature gives one, its reference value.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: String,
    pub value: f64,
    pub target: Option<(f64, f64)>,
}

impl Constant {
    fn plain(name: &str, value: f64) -> Self {
        Constant { name: name.into(), value, target: None }
    }

    fn checked(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Constant { name: name.into(), value, target: Some((target, tol)) }
    }

    pub fn deviation(&self) -> Option<f64> {
        self.target.map(|(t, _)| (self.value - t).abs())
    }

    pub fn ok(&self) -> Option<bool> {
        self.target.map(|(t, tol)| (self.value - t).abs() <= tol)
    }
}

/// Reference values and absolute tolerances enforced by `asym`.
pub mod targets {
    pub const A: (f64, f64) = (2.397678, 1e-4);
    pub const C_L: (f64, f64) = (0.354379, 1e-5);
    pub const UB_C: (f64, f64) = (1.279101, 1e-4);
    pub const UB_DELTA: (f64, f64) = (0.412681, 1e-5);
    pub const UB_RADIUS: (f64, f64) = (1.0 / 3.0, 1e-10);
    pub const LEAF_MU: (f64, f64) = (0.340252, 1e-4);
    pub const LEAF_BASELINE_TOL: f64 = 1e-6;
    pub const BINARY121_MU: (f64, f64) = (0.444518, 1e-4);
    pub const BINARY121_SIGMA2: (f64, f64) = (0.072413, 1e-3);
    pub const UB_MU: (f64, f64) = (0.176278, 1e-4);
    pub const UB_SIGMA2: (f64, f64) = (0.025865, 1e-3);
    pub const AUT_MU: (f64, f64) = (0.137342, 1e-3);
    pub const AUT_SIGMA2: (f64, f64) = (0.196770, 1e-3);
}

fn with_target(name: &str, value: f64, t: Option<(f64, f64)>) -> Constant {
    match t {
        Some((v, tol)) => Constant::checked(name, value, v, tol),
        None => Constant::plain(name, value),
    }
}

/// Constants of one `--which` group, plus diagnostics.
pub fn constants(which: &str, model: Option<&DegreeModel>, degrees: &[usize], cfg: &AsymptoticsConfig) -> Outcome<(Vec<Constant>, Map<String, Value>)> {
    use targets::*;
    let mut diag = Map::new();
    let mut out = Vec::new();
    match which {
        "labeled" => {
            let est = asy::estimate_alpha(cfg)?;
            let l = asy::labeled_constants(cfg)?;
            let sp = asy::labeled_singular_point(cfg)?;
            let two_pi_k = 2.0 * std::f64::consts::PI * sp.coefficient_constant().to_f64();
            out.push(Constant::checked("A", l.a, A.0, A.1));
            out.push(Constant::checked("c_l", l.c_l, C_L.0, C_L.1));
            out.push(Constant::plain("alpha", l.alpha.to_f64()));
            diag.insert("alpha_residual".into(), json!(est.residual));
            diag.insert("alpha_bracket".into(), json!([est.bracket.0, est.bracket.1]));
            diag.insert("xi_prime".into(), json!(l.xi_prime));
            diag.insert("A_from_bivariate_system".into(), json!(two_pi_k));
            diag.insert("singular_residual".into(), json!(sp.residual));
        }
        "ub" | "collision" => {
            let m = if which == "ub" { DegreeModel::unary_binary() } else { model.cloned().ok_or_else(|| Failure::invalid("--which collision needs a finite --model"))? };
            let is_ub = m == DegreeModel::unary_binary();
            let c = asy::collision_constants(&m, cfg)?;
            out.push(with_target("C", c.c, is_ub.then_some(UB_C)));
            out.push(with_target("delta", c.delta, is_ub.then_some(UB_DELTA)));
            out.push(with_target("x0_t1", c.t1.x0.to_f64(), is_ub.then_some(UB_RADIUS)));
            out.push(Constant::plain("x0_t2", c.t2.x0.to_f64()));
            diag.insert("model".into(), json!(m.signature()));
            diag.insert("K_t1".into(), json!(c.k1));
            diag.insert("K_t2".into(), json!(c.k2));
            diag.insert("residual_t1".into(), json!(c.t1.residual));
            diag.insert("residual_t2".into(), json!(c.t2.residual));
            diag.insert("F_x_t2".into(), json!(c.t2.f_x.to_f64()));
            diag.insert("F_yy_t2".into(), json!(c.t2.f_yy.to_f64()));
        }
        "leaf" => {
            out.push(Constant::checked("mu_leaf", asy::leaf_mean_constant(cfg)?, LEAF_MU.0, LEAF_MU.1));
            out.push(Constant::checked("mu_leaf_baseline", asy::leaf_mean_baseline(cfg)?, (-1.0f64).exp(), LEAF_BASELINE_TOL));
        }
        "logweight" => {
            let m = model.ok_or_else(|| Failure::invalid("--which logweight needs a finite --model"))?;
            let (tm, ts) = if *m == DegreeModel::binary121() {
                (Some(BINARY121_MU), Some(BINARY121_SIGMA2))
            } else if *m == DegreeModel::unary_binary() {
                (Some(UB_MU), Some(UB_SIGMA2))
            } else {
                (None, None)
            };
            let c = asy::logweight_clt_constants(m, cfg)?;
            out.push(with_target("mu", c.mu, tm));
            out.push(with_target("sigma2", c.sigma2, ts));
            diag.insert("model".into(), json!(m.signature()));
            clt_diag(&mut diag, &c);
        }
        "aut" => {
            let a = asy::aut_clt_constants(cfg)?;
            out.push(Constant::checked("mu", a.clt.mu, AUT_MU.0, AUT_MU.1));
            out.push(Constant::checked("sigma2", a.clt.sigma2, AUT_SIGMA2.0, AUT_SIGMA2.1));
            out.push(Constant::plain("rho", a.rho));
            out.push(Constant::plain("labelings_linear", a.labelings_linear));
            clt_diag(&mut diag, &a.clt);
        }
        "degree" => {
            let d = asy::degree_clt_constants(degrees, cfg)?;
            for (i, &k) in d.degrees.iter().enumerate() {
                out.push(Constant::plain(&format!("mean_{k}"), d.means[i]));
            }
            for (i, &a) in d.degrees.iter().enumerate() {
                for (j, &b) in d.degrees.iter().enumerate().skip(i) {
                    out.push(Constant::plain(&format!("cov_{a}_{b}"), d.covariance[i][j]));
                }
            }
            diag.insert("means_finite_difference".into(), json!(d.means_fd));
            diag.insert("step".into(), json!(d.step));
            diag.insert("drift".into(), json!(d.drift));
        }
        other => return Err(Failure::invalid(format!("unknown constant group {other:?}"))),
    }
    Ok((out, diag))
}

fn clt_diag(diag: &mut Map<String, Value>, c: &asy::CltConstants) {
    diag.insert("step".into(), json!(c.step));
    diag.insert("mu_by_step".into(), json!([c.mu_steps.0, c.mu_steps.1]));
    diag.insert("sigma2_by_step".into(), json!([c.sigma2_steps.0, c.sigma2_steps.1]));
    diag.insert("mu_drift".into(), json!(c.mu_drift));
    diag.insert("sigma2_drift".into(), json!(c.sigma2_drift));
}

pub const ASYM_GROUPS: [&str; 6] = ["labeled", "ub", "leaf", "logweight", "aut", "degree"];

/// Constants with targets, diagnostics and an optional truncation-doubling check.
pub fn asym(
    mut cfg: RunConfig,
    which: &str,
    spec: Option<&ModelSpec>,
    degrees: &[usize],
    acfg: &AsymptoticsConfig,
    check_truncation: bool,
) -> Outcome<Done> {
    cfg.model = spec.cloned();
    cfg.order = Some(acfg.order);
    cfg.precision = Some(acfg.precision);
    cfg.set("which", which);
    cfg.set("nested_degree", acfg.nested_degree);
    cfg.set("fd_step", acfg.fd_step);
    cfg.set("tolerance", acfg.tolerance);
    cfg.set("alpha_bracket", [acfg.alpha_bracket.0, acfg.alpha_bracket.1]);
    cfg.set("marks", degrees);
    cfg.set("check_truncation", check_truncation);
    let jobs: Vec<(String, Option<DegreeModel>)> = if which == "all" {
        vec![
            ("labeled".into(), None),
            ("ub".into(), None),
            ("leaf".into(), None),
            ("logweight".into(), Some(DegreeModel::binary121())),
            ("logweight".into(), Some(DegreeModel::unary_binary())),
            ("aut".into(), None),
        ]
    } else {
        vec![(which.to_string(), spec.map(|s| s.model.clone()))]
    };
    let mut t = Table::new(&["group", "name", "value", "target", "tolerance", "deviation", "ok"]);
    let mut diags = Map::new();
    let mut truncation = Vec::new();
    let mut breaches = Vec::new();
    for (group, model) in &jobs {
        let label = match model {
            Some(m) if group != "ub" => format!("{group}[{}]", m.signature()),
            _ => group.clone(),
        };
        let (consts, diag) = constants(group, model.as_ref(), degrees, acfg)?;
        if check_truncation {
            let (doubled, _) = constants(group, model.as_ref(), degrees, &acfg.doubled())?;
            for (a, b) in consts.iter().zip(&doubled) {
                let change = if b.value == 0.0 { (a.value - b.value).abs() } else { ((a.value - b.value) / b.value).abs() };
                let ok = change < asy::MAX_TRUNCATION_CHANGE;
                if !ok {
                    breaches.push(format!("{label}.{} truncation change {change:e}", a.name));
                }
                truncation.push(json!({"group": label, "name": a.name, "value": a.value, "doubled": b.value, "change": change, "ok": ok}));
            }
        }
        for c in &consts {
            if c.ok() == Some(false) {
                breaches.push(format!("{label}.{} = {} deviates by {:e}", c.name, c.value, c.deviation().unwrap_or(0.0)));
            }
            t.push(vec![
                json!(label),
                json!(c.name),
                json!(c.value),
                c.target.map_or(Value::Null, |x| json!(x.0)),
                c.target.map_or(Value::Null, |x| json!(x.1)),
                c.deviation().map_or(Value::Null, |x| json!(x)),
                c.ok().map_or(Value::Null, |x| json!(x)),
            ]);
        }
        diags.insert(label, Value::Object(diag));
    }
    let mut report = Report::new(cfg, t)?;
    report.extra.insert("diagnostics".into(), Value::Object(diags));
    if check_truncation {
        report.extra.insert("truncation".into(), Value::Array(truncation));
    }
    let breach = (!breaches.is_empty()).then(|| Failure::tolerance(breaches.join("; ")));
    Ok(Done { report, breach })
}

/// Exact plane-tree collision table with its per-size exponential rate.
pub fn plane_decay(mut cfg: RunConfig, n_max: usize, ceilings: Ceilings, digits: usize) -> Outcome<Done> {
    if n_max == 0 {
        return Err(Failure::invalid("--n-max must be at least 1"));
    }
    let rows = plane_decay_table(n_max, &ceilings)?;
    cfg.n = Some((1..=n_max).collect());
    cfg.ceilings = Some(ceilings.into());
    cfg.set("digits", digits);
    let mut t = Table::new(&["n", "plane_trees", "q", "q_decimal", "rate"]);
    for r in &rows {
        t.push(vec![
            json!(r.n),
            json!(catalan(r.n - 1).to_string()),
            json!(r.q.to_string()),
            json!(render_rational(&r.q, digits)),
            json!(format!("{:.*}", digits, r.rate)),
        ]);
    }
    let window: Vec<f64> = rows.iter().filter(|r| r.n >= 4).map(|r| r.rate).collect();
    let decreasing = window.windows(2).all(|w| w[1] < w[0]);
    let mut report = Report::new(cfg, t)?;
    report.extra.insert("rate_strictly_decreasing_from_4".into(), json!(decreasing));
    Ok(Done::ok(report))
}

/// Every class of size `n`, optionally through an on-disk cache.
pub fn enumerate(mut cfg: RunConfig, spec: &ModelSpec, n: usize, ceilings: Ceilings, cache_dir: Option<&Path>) -> Outcome<Done> {
    ceilings.check(n, &spec.model)?;
    cfg.model = Some(spec.clone());
    cfg.n = Some(vec![n]);
    cfg.ceilings = Some(ceilings.into());
    cfg.set("cache_dir", cache_dir.map(|p| p.display().to_string()));
    let records = match cache_dir {
        Some(dir) => cached_records(dir, n, &spec.model, ceilings)?,
        None => {
            let mut v = Vec::new();
            enumerate_polya(n, &spec.model, &ceilings, &mut |r| v.push(r))?;
            v
        }
    };
    let mut t = Table::new(&RECORD_COLUMNS);
    for r in &records {
        t.push(record_json(r));
    }
    Ok(Done::ok(Report::new(cfg, t)?))
}

fn cached_records(dir: &Path, n: usize, model: &DegreeModel, ceilings: Ceilings) -> Outcome<Vec<PolyaRecord>> {
    let path = cache::cache_path(dir, n, model);
    if path.exists() {
        let mut r = BufReader::new(File::open(&path)?);
        match cache::read_records(&mut r, n, model) {
            Ok(v) => return Ok(v),
            Err(e) => eprintln!("ignoring cache {}: {e}", path.display()),
        }
    }
    let mut v = Vec::new();
    enumerate_polya(n, model, &ceilings, &mut |r| v.push(r))?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        cache::write_records(&mut w, n, model, &v)?;
        std::io::Write::flush(&mut w)?;
    }
    std::fs::rename(&tmp, &path)?;
    Ok(v)
}
