//! Named, parameterized checks that run identities and inequalities between
//! weights on concrete families and report margins.
//!
//! Every check first tests the hypotheses of the statement it exercises. A
//! failed hypothesis makes the report `SKIPPED`; only a violated conclusion
//! (or an error while evaluating one) makes it `FAIL`. Margins are slacks
//! with the check's tolerance already folded in, so a report passes exactly
//! when its worst margin is non-negative.

mod conjugate;
mod matrix;
mod sequence;

use crate::error::{Error, Result};
use crate::exec;
use crate::func::{GridSpec, Window};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// Relative tolerance of comparisons against closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-4;
/// Relative tolerance of transform identities.
pub const TRANSFORM_TOL: f64 = 1e-3;
/// Absolute tolerance of growth-index estimates.
pub const INDEX_TOL: f64 = 0.05;
/// Relative slack allowed in inequalities after the constants were scanned.
pub const INEQ_TOL: f64 = 1e-9;

/// Parameters of a check, as given on the command line or in a manifest.
pub type Params = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// The sample that produced the worst negative margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assertion: String,
    pub at: f64,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    /// Effective parameters, defaults included.
    pub params: Params,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    /// Smallest slack over all assertions; `0` when nothing numeric was asserted.
    pub worst_margin: f64,
    pub witnesses: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Registered checks, in reporting order.
pub const CHECK_IDS: [&str; 15] = [
    "GEVREY_CONJ",
    "BICONJ_CONVEX",
    "ENV_DUALITY",
    "INDEX_TRANSFER",
    "REL_TRANSFER",
    "SEQ_FN_CONJ_BRIDGE",
    "CONJ_WELLDEF_EQUIV",
    "ENVELOPE_ID",
    "GROWTHREL_SEQ",
    "BMT_SANDWICH",
    "MATRIX_CONST",
    "NEWEXPABSORB",
    "UNIFORM_BOUND",
    "SLOWLY_VARYING",
    "ROOT_ALMOST_DECR",
];

type CheckFn = fn(&mut Args, &mut Ctx) -> Result<()>;

fn lookup(check_id: &str) -> Option<CheckFn> {
    let f: CheckFn = match check_id {
        "GEVREY_CONJ" => conjugate::gevrey_conj,
        "BICONJ_CONVEX" => conjugate::biconj_convex,
        "ENV_DUALITY" => conjugate::env_duality,
        "INDEX_TRANSFER" => conjugate::index_transfer,
        "REL_TRANSFER" => conjugate::rel_transfer,
        "SEQ_FN_CONJ_BRIDGE" => sequence::bridge,
        "CONJ_WELLDEF_EQUIV" => sequence::conj_welldef_equiv,
        "ENVELOPE_ID" => sequence::envelope_id,
        "GROWTHREL_SEQ" => sequence::growthrel_seq,
        "BMT_SANDWICH" => matrix::bmt_sandwich,
        "MATRIX_CONST" => matrix::matrix_const,
        "NEWEXPABSORB" => matrix::new_exp_absorb,
        "UNIFORM_BOUND" => sequence::uniform_bound_check,
        "SLOWLY_VARYING" => sequence::slowly_varying,
        "ROOT_ALMOST_DECR" => sequence::root_almost_decr,
        _ => return None,
    };
    Some(f)
}

/// Parameter sets run by [`run_all`] for one check.
pub fn default_params(check_id: &str) -> Result<Vec<Params>> {
    fn one(key: &str, vals: &[Value]) -> Vec<Params> {
        vals.iter()
            .map(|v| {
                let mut m = Params::new();
                m.insert(key.into(), v.clone());
                m
            })
            .collect()
    }
    let sets = match check_id {
        "GEVREY_CONJ" => one("alpha", &[json!(0.25), json!(0.5), json!(0.75)]),
        "BICONJ_CONVEX" => one("case", &[json!("square"), json!("four_thirds"), json!("nonconvex")]),
        "ENV_DUALITY" => {
            let mut hyp_fails = Params::new();
            hyp_fails.insert("sigma_alpha".into(), json!(0.5));
            hyp_fails.insert("tau_alpha".into(), json!(0.75));
            vec![Params::new(), hyp_fails]
        }
        "CONJ_WELLDEF_EQUIV" => one(
            "s",
            &[json!(0.25), json!(0.5), json!(0.75), json!(1.0), json!(1.5), json!(2.0)],
        ),
        "ENVELOPE_ID" => one("clause", &[json!("i"), json!("ii"), json!("iii"), json!("iv"), json!("v")]),
        "GROWTHREL_SEQ" => one("part", &[json!("growthrel"), json!("lower"), json!("upper")]),
        "MATRIX_CONST" => one("omega", &[json!("square"), json!("log_squared")]),
        "SLOWLY_VARYING" => one("case", &[json!("exp_square"), json!("gevrey")]),
        "ROOT_ALMOST_DECR" => one("s", &[json!(0.5), json!(0.3)]),
        id if lookup(id).is_some() => vec![Params::new()],
        id => return Err(unknown(id)),
    };
    Ok(sets)
}

fn unknown(id: &str) -> Error {
    Error::Usage(format!("unknown check id {id:?}; known ids: {}", CHECK_IDS.join(", ")))
}

/// Runs one check. Unknown ids and malformed parameters are usage errors;
/// everything else ends up in the report.
pub fn run_check(check_id: &str, params: &Params) -> Result<CheckReport> {
    let f = lookup(check_id).ok_or_else(|| unknown(check_id))?;
    let mut args = Args::new(params);
    let mut ctx = Ctx::default();
    let outcome = f(&mut args, &mut ctx);
    let leftover = args.leftover();
    if !leftover.is_empty() {
        return Err(Error::Usage(format!(
            "{check_id} does not take parameter(s) {}",
            leftover.join(", ")
        )));
    }
    match outcome {
        Err(e @ Error::Usage(_)) => return Err(e),
        Err(e) => ctx.require("evaluation", f64::NAN, false, e.to_string()),
        Ok(()) => {}
    }
    Ok(ctx.finish(check_id, args.used))
}

/// Runs every registered check on its default parameter sets. Checks run
/// concurrently; the reports come back in registration order.
pub fn run_all() -> Vec<CheckReport> {
    let jobs: Vec<(&str, Params)> = CHECK_IDS
        .iter()
        .flat_map(|id| {
            default_params(id)
                .expect("registered id")
                .into_iter()
                .map(move |p| (*id, p))
        })
        .collect();
    exec::map_slice(&jobs, |(id, p)| run_check(id, p).expect("default parameters are valid"))
}

/// Fixed-width summary, one line per report.
pub fn format_table(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:<8} {:>12}  {:<32} note", "check", "status", "margin", "params");
    for r in reports {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        let params = r
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        let note = match (&r.violation, &r.skip_reason) {
            (Some(v), _) if v.at.is_nan() => format!("{}: {}", v.assertion, v.detail),
            (Some(v), _) => format!("{} at {:.4e}: {}", v.assertion, v.at, v.detail),
            (None, Some(s)) => s.clone(),
            _ => String::new(),
        };
        let _ = writeln!(out, "{:<20} {:<8} {:>12.4e}  {:<32} {}", r.check_id, status, r.worst_margin, params, note);
    }
    out
}

/// Typed access to check parameters that records the effective values.
pub(crate) struct Args {
    given: Params,
    used: Params,
    seen: BTreeSet<String>,
}

impl Args {
    fn new(given: &Params) -> Self {
        Args {
            given: given.clone(),
            used: Params::new(),
            seen: BTreeSet::new(),
        }
    }

    pub(crate) fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.seen.insert(key.into());
        let v = match self.given.get(key) {
            None => default,
            Some(Value::Number(n)) => n.as_f64().expect("JSON numbers are finite"),
            Some(Value::String(s)) => s
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("parameter {key} must be a number, got {s:?}")))?,
            Some(other) => return Err(Error::Usage(format!("parameter {key} must be a number, got {other}"))),
        };
        self.used.insert(key.into(), json!(v));
        Ok(v)
    }

    pub(crate) fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.f64(key, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
            return Err(Error::Usage(format!("parameter {key} must be a non-negative integer, got {v}")));
        }
        self.used.insert(key.into(), json!(v as usize));
        Ok(v as usize)
    }

    pub(crate) fn choice(&mut self, key: &str, options: &[&str]) -> Result<String> {
        self.seen.insert(key.into());
        let v = match self.given.get(key) {
            None => options[0].to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
        };
        if !options.contains(&v.as_str()) {
            return Err(Error::Usage(format!(
                "parameter {key} must be one of {}, got {v:?}",
                options.join(", ")
            )));
        }
        self.used.insert(key.into(), json!(v));
        Ok(v)
    }

    fn leftover(&self) -> Vec<String> {
        self.given.keys().filter(|k| !self.seen.contains(*k)).cloned().collect()
    }
}

/// Accumulates margins, witnesses and the skip decision of one run.
#[derive(Default)]
pub(crate) struct Ctx {
    worst: Option<f64>,
    violation: Option<Violation>,
    witnesses: BTreeMap<String, Value>,
    window: Option<Window>,
    grid: Option<GridSpec>,
    skip: Option<String>,
}

impl Ctx {
    /// Records a slack; negative slack is a violation. Non-finite slack counts
    /// as `−1` and keeps its raw value in the detail.
    pub(crate) fn margin(&mut self, assertion: &str, at: f64, margin: f64) {
        let (m, detail) = if margin.is_finite() {
            (margin, format!("margin {margin:.3e}"))
        } else {
            (-1.0, format!("non-finite margin {margin}"))
        };
        self.record(assertion, at, m, detail);
    }

    /// Records a boolean assertion as slack `0` (holds) or `−1` (fails).
    pub(crate) fn require(&mut self, assertion: &str, at: f64, ok: bool, detail: impl Into<String>) {
        self.record(assertion, at, if ok { 0.0 } else { -1.0 }, detail.into());
    }

    fn record(&mut self, assertion: &str, at: f64, m: f64, detail: String) {
        if self.worst.is_none_or(|w| m < w) {
            self.worst = Some(m);
        }
        if m < 0.0 && self.violation.as_ref().is_none_or(|v| m < v.margin) {
            self.violation = Some(Violation {
                assertion: assertion.into(),
                at,
                margin: m,
                detail,
            });
        }
    }

    /// Worst slack of `rhs − lhs` relative to `1 + |rhs|`, shifted by `tol`,
    /// over paired samples; records it under `assertion`.
    pub(crate) fn leq_all(&mut self, assertion: &str, at: &[f64], lhs: &[f64], rhs: &[f64], tol: f64) {
        let mut worst = (f64::INFINITY, f64::NAN);
        for ((t, a), b) in at.iter().zip(lhs).zip(rhs) {
            let m = (b - a) / (1.0 + b.abs()) + tol;
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            if m < worst.0 {
                worst = (m, *t);
            }
        }
        if !at.is_empty() {
            self.margin(assertion, worst.1, worst.0);
        }
    }

    /// Worst `tol − |a − b|/|b|` over paired samples.
    pub(crate) fn close_all(&mut self, assertion: &str, at: &[f64], a: &[f64], b: &[f64], tol: f64) {
        let mut worst = (f64::INFINITY, f64::NAN);
        for ((t, x), y) in at.iter().zip(a).zip(b) {
            let m = tol - rel_err(*x, *y);
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            if m < worst.0 {
                worst = (m, *t);
            }
        }
        self.margin(assertion, worst.1, worst.0);
    }

    pub(crate) fn witness(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.witnesses.insert(key.into(), v);
    }

    pub(crate) fn skip(&mut self, reason: impl Into<String>) {
        self.skip.get_or_insert_with(|| reason.into());
    }

    pub(crate) fn set_window(&mut self, w: Window) {
        self.window = Some(w);
    }

    pub(crate) fn set_grid(&mut self, g: GridSpec) {
        self.grid = Some(g);
    }

    fn finish(self, check_id: &str, params: Params) -> CheckReport {
        let status = if self.violation.is_some() {
            Status::Fail
        } else if self.skip.is_some() {
            Status::Skipped
        } else {
            Status::Pass
        };
        CheckReport {
            check_id: check_id.into(),
            params,
            status,
            skip_reason: if status == Status::Skipped { self.skip } else { None },
            worst_margin: if status == Status::Skipped { 0.0 } else { self.worst.unwrap_or(0.0) },
            witnesses: self.witnesses,
            window: self.window,
            grid: self.grid,
            violation: self.violation,
        }
    }
}

/// Bad parameter values surface as usage errors.
pub(crate) fn bad_param(e: Error) -> Error {
    Error::Usage(e.to_string())
}

/// `|a − b| / |b|`, falling back to the absolute error when `b = 0`.
pub(crate) fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
