//! Weight functions `ω: [0, ∞) → [0, ∞)` as cheap-to-clone evaluators.
//!
//! A [`WeightFunction`] is an immutable node: a closed form, a piecewise
//! associated function of a sequence, a transform (conjugate or Legendre
//! envelope) that tabulated its inner function at construction, a sampled
//! table, or a thin wrapper around another node. Evaluation is pure, so one
//! value may be shared across threads.

mod associated;
mod conditions;
mod indices;
mod relation;
mod slowly;
mod transform;

pub use associated::{associated, counting, integral_form, recover_sequence};
pub use conditions::{c1_holds, c2_holds, log_dominated, sublinear, C1_TOL};
pub use indices::{gamma_indices, GrowthIndexEstimate, GAMMA_CAP, INDEX_RESOLUTION};
pub use relation::{relation_fn, FunctionRelationKind, FunctionRelationVerdict, ScaledBound};
pub use slowly::{slowly_varying_sequence_test, SlowlyVaryingVerdict};
pub use transform::{biconjugate, conjugate, envelope_lower, envelope_upper, envelope_upper_of_sequences, envelope_upper_on};

use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::{lin_space, log_space};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Golden-section iterations used by every refined optimization.
pub const GOLDEN_ITERS: usize = 60;

/// Log-spaced grid for the inner variable of transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_min: 1e-2,
            t_max: 1e8,
            n: 2048,
        }
    }
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        let g = GridSpec { t_min, t_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 {
            return Err(Error::Domain(format!("grid needs n ≥ 64, got {}", self.n)));
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::Domain(format!(
                "grid needs 0 < t_min < t_max < ∞, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// Uniformly spaced `log t` values.
    pub fn log_points(&self) -> Vec<f64> {
        lin_space(self.t_min.ln(), self.t_max.ln(), self.n)
    }
}

/// Finite window `[t0, t_max]` standing in for `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t0: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            t0: 1e3,
            t_max: 1e7,
            n: 512,
        }
    }
}

impl Window {
    pub fn new(t0: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t0 > 0.0 && t0 < t_max && t_max.is_finite()) || n < 8 {
            return Err(Error::Domain(format!(
                "window needs 0 < t0 < t_max < ∞ and n ≥ 8, got [{t0}, {t_max}] with n = {n}"
            )));
        }
        Ok(Window { t0, t_max, n })
    }

    /// Default tail window clipped to a domain bound.
    ///
    /// When the bound cuts below `10^7` the window ends there and starts at the
    /// smaller of `10^3` and the square root of the bound.
    pub fn tail(domain_hint: f64) -> Window {
        let d = Window::default();
        if domain_hint >= d.t_max {
            return d;
        }
        let t_max = domain_hint;
        let t0 = if t_max > 1.0 {
            d.t0.min(t_max.sqrt())
        } else {
            t_max / 100.0
        };
        Window { t0, t_max, n: d.n }
    }

    /// Tail window valid for every function in `fs`.
    pub fn tail_for(fs: &[&WeightFunction]) -> Window {
        Window::tail(fs.iter().map(|f| f.domain_hint()).fold(f64::INFINITY, f64::min))
    }

    pub fn points(&self) -> Vec<f64> {
        log_space(self.t0, self.t_max, self.n)
    }
}

/// Closed-form weights used as test families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    /// Gevrey weight `id^{1/α}: t ↦ t^{1/α}`.
    Power { alpha: f64 },
    /// `t ↦ t log(1 + t)`.
    TLog,
    /// `t ↦ log(1 + t)`.
    Log,
    /// `t ↦ (log(1 + t))²`.
    LogSquared,
    /// `t ↦ exp((log(1 + t))²)`.
    ExpLogSquared,
}

impl ClosedForm {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::Power { alpha } => t.powf(1.0 / alpha),
            ClosedForm::TLog => t * t.ln_1p(),
            ClosedForm::Log => t.ln_1p(),
            ClosedForm::LogSquared => t.ln_1p().powi(2),
            ClosedForm::ExpLogSquared => t.ln_1p().powi(2).exp(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ClosedForm::Power { alpha } => format!("id^(1/{alpha})"),
            ClosedForm::TLog => "t·log(1+t)".into(),
            ClosedForm::Log => "log(1+t)".into(),
            ClosedForm::LogSquared => "log(1+t)^2".into(),
            ClosedForm::ExpLogSquared => "exp(log(1+t)^2)".into(),
        }
    }
}

/// Construction tag of a weight function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FunctionKind {
    ClosedForm,
    Associated,
    IntegralForm,
    Conjugate,
    EnvelopeLower,
    EnvelopeUpper,
    Sampled,
    PowerSubstitution,
    Reciprocal,
    Shifted,
}

pub(crate) enum Node {
    Closed(ClosedForm),
    Associated(associated::AssociatedData),
    IntegralForm(associated::AssociatedData),
    Conjugate(transform::ConjugateData),
    EnvelopeLower(transform::EnvelopeData),
    EnvelopeUpper(transform::EnvelopeData),
    Sampled(Sampled),
    PowerSubstitution { inner: WeightFunction, alpha: f64 },
    Reciprocal(WeightFunction),
    Shifted { inner: WeightFunction, offset: f64 },
    Alias(WeightFunction),
}

struct Inner {
    name: String,
    domain_hint: f64,
    node: Node,
}

/// An evaluable weight function with a construction tag and a domain bound
/// beyond which values are extrapolated.
#[derive(Clone)]
pub struct WeightFunction(Arc<Inner>);

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.0.name)
            .field("kind", &self.kind())
            .field("domain_hint", &self.0.domain_hint)
            .finish()
    }
}

impl WeightFunction {
    pub(crate) fn from_node(name: String, domain_hint: f64, node: Node) -> Self {
        WeightFunction(Arc::new(Inner {
            name,
            domain_hint,
            node,
        }))
    }

    pub fn closed(form: ClosedForm) -> Result<Self> {
        if let ClosedForm::Power { alpha } = form {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Domain(format!("power index must be positive, got {alpha}")));
            }
        }
        Ok(Self::from_node(form.name(), f64::INFINITY, Node::Closed(form)))
    }

    /// `id^{1/α}`.
    pub fn power(alpha: f64) -> Result<Self> {
        Self::closed(ClosedForm::Power { alpha })
    }

    pub fn identity() -> Self {
        Self::power(1.0).expect("unit index is valid").named("id")
    }

    /// Piecewise-linear interpolant of a non-decreasing table.
    ///
    /// Beyond the last sample the table continues as a power law through the
    /// last two points (or constantly when those are not positive).
    pub fn sampled(ts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Sampled::new(ts, values)?;
        let hint = *s.ts.last().expect("validated non-empty");
        Ok(Self::from_node("sampled".into(), hint, Node::Sampled(s)))
    }

    /// `ω^{1/α}(t) = ω(t^{1/α})`.
    pub fn power_substitution(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("substitution index must be positive, got {alpha}")));
        }
        Ok(Self::from_node(
            format!("{}^(1/{alpha})", self.name()),
            self.domain_hint().powf(alpha),
            Node::PowerSubstitution {
                inner: self.clone(),
                alpha,
            },
        ))
    }

    /// `ω^ι(t) = ω(1/t)` for `t > 0`.
    pub fn reciprocal(&self) -> Self {
        Self::from_node(
            format!("{}^iota", self.name()),
            f64::INFINITY,
            Node::Reciprocal(self.clone()),
        )
    }

    /// `max(0, ω − ω(t_ref))`, which vanishes on `[0, t_ref]`.
    pub fn shifted_at(&self, t_ref: f64) -> Self {
        let offset = self.eval(t_ref);
        Self::from_node(
            format!("{}-shifted", self.name()),
            self.domain_hint(),
            Node::Shifted {
                inner: self.clone(),
                offset,
            },
        )
    }

    /// Copy with a different display name.
    pub fn named(&self, name: impl Into<String>) -> Self {
        let name = name.into();
        match &self.0.node {
            Node::Closed(c) => Self::from_node(name, self.domain_hint(), Node::Closed(*c)),
            _ => Self::from_node(name, self.domain_hint(), Node::Alias(self.clone())),
        }
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    /// Largest `t` for which the value is not an extrapolation.
    pub fn domain_hint(&self) -> f64 {
        self.0.domain_hint
    }

    pub fn is_extrapolated(&self, t: f64) -> bool {
        t > self.0.domain_hint
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        match &self.0.node {
            Node::Closed(c) => Some(*c),
            _ => None,
        }
    }

    pub fn kind(&self) -> FunctionKind {
        match &self.0.node {
            Node::Closed(_) => FunctionKind::ClosedForm,
            Node::Associated(_) => FunctionKind::Associated,
            Node::IntegralForm(_) => FunctionKind::IntegralForm,
            Node::Conjugate(_) => FunctionKind::Conjugate,
            Node::EnvelopeLower(_) => FunctionKind::EnvelopeLower,
            Node::EnvelopeUpper(_) => FunctionKind::EnvelopeUpper,
            Node::Sampled(_) => FunctionKind::Sampled,
            Node::PowerSubstitution { .. } => FunctionKind::PowerSubstitution,
            Node::Reciprocal(_) => FunctionKind::Reciprocal,
            Node::Shifted { .. } => FunctionKind::Shifted,
            Node::Alias(inner) => inner.kind(),
        }
    }

    /// `ω(t)`; negative arguments are treated as `0`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = if t < 0.0 { 0.0 } else { t };
        match &self.0.node {
            Node::Closed(c) => c.eval(t),
            Node::Associated(a) => a.eval(t),
            Node::IntegralForm(a) => a.eval_integral(t),
            Node::Conjugate(c) => c.eval(t),
            Node::EnvelopeLower(e) => e.eval_lower(t),
            Node::EnvelopeUpper(e) => e.eval_upper(t),
            Node::Sampled(s) => s.eval(t),
            Node::PowerSubstitution { inner, alpha } => inner.eval(t.powf(1.0 / alpha)),
            Node::Reciprocal(inner) => inner.eval(1.0 / t),
            Node::Shifted { inner, offset } => (inner.eval(t) - offset).max(0.0),
            Node::Alias(inner) => inner.eval(t),
        }
    }

    /// Evaluates at every point, in parallel when enabled.
    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        exec::map_slice(ts, |&t| self.eval(t))
    }
}

pub(crate) struct Sampled {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl Sampled {
    fn new(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != vs.len() {
            return Err(Error::Format("sampled function needs ≥ 2 (t, value) pairs of equal length".into()));
        }
        if ts.iter().chain(&vs).any(|v| !v.is_finite()) || ts[0] < 0.0 {
            return Err(Error::Format("samples must be finite with t ≥ 0".into()));
        }
        for i in 1..ts.len() {
            if ts[i] <= ts[i - 1] {
                return Err(Error::Format(format!("t must be strictly increasing (index {i})")));
            }
            if vs[i] < vs[i - 1] - 1e-9 {
                return Err(Error::Format(format!("values must be non-decreasing (index {i})")));
            }
        }
        Ok(Sampled { ts, vs })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if t <= self.ts[0] {
            return self.vs[0];
        }
        if t >= self.ts[n - 1] {
            let (t1, t2, v1, v2) = (self.ts[n - 2], self.ts[n - 1], self.vs[n - 2], self.vs[n - 1]);
            if v1 > 0.0 && v2 > 0.0 && t1 > 0.0 {
                let k = (v2 / v1).ln() / (t2 / t1).ln();
                return v2 * (t / t2).powf(k);
            }
            return v2;
        }
        let i = self.ts.partition_point(|&x| x <= t);
        let (t1, t2, v1, v2) = (self.ts[i - 1], self.ts[i], self.vs[i - 1], self.vs[i]);
        v1 + (v2 - v1) * (t - t1) / (t2 - t1)
    }

    pub(crate) fn samples(&self) -> (&[f64], &[f64]) {
        (&self.ts, &self.vs)
    }
}

impl WeightFunction {
    /// Raw samples when this is a sampled table.
    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.0.node {
            Node::Sampled(s) => Some(s.samples()),
            _ => None,
        }
    }
}
