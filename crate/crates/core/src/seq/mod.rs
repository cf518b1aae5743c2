//! Weight sequences stored as finite log-domain prefixes `log M_0, …, log M_P`.
//!
//! Quotients `μ_p = M_p / M_{p-1}` and the small sequence `m_p = M_p / p!` are
//! derived on demand from the log values and the shared log-factorial table.

mod convexity;
mod matuszewska;
mod regularize;
mod relation;
mod uniform;

pub use convexity::{
    check_moderate_growth, is_log_convex, is_strongly_log_convex, log_convex_minorant,
    root_almost_decreasing_constants, root_diverges, small_root_vanishes, standard_log_convex,
    LogConvexity, ModerateGrowth, RootConstants, StandardLogConvex, C_CAP_LOG,
};
pub use matuszewska::{almost_decreasing_witness, matuszewska, MatuszewskaEstimate, H_CAP_LOG, X_CAP};
pub use regularize::{almost_decreasing_regularize, normalize_head, Regularized};
pub use relation::{relation, RelationKind, RelationVerdict, DEFAULT_P0, R_CAP_LOG};
pub use uniform::{uniform_bound, UniformBound, UniformBoundOptions};

use crate::error::{Error, Result};
use crate::numeric::log_factorials;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    name: String,
    #[serde(rename = "P_max")]
    p_max: usize,
    log_values: Vec<f64>,
}

impl From<WeightSequence> for SequenceRepr {
    fn from(m: WeightSequence) -> Self {
        SequenceRepr {
            p_max: m.p_max(),
            name: m.name,
            log_values: m.log_values,
        }
    }
}

impl TryFrom<SequenceRepr> for WeightSequence {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        if r.log_values.len() != r.p_max + 1 {
            return Err(Error::Format(format!(
                "P_max = {} but {} log values were given",
                r.p_max,
                r.log_values.len()
            )));
        }
        Ok(WeightSequence::from_log_values(r.log_values)?.named(r.name))
    }
}

/// Smallest admissible `P_max`.
pub const MIN_P_MAX: usize = 8;

/// Default prefix length used by builders when none is given.
pub const DEFAULT_P_MAX: usize = 400;

/// Finite prefix of a positive sequence, held as `log M_p` for `p = 0..=P_max`.
///
/// Serializes as `{"name", "P_max", "log_values"}`; deserialization re-runs
/// the constructor checks and rejects a `P_max` that disagrees with the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SequenceRepr", try_from = "SequenceRepr")]
pub struct WeightSequence {
    name: String,
    log_values: Vec<f64>,
}

impl WeightSequence {
    /// Wraps raw log values. Requires at least `MIN_P_MAX + 1` finite entries.
    pub fn from_log_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_P_MAX + 1 {
            return Err(Error::Format(format!(
                "a weight sequence needs at least {} log values, got {}",
                MIN_P_MAX + 1,
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("log value at p = {p} is not finite")));
        }
        Ok(Self {
            name: String::from("custom"),
            log_values: values,
        })
    }

    /// Builds `log M_p = f(p)` for `p = 0..=p_max`.
    pub fn from_fn(p_max: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::from_log_values((0..=p_max).map(f).collect())
    }

    /// Gevrey sequence `M_p = p!^s`.
    pub fn gevrey(s: f64, p_max: usize) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("Gevrey exponent must be positive, got {s}")));
        }
        let lf = log_factorials(p_max);
        Ok(Self::from_log_values(lf.iter().map(|v| s * v).collect())?.named(format!("gevrey({s})")))
    }

    /// `M_p = exp(p^a)`.
    pub fn exp_power(a: f64, p_max: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("exponent must be positive, got {a}")));
        }
        Ok(Self::from_fn(p_max, |p| (p as f64).powf(a))?.named(format!("exp_power({a})")))
    }

    /// `M_p = q^{p²}`.
    pub fn qgevrey(q: f64, p_max: usize) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("base must be positive, got {q}")));
        }
        let lq = q.ln();
        Ok(Self::from_fn(p_max, |p| (p * p) as f64 * lq)?.named(format!("qgevrey({q})")))
    }

    /// Returns a copy carrying `name`.
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p_max(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn log_value(&self, p: usize) -> f64 {
        self.log_values[p]
    }

    /// `log μ_p` for `p = 0..=P_max`, with `log μ_0 = 0`.
    pub fn log_quotients(&self) -> Vec<f64> {
        let lv = &self.log_values;
        std::iter::once(0.0)
            .chain(lv.windows(2).map(|w| w[1] - w[0]))
            .collect()
    }

    /// `log m_p = log M_p − log p!`.
    pub fn log_small(&self) -> Vec<f64> {
        let lf = log_factorials(self.p_max());
        self.log_values.iter().zip(&lf).map(|(v, f)| v - f).collect()
    }

    /// Log of the roots `(M_p / M_0)^{1/p}` for `p ≥ 1`; index 0 holds NaN.
    pub fn log_roots(&self) -> Vec<f64> {
        let l0 = self.log_values[0];
        self.log_values
            .iter()
            .enumerate()
            .map(|(p, v)| if p == 0 { f64::NAN } else { (v - l0) / p as f64 })
            .collect()
    }

    /// `1 = M_0 ≤ M_1` within `tol` in the log domain.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.log_values[0].abs() <= tol && self.log_values[1] >= -tol
    }

    /// Conjugate sequence `M*_p = p! / M_p`.
    pub fn conjugate(&self) -> Self {
        let lf = log_factorials(self.p_max());
        let values = lf.iter().zip(&self.log_values).map(|(f, v)| f - v).collect();
        Self {
            name: format!("conj({})", self.name),
            log_values: values,
        }
    }

    /// Pointwise product `M·N`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, "·")
    }

    /// Pointwise quotient `M/N`.
    pub fn quotient(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, "/")
    }

    /// Pointwise power `M^k` for real `k`.
    pub fn power(&self, k: f64) -> Self {
        Self {
            name: format!("({})^{k}", self.name),
            log_values: self.log_values.iter().map(|v| k * v).collect(),
        }
    }

    /// The small sequence `m` as a sequence in its own right.
    pub fn small(&self) -> Self {
        Self {
            name: format!("small({})", self.name),
            log_values: self.log_small(),
        }
    }

    /// First `p_max + 1` entries.
    pub fn truncate(&self, p_max: usize) -> Result<Self> {
        if p_max > self.p_max() {
            return Err(Error::Domain(format!(
                "cannot truncate P_max = {} to {p_max}",
                self.p_max()
            )));
        }
        Ok(Self::from_log_values(self.log_values[..=p_max].to_vec())?.named(self.name.clone()))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64, sym: &str) -> Result<Self> {
        if self.p_max() != other.p_max() {
            return Err(Error::Domain(format!(
                "sequences have different P_max ({} vs {})",
                self.p_max(),
                other.p_max()
            )));
        }
        Ok(Self {
            name: format!("{}{sym}{}", self.name, other.name),
            log_values: self
                .log_values
                .iter()
                .zip(&other.log_values)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        })
    }
}
