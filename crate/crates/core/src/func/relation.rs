use super::{WeightFunction, Window};
use crate::numeric::{bounded_above_log, vanishing};
use serde::{Deserialize, Serialize};

/// Function-level growth relations, strongest first in [`FunctionRelationVerdict::kind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FunctionRelationKind {
    Preceq,
    Triangle,
    PreceqC,
    TriangleC,
    Sim,
    SimC,
    None,
}

/// A pair `(h, C)` with `τ(t) ≤ σ(ht) + C` on the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledBound {
    pub h: f64,
    pub c: f64,
}

/// Outcome of [`relation_fn`] for the ordered pair `(σ, τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRelationVerdict {
    pub kind: FunctionRelationKind,
    pub window: Window,
    /// `σ ≼ τ`: `τ/σ` stays bounded.
    pub preceq: bool,
    /// `σ ◁ τ`: `τ/σ` tends to zero.
    pub triangle: bool,
    /// `σ ≼_c τ`.
    pub preceq_c: bool,
    /// `σ ◁_c τ`.
    pub triangle_c: bool,
    /// `τ ≼ σ`.
    pub reverse_preceq: bool,
    /// `τ ≼_c σ`.
    pub reverse_preceq_c: bool,
    /// `L = max τ/σ` on the window.
    pub ratio_sup: f64,
    /// `τ/σ` at the right end of the window.
    pub margin: f64,
    /// Smallest grid `h` (and its `C`) establishing `σ ≼_c τ`.
    pub preceq_c_bound: Option<ScaledBound>,
    /// One bound per `h = 2^{-k}` tried for `σ ◁_c τ`, up to the first failure.
    pub triangle_c_bounds: Vec<ScaledBound>,
}

impl FunctionRelationVerdict {
    /// Whether `kind` is established; `None` means neither `σ ≼ τ` nor `σ ≼_c τ`.
    pub fn holds(&self, kind: FunctionRelationKind) -> bool {
        use FunctionRelationKind::*;
        match kind {
            Preceq => self.preceq,
            Triangle => self.triangle,
            PreceqC => self.preceq_c,
            TriangleC => self.triangle_c,
            Sim => self.preceq && self.reverse_preceq,
            SimC => self.preceq_c && self.reverse_preceq_c,
            None => !self.preceq && !self.preceq_c,
        }
    }
}

struct Samples<'a> {
    ts: &'a [f64],
    log_t: &'a [f64],
}

fn ratio_flags(s: &Samples, sv: &[f64], tv: &[f64]) -> (bool, bool, f64, f64) {
    let ratio: Vec<f64> = sv
        .iter()
        .zip(tv)
        .map(|(a, b)| if *a > 0.0 { b / a } else { f64::INFINITY })
        .collect();
    let sup = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let preceq = sup.is_finite() && bounded_above_log(s.log_t, &ratio, sup);
    let triangle = preceq && vanishing(s.log_t, &ratio);
    (preceq, triangle, sup, ratio[ratio.len() - 1])
}

/// Tests `τ(t) − σ(ht)` for boundedness; returns the bound when it holds.
fn scaled_bound(s: &Samples, sigma: &WeightFunction, tv: &[f64], h: f64) -> Option<ScaledBound> {
    let shifted = sigma.eval_many(&s.ts.iter().map(|t| h * t).collect::<Vec<_>>());
    let d: Vec<f64> = tv.iter().zip(&shifted).map(|(a, b)| a - b).collect();
    let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dabs = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tmax = tv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = dabs.max(1e-6 * tmax);
    if dmax.is_finite() && bounded_above_log(s.log_t, &d, scale) {
        Some(ScaledBound { h, c: dmax.max(0.0) })
    } else {
        None
    }
}

fn preceq_c(s: &Samples, sigma: &WeightFunction, tv: &[f64]) -> Option<ScaledBound> {
    (-10..=10).find_map(|k| scaled_bound(s, sigma, tv, 2f64.powi(k)))
}

/// Compares `σ` and `τ` on a finite window.
///
/// The `≼`/`◁` flags look at the ratio `τ/σ`; the `≼_c`/`◁_c` flags look at
/// the deficit `τ(t) − σ(ht)` for `h` on the grid `2^k`, `|k| ≤ 10`, scanned
/// upward so the reported `h` is the smallest that works. `◁_c` needs every
/// `h = 2^{-k}`, `k = 0..=10`.
pub fn relation_fn(sigma: &WeightFunction, tau: &WeightFunction, window: &Window) -> FunctionRelationVerdict {
    let ts = window.points();
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let s = Samples { ts: &ts, log_t: &log_t };
    let sv = sigma.eval_many(&ts);
    let tv = tau.eval_many(&ts);

    let (preceq, triangle, ratio_sup, margin) = ratio_flags(&s, &sv, &tv);
    let (reverse_preceq, _, _, _) = ratio_flags(&s, &tv, &sv);
    let preceq_c_bound = preceq_c(&s, sigma, &tv);
    let reverse_preceq_c = preceq_c(&s, tau, &sv).is_some();

    let mut triangle_c_bounds = Vec::new();
    let mut triangle_c = preceq_c_bound.is_some();
    if triangle_c {
        for k in 0..=10 {
            match scaled_bound(&s, sigma, &tv, 2f64.powi(-k)) {
                Some(b) => triangle_c_bounds.push(b),
                None => {
                    triangle_c = false;
                    break;
                }
            }
        }
    }

    let preceq_c = preceq_c_bound.is_some();
    use FunctionRelationKind as K;
    let kind = if preceq_c && reverse_preceq_c {
        K::SimC
    } else if preceq && reverse_preceq {
        K::Sim
    } else if triangle_c {
        K::TriangleC
    } else if triangle {
        K::Triangle
    } else if preceq_c {
        K::PreceqC
    } else if preceq {
        K::Preceq
    } else {
        K::None
    };
    FunctionRelationVerdict {
        kind,
        window: *window,
        preceq,
        triangle,
        preceq_c,
        triangle_c,
        reverse_preceq,
        reverse_preceq_c,
        ratio_sup,
        margin,
        preceq_c_bound,
        triangle_c_bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{associated, ClosedForm};
    use crate::seq::WeightSequence;
    use FunctionRelationKind as K;

    #[test]
    fn reflexive_c_relation_with_unit_scale() {
        let sq = WeightFunction::power(0.5).unwrap();
        let v = relation_fn(&sq, &sq, &Window::default());
        assert!(v.holds(K::PreceqC) && v.holds(K::Sim) && v.holds(K::SimC));
        assert_eq!(v.preceq_c_bound, Some(ScaledBound { h: 1.0, c: 0.0 }));
        assert!(!v.triangle && !v.triangle_c);
    }

    #[test]
    fn gevrey_associated_function_is_equivalent_to_identity() {
        let w = associated(&WeightSequence::gevrey(1.0, 20000).unwrap()).unwrap();
        let id = WeightFunction::identity();
        let v = relation_fn(&w, &id, &Window::tail_for(&[&w, &id]));
        assert!(v.holds(K::Sim), "{v:?}");
        assert!(v.holds(K::SimC));
    }

    #[test]
    fn power_ordering() {
        let sq = WeightFunction::power(0.5).unwrap();
        let id = WeightFunction::identity();
        let v = relation_fn(&sq, &id, &Window::default());
        assert!(v.triangle && v.preceq && v.triangle_c && v.preceq_c);
        assert!(!v.reverse_preceq && !v.reverse_preceq_c);
        let v = relation_fn(&id, &sq, &Window::default());
        assert!(!v.preceq && v.reverse_preceq && v.reverse_preceq_c);
        assert!(v.holds(K::None) && v.kind == K::None);
        let log = WeightFunction::closed(ClosedForm::Log).unwrap();
        assert!(relation_fn(&log, &id, &Window::default()).kind != K::Sim);
    }

    #[test]
    fn logarithm_is_reflexively_c_small_but_its_square_is_not() {
        let log = WeightFunction::closed(ClosedForm::Log).unwrap();
        assert!(relation_fn(&log, &log, &Window::default()).triangle_c);
        let exp_sq = WeightSequence::from_fn(400, |p| (p * p) as f64).unwrap();
        let w = associated(&exp_sq).unwrap();
        let v = relation_fn(&w, &w, &Window::default());
        assert!(v.preceq_c && !v.triangle_c);
    }
}
