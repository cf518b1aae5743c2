use super::{WeightFunction, Window};
use crate::exec;
use serde::{Deserialize, Serialize};

/// Upper end of the bisection range for both indices.
pub const GAMMA_CAP: f64 = 8.0;

/// Bisection resolution for both indices.
pub const INDEX_RESOLUTION: f64 = 1e-3;

const DELTA: f64 = 1e-3;

/// Finite-window estimates of the growth indices `γ(ω)` and `γ̄(ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthIndexEstimate {
    pub gamma: f64,
    /// `+∞` (serialized as `null`) when no exponent up to the cap qualifies.
    #[serde(with = "inf_as_null")]
    pub gamma_bar: f64,
    /// The `K` accepted at the reported `γ`.
    pub k_witness: f64,
    /// The `A` accepted at the reported `γ̄`; `+∞` when `γ̄` saturates.
    #[serde(with = "inf_as_null")]
    pub a_witness: f64,
    pub tail_window: Window,
    pub resolution: f64,
    /// `γ` reached [`GAMMA_CAP`].
    pub gamma_saturated: bool,
    /// `γ̄` exceeded [`GAMMA_CAP`].
    pub gamma_bar_saturated: bool,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn scales() -> impl Iterator<Item = f64> {
    (1..=40).map(|j| 2f64.powf(j as f64 / 4.0))
}

struct Tail<'a> {
    omega: &'a WeightFunction,
    ts: Vec<f64>,
    base: Vec<f64>,
}

impl Tail<'_> {
    /// Number of leading window points whose image under `t ↦ λt` stays in the
    /// trusted range of `ω`; `None` when fewer than a quarter of them do, since
    /// past the domain hint values are extrapolated.
    fn usable(&self, lam: f64) -> Option<usize> {
        let limit = self.omega.domain_hint() * (1.0 + 1e-12);
        let m = self.ts.partition_point(|t| lam * t <= limit);
        (m >= self.ts.len() / 4).then_some(m)
    }

    /// `(P_{ω,γ})`: some `K` with `ω(K^γ t) < K(1−δ) ω(t)` on the whole window.
    fn upper(&self, gamma: f64) -> Option<f64> {
        scales().find(|&k| {
            let lam = k.powf(gamma);
            let bound = k * (1.0 - DELTA);
            self.usable(lam).is_some_and(|m| {
                exec::all_range(m, |i| self.omega.eval(lam * self.ts[i]) < bound * self.base[i])
            })
        })
    }

    /// `(P̄_{ω,γ})`: some `A` with `ω(A^γ t) > A(1+δ) ω(t)` on the whole window.
    fn lower(&self, gamma: f64) -> Option<f64> {
        scales().find(|&a| {
            let lam = a.powf(gamma);
            let bound = a * (1.0 + DELTA);
            self.usable(lam).is_some_and(|m| {
                exec::all_range(m, |i| self.omega.eval(lam * self.ts[i]) > bound * self.base[i])
            })
        })
    }
}

/// Estimates `γ(ω)` and `γ̄(ω)` by bisection over `[0, GAMMA_CAP]`.
///
/// The limsup and liminf in the defining conditions are replaced by the
/// maximum and minimum over the sampled window; `K` and `A` run through
/// `2^{j/4}`, `j = 1..=40`, and a relative guard `δ = 10^{-3}` is applied.
/// For weights with a finite domain hint only window points `t` with `λt`
/// inside the hint enter each test.
pub fn gamma_indices(omega: &WeightFunction, window: &Window) -> GrowthIndexEstimate {
    let ts = window.points();
    let base = omega.eval_many(&ts);
    let tail = Tail { omega, ts, base };

    let (gamma, k_witness, gamma_saturated) = match tail.upper(GAMMA_CAP) {
        Some(k) => (GAMMA_CAP, k, true),
        None => {
            let (mut lo, mut up) = (0.0, GAMMA_CAP);
            while up - lo > INDEX_RESOLUTION {
                let mid = 0.5 * (lo + up);
                if tail.upper(mid).is_some() {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            (lo, tail.upper(lo).unwrap_or(f64::NAN), false)
        }
    };
    let (gamma_bar, a_witness, gamma_bar_saturated) = match tail.lower(GAMMA_CAP) {
        None => (f64::INFINITY, f64::INFINITY, true),
        Some(a_cap) => {
            let (mut lo, mut up) = (0.0, GAMMA_CAP);
            let mut a = a_cap;
            while up - lo > INDEX_RESOLUTION {
                let mid = 0.5 * (lo + up);
                match tail.lower(mid) {
                    Some(w) => {
                        up = mid;
                        a = w;
                    }
                    None => lo = mid,
                }
            }
            (up, a, false)
        }
    };
    GrowthIndexEstimate {
        gamma,
        gamma_bar,
        k_witness,
        a_witness,
        tail_window: *window,
        resolution: INDEX_RESOLUTION,
        gamma_saturated,
        gamma_bar_saturated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ClosedForm;

    #[test]
    fn gevrey_weights_have_equal_indices() {
        for alpha in [0.25, 0.5, 0.75, 1.5] {
            let e = gamma_indices(&WeightFunction::power(alpha).unwrap(), &Window::default());
            assert!((e.gamma - alpha).abs() < 0.01, "{alpha}: {e:?}");
            assert!((e.gamma_bar - alpha).abs() < 0.01, "{alpha}: {e:?}");
            assert!(e.gamma <= e.gamma_bar + e.resolution);
            assert!(e.k_witness > 1.0 && e.a_witness > 1.0);
        }
    }

    #[test]
    fn slowly_varying_weight_saturates() {
        let e = gamma_indices(&WeightFunction::closed(ClosedForm::LogSquared).unwrap(), &Window::default());
        assert!(e.gamma_saturated && e.gamma_bar_saturated);
        assert_eq!(e.gamma, GAMMA_CAP);
        assert!(e.gamma_bar.is_infinite());
        let json = serde_json::to_string(&e).unwrap();
        let back: GrowthIndexEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn power_substitution_scales_indices() {
        let w = WeightFunction::closed(ClosedForm::TLog).unwrap();
        let base = gamma_indices(&w, &Window::default());
        let sub = gamma_indices(&w.power_substitution(0.5).unwrap(), &Window::default());
        assert!((sub.gamma - 0.5 * base.gamma).abs() < 0.1, "{base:?} {sub:?}");
        assert!((sub.gamma_bar - 0.5 * base.gamma_bar).abs() < 0.1, "{base:?} {sub:?}");
    }
}
