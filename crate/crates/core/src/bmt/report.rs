use crate::func::{c1_holds, c2_holds, gamma_indices, log_dominated, sublinear, GrowthIndexEstimate, Window};
use crate::func::WeightFunction;
use crate::numeric::{lin_space, log_space, quarter_maxima, strictly_decreasing};
use serde::{Deserialize, Serialize};

/// Slack of the sampled midpoint-convexity test for `y ↦ ω(e^y)`.
pub const OMEGA4_TOL: f64 = 1e-8;

const CONVEXITY_TRIPLES: usize = 256;
const MONOTONE_SAMPLES: usize = 512;

/// Sampled verdicts on the standard conditions for a weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmtReport {
    pub window: Window,
    /// Continuous (no jumps at the samples), non-decreasing, `ω(0) = 0`, unbounded.
    pub omega0: bool,
    /// `ω = 0` on `[0, 1]`.
    pub normalized: bool,
    /// `ω(2t) = O(ω(t))`, decided through `γ(ω) > 0`.
    pub omega1: bool,
    /// `max ω(2t)/(ω(t) + 1)` over the window.
    pub l_witness: f64,
    /// `log t = o(ω(t))`.
    pub omega3: bool,
    /// `y ↦ ω(e^y)` midpoint-convex at the sampled triples.
    pub omega4: bool,
    /// Largest midpoint-convexity violation, relative to `1 + |ω|`.
    pub omega4_worst: f64,
    /// `ω(t) = o(t)`.
    pub omega5: bool,
    /// `2ω(t) ≤ ω(Ht) + H`, decided through `γ̄(ω) < ∞`.
    pub omega6: bool,
    /// Smallest `H = 2^{j/4}` (`j ≤ 80`) satisfying the inequality on the window.
    /// Any finite window admits one for slowly varying weights too, so the flag
    /// above does not rely on it.
    pub h_witness: Option<f64>,
    pub c1: bool,
    /// `t = o(ω(t))`, the finiteness condition of `ω*`.
    pub c2: bool,
    pub indices: GrowthIndexEstimate,
}

/// Computes every flag on the tail window clipped to the domain of `ω`.
pub fn bmt_report(omega: &WeightFunction) -> BmtReport {
    let window = Window::tail(omega.domain_hint());
    let ts = window.points();
    let wv = omega.eval_many(&ts);

    let c1 = c1_holds(omega);
    let mono_ts = log_space(1e-3f64.min(window.t0), window.t_max, MONOTONE_SAMPLES);
    let mono = omega.eval_many(&mono_ts);
    let non_decreasing = mono.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs()));
    let continuous = mono_ts.iter().zip(&mono).all(|(t, v)| {
        let near = omega.eval(t * (1.0 + 1e-9));
        (near - v).abs() <= 1e-3 * (1.0 + v.abs())
    });
    let negated: Vec<f64> = wv.iter().map(|v| -v).collect();
    let unbounded = strictly_decreasing(&quarter_maxima(&negated));
    let omega0 = c1 && non_decreasing && continuous && unbounded;
    let normalized = lin_space(0.0, 1.0, 65).into_iter().all(|t| omega.eval(t).abs() <= 1e-12);

    let indices = gamma_indices(omega, &window);
    let omega1 = indices.gamma > indices.resolution;
    let l_witness = ts
        .iter()
        .zip(&wv)
        .map(|(t, v)| omega.eval(2.0 * t) / (v + 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let omega6 = !indices.gamma_bar_saturated;
    let h_witness = (1..=80).map(|j| 2f64.powf(j as f64 / 4.0)).find(|&h| {
        ts.iter()
            .zip(&wv)
            .all(|(t, v)| 2.0 * v <= omega.eval(h * t) + h)
    });

    let ys = lin_space(1e-2f64.ln(), window.t_max.ln(), CONVEXITY_TRIPLES + 2);
    let phi: Vec<f64> = omega.eval_many(&ys.iter().map(|y| y.exp()).collect::<Vec<_>>());
    let omega4_worst = phi
        .windows(3)
        .map(|w| (w[1] - 0.5 * (w[0] + w[2])) / (1.0 + w[1].abs()))
        .fold(f64::NEG_INFINITY, f64::max);

    BmtReport {
        window,
        omega0,
        normalized,
        omega1,
        l_witness,
        omega3: log_dominated(omega, &window),
        omega4: omega4_worst <= OMEGA4_TOL,
        omega4_worst,
        omega5: sublinear(omega, &window),
        omega6,
        h_witness,
        c1,
        c2: c2_holds(omega, &window),
        indices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmt::normalized;
    use crate::func::ClosedForm;

    #[test]
    fn square_has_every_growth_condition_but_sublinearity() {
        let r = bmt_report(&WeightFunction::power(0.5).unwrap());
        assert!(r.omega0 && r.omega1 && r.omega3 && r.omega4 && r.omega6 && r.c1 && r.c2, "{r:?}");
        assert!(!r.omega5 && !r.normalized);
        assert!(r.h_witness.is_some() && r.l_witness <= 4.0 + 1e-9);
        let (w, _) = normalized(&WeightFunction::power(0.5).unwrap());
        assert!(bmt_report(&w).normalized);
    }

    #[test]
    fn square_root_is_sublinear_without_conjugate() {
        let r = bmt_report(&WeightFunction::power(2.0).unwrap());
        assert!(r.omega5 && !r.c2);
    }

    #[test]
    fn slowly_varying_weight_lacks_omega6() {
        let r = bmt_report(&WeightFunction::closed(ClosedForm::LogSquared).unwrap());
        assert!(!r.omega6 && r.omega3, "{r:?}");
    }
}
