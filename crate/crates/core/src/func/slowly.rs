use super::associated;
use crate::error::{Error, Result};
use crate::seq::{is_log_convex, WeightSequence};
use serde::{Deserialize, Serialize};

const MIN_ETA: f64 = 0.01;
const RATIO_THRESHOLD: f64 = 10.0;
const DIRECT_T: f64 = 1e6;
const DIRECT_U: [f64; 3] = [2.0, 5.0, 10.0];

/// Sequence-side diagnosis of a slowly varying associated weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowlyVaryingVerdict {
    /// Some `Q ∈ {2, 3, 4}` has `μ_{Qp}/μ_p ≥ 1 + η` on the tail with `η ≥ 0.01`.
    pub beta3_holds: bool,
    pub beta3_q: Option<usize>,
    /// Best `η` over the scanned `Q`.
    pub beta3_eta: f64,
    /// `μ_p / (M_{p-1}/M_0)^{1/(p-1)}` increases over the last quarter and ends above 10.
    pub ratio_diverges: bool,
    pub ratio_at_end: f64,
    pub slowly_varying: bool,
    /// Point of the direct functional check.
    pub direct_t: f64,
    /// `(u, ω_M(ut)/ω_M(t))`.
    pub direct_ratios: Vec<(f64, f64)>,
    /// Some `ut` of the direct check lies beyond `μ_{P_max}`.
    pub direct_extrapolated: bool,
}

/// Tests whether `ω_M` is slowly varying through two conditions on `M`,
/// and reports `ω_M(ut)/ω_M(t)` at `t = 10^6` for `u ∈ {2, 5, 10}`.
pub fn slowly_varying_sequence_test(m: &WeightSequence) -> Result<SlowlyVaryingVerdict> {
    let lc = is_log_convex(m);
    if !lc.holds {
        return Err(Error::Precondition(format!(
            "{} is not log-convex (first violation at p = {})",
            m.name(),
            lc.first_violation.unwrap_or(0)
        )));
    }
    let p_max = m.p_max();
    let lmu = m.log_quotients();
    let lv = m.log_values();

    let mut beta3_q = None;
    let mut beta3_eta = f64::NEG_INFINITY;
    for q in 2..=4usize {
        let hi = p_max / q;
        let lo = (hi / 2).max(1);
        if hi <= lo {
            continue;
        }
        let min_gap = (lo..=hi).map(|p| lmu[q * p] - lmu[p]).fold(f64::INFINITY, f64::min);
        let eta = min_gap.exp() - 1.0;
        if eta > beta3_eta {
            beta3_eta = eta;
        }
        if beta3_q.is_none() && eta >= MIN_ETA {
            beta3_q = Some(q);
        }
    }

    let log_ratio: Vec<f64> = (2..=p_max)
        .map(|p| lmu[p] - (lv[p - 1] - lv[0]) / (p - 1) as f64)
        .collect();
    let last = &log_ratio[log_ratio.len() - log_ratio.len() / 4 - 1..];
    let increasing = last.windows(2).all(|w| w[1] > w[0]);
    let ratio_at_end = log_ratio[log_ratio.len() - 1].exp();
    let ratio_diverges = increasing && ratio_at_end > RATIO_THRESHOLD;

    let omega = associated(m)?;
    let base = omega.eval(DIRECT_T);
    let direct_ratios = DIRECT_U.iter().map(|&u| (u, omega.eval(u * DIRECT_T) / base)).collect();
    let direct_extrapolated = DIRECT_U.iter().any(|&u| omega.is_extrapolated(u * DIRECT_T));

    let beta3_holds = beta3_q.is_some();
    Ok(SlowlyVaryingVerdict {
        beta3_holds,
        beta3_q,
        beta3_eta,
        ratio_diverges,
        ratio_at_end,
        slowly_varying: beta3_holds && ratio_diverges,
        direct_t: DIRECT_T,
        direct_ratios,
        direct_extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::check_moderate_growth;

    #[test]
    fn exp_square_is_slowly_varying_gevrey_is_not() {
        let m = WeightSequence::from_fn(400, |p| (p * p) as f64).unwrap();
        let v = slowly_varying_sequence_test(&m).unwrap();
        assert!(v.beta3_holds && v.ratio_diverges && v.slowly_varying);
        assert!(!v.direct_extrapolated);
        assert!(!check_moderate_growth(&m).holds);
        for s in [0.5, 1.0, 2.0] {
            let g = WeightSequence::gevrey(s, 400).unwrap();
            let v = slowly_varying_sequence_test(&g).unwrap();
            assert!(!v.ratio_diverges && !v.slowly_varying, "{s}: {v:?}");
        }
    }

    #[test]
    fn direct_ratios_follow_the_log_square_law() {
        // ω_M(t) ≈ (log t)²/4 here, so ω_M(ut)/ω_M(t) ≈ (1 + log u / log t)².
        let m = WeightSequence::from_fn(400, |p| (p * p) as f64).unwrap();
        let v = slowly_varying_sequence_test(&m).unwrap();
        let lt = DIRECT_T.ln();
        for (u, r) in v.direct_ratios {
            let approx = (1.0 + u.ln() / lt).powi(2);
            assert!((r - approx).abs() < 0.05, "u = {u}: {r} vs {approx}");
        }
    }
}
