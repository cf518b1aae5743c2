use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Search interval half-width for the exponent.
pub const X_CAP: f64 = 16.0;

/// Cap for almost-monotone witnesses, in log units (`H_cap = e^8`).
pub const H_CAP_LOG: f64 = 8.0;

const RESOLUTION: f64 = 1e-3;

/// Allowed growth of the minimal witness when the window is halved, which
/// bounds the estimator bias for exact powers by about `0.003`.
const WITNESS_GROWTH_TOL: f64 = 2e-3;

/// Estimated upper and lower Matuszewska indices of a positive sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatuszewskaEstimate {
    pub alpha_upper: f64,
    pub beta_lower: f64,
    pub window: (usize, usize),
    pub almost_const_h: f64,
    pub alpha_saturated: bool,
    pub beta_saturated: bool,
}

/// Minimal `log H` with `b_q ≤ log H + b_p` for all `lo ≤ p ≤ q ≤ hi`,
/// together with a pair attaining it.
pub fn almost_decreasing_witness(b: &[f64], lo: usize, hi: usize) -> (f64, usize, usize) {
    let mut min_v = b[lo];
    let mut min_p = lo;
    let mut best = (0.0, lo, lo);
    for q in lo..=hi {
        if b[q] < min_v {
            min_v = b[q];
            min_p = q;
        }
        let gap = b[q] - min_v;
        if gap > best.0 {
            best = (gap, min_p, q);
        }
    }
    best
}

fn witness_is_bounded(b: &[f64], lo: usize, hi: usize) -> (bool, f64) {
    let (full, _, _) = almost_decreasing_witness(b, lo, hi);
    let mid = (hi / 2).max(lo + 1).min(hi);
    let (half, _, _) = almost_decreasing_witness(b, lo, mid);
    (full <= H_CAP_LOG && full - half <= WITNESS_GROWTH_TOL, full)
}

/// Estimates `α(a)` and `β(a)` from `log a_p` on `[p0, P]`.
///
/// A candidate exponent `x` is accepted for the upper index when
/// `log a_p − x log p` is almost decreasing with witness below `H_cap` and the
/// witness does not grow when the window is doubled from `[p0, P/2]` to
/// `[p0, P]`. The lower index is handled symmetrically.
pub fn matuszewska(log_a: &[f64], p0: usize) -> Result<MatuszewskaEstimate> {
    if p0 == 0 {
        return Err(Error::Domain("window must start at p0 ≥ 1".into()));
    }
    let hi = log_a.len().saturating_sub(1);
    if p0 + 4 > hi {
        return Err(Error::Domain(format!("window [{p0}, {hi}] is too short")));
    }
    if log_a[p0..].iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("sequence values must be finite".into()));
    }
    let shifted = |x: f64, sign: f64| -> Vec<f64> {
        log_a
            .iter()
            .enumerate()
            .map(|(p, v)| if p == 0 { 0.0 } else { sign * (v - x * (p as f64).ln()) })
            .collect()
    };
    let dec = |x: f64| witness_is_bounded(&shifted(x, 1.0), p0, hi);
    let inc = |x: f64| witness_is_bounded(&shifted(x, -1.0), p0, hi);

    let (alpha_upper, alpha_saturated) = if !dec(X_CAP).0 {
        (X_CAP, true)
    } else if dec(-X_CAP).0 {
        (-X_CAP, true)
    } else {
        let (mut lo, mut up) = (-X_CAP, X_CAP);
        while up - lo > RESOLUTION {
            let mid = 0.5 * (lo + up);
            if dec(mid).0 {
                up = mid;
            } else {
                lo = mid;
            }
        }
        (up, false)
    };
    let (beta_lower, beta_saturated) = if !inc(-X_CAP).0 {
        (-X_CAP, true)
    } else if inc(X_CAP).0 {
        (X_CAP, true)
    } else {
        let (mut lo, mut up) = (-X_CAP, X_CAP);
        while up - lo > RESOLUTION {
            let mid = 0.5 * (lo + up);
            if inc(mid).0 {
                lo = mid;
            } else {
                up = mid;
            }
        }
        (lo, false)
    };
    Ok(MatuszewskaEstimate {
        alpha_upper,
        beta_lower,
        window: (p0, hi),
        almost_const_h: dec(alpha_upper).1.exp(),
        alpha_saturated,
        beta_saturated,
    })
}
