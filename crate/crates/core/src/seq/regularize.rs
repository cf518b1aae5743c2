use super::matuszewska::{almost_decreasing_witness, H_CAP_LOG};
use super::WeightSequence;
use crate::error::{Error, Result};
use serde::Serialize;
use crate::numeric::GROWTH_TOL;

/// Output of the almost-decreasing regularization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regularized {
    pub sequence: WeightSequence,
    /// Minimal witness for `μ_p/p` being almost decreasing.
    pub h: f64,
}

/// Replaces `μ` by `λ_p = H^{-1} p sup_{q ≥ p} μ_q/q` so that `λ_p/p` is
/// non-increasing while `M ≈ L` holds.
///
/// The suffix maximum runs over the stored prefix only. Fails when `μ_p/p` is
/// not almost decreasing: either the minimal witness exceeds `H_cap`, or it
/// still grows when the window is doubled.
pub fn almost_decreasing_regularize(m: &WeightSequence) -> Result<Regularized> {
    let lmu = m.log_quotients();
    let p_max = m.p_max();
    let c: Vec<f64> = lmu
        .iter()
        .enumerate()
        .map(|(p, v)| if p == 0 { 0.0 } else { v - (p as f64).ln() })
        .collect();
    let (log_h, p, q) = almost_decreasing_witness(&c, 1, p_max);
    let (log_h_half, _, _) = almost_decreasing_witness(&c, 1, p_max / 2);
    if log_h > H_CAP_LOG || log_h - log_h_half > GROWTH_TOL {
        return Err(Error::NotAlmostDecreasing { p, q, log_h });
    }
    let mut suffix = vec![f64::NEG_INFINITY; p_max + 2];
    for p in (1..=p_max).rev() {
        suffix[p] = suffix[p + 1].max(c[p]);
    }
    let mut values = Vec::with_capacity(p_max + 1);
    let mut acc = 0.0f64;
    values.push(0.0);
    for (p, s) in suffix.iter().enumerate().take(p_max + 1).skip(1) {
        acc += -log_h + (p as f64).ln() + s;
        values.push(acc);
    }
    let sequence = WeightSequence::from_log_values(values)?.named(format!("reg({})", m.name()));
    Ok(Regularized {
        sequence,
        h: log_h.exp(),
    })
}

/// Adjusts the head of a regularized sequence so that `L̃_0 = L̃_1 = 1` and
/// `1 = λ̃_0 ≤ λ̃_1 ≤ …` while `λ̃_p/p` stays non-increasing.
///
/// Rule: `λ̃_1 = 1` and `λ̃_p = min(max(λ_p, 1), p λ̃_{p-1}/(p-1))` for `p ≥ 2`.
/// When `λ_1 ≤ 1` this clamps quotients to 1 below the first index with
/// `λ_p ≥ 1` and leaves the rest untouched. Unchanged quotients keep their
/// log values bit for bit.
pub fn normalize_head(l: &WeightSequence) -> WeightSequence {
    let lv = l.log_values();
    let lam = l.log_quotients();
    let mut out = Vec::with_capacity(lv.len());
    out.push(0.0);
    let mut prev = 0.0f64;
    let mut delta = -lv[0];
    for p in 1..lv.len() {
        let new = if p == 1 {
            0.0
        } else {
            let cap = prev + (p as f64 / (p - 1) as f64).ln();
            lam[p].max(0.0).min(cap)
        };
        if new != lam[p] {
            delta += new - lam[p];
        }
        out.push(if delta == 0.0 { lv[p] } else { lv[p] + delta });
        prev = new;
    }
    WeightSequence::from_log_values(out)
        .expect("finite input stays finite")
        .named(format!("head({})", l.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{is_log_convex, relation, RelationKind, DEFAULT_P0};

    fn quotient_over_p_non_increasing(s: &WeightSequence) -> bool {
        let lam = s.log_quotients();
        (2..lam.len()).all(|p| lam[p] - (p as f64).ln() <= lam[p - 1] - ((p - 1) as f64).ln() + 1e-12)
    }

    #[test]
    fn third_gevrey_regularizes() {
        let g = WeightSequence::gevrey(1.0 / 3.0, 400).unwrap();
        let r = almost_decreasing_regularize(&g).unwrap();
        assert!(quotient_over_p_non_increasing(&r.sequence));
        assert_eq!(r.sequence.log_value(0), 0.0);
        assert!(is_log_convex(&r.sequence).holds);
        assert_eq!(relation(&g, &r.sequence, DEFAULT_P0).unwrap().kind, RelationKind::Approx);
    }

    #[test]
    fn square_gevrey_is_rejected() {
        let g = WeightSequence::gevrey(2.0, 400).unwrap();
        assert!(matches!(
            almost_decreasing_regularize(&g),
            Err(Error::NotAlmostDecreasing { .. })
        ));
    }

    #[test]
    fn head_normalization_of_regularized_third_gevrey() {
        let g = WeightSequence::gevrey(1.0 / 3.0, 400).unwrap();
        let r = almost_decreasing_regularize(&g).unwrap().sequence;
        let n = normalize_head(&r);
        let lam = n.log_quotients();
        assert_eq!(n.log_value(0), 0.0);
        assert_eq!(n.log_value(1), 0.0);
        assert!(lam.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(quotient_over_p_non_increasing(&n));
        assert!(is_log_convex(&n).holds && is_log_convex(&n.conjugate()).holds);
        assert!(n.conjugate().is_normalized(1e-12));
        assert_eq!(relation(&r, &n, DEFAULT_P0).unwrap().kind, RelationKind::Approx);
        let first = (1..=400).find(|&p| r.log_quotients()[p] >= 0.0).unwrap();
        for p in 1..first {
            assert_eq!(lam[p], 0.0);
        }
        for p in first..=400 {
            assert!((lam[p] - r.log_quotients()[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn already_normalized_input_is_unchanged() {
        let l = WeightSequence::from_fn(50, |p| {
            if p < 2 {
                0.0
            } else {
                (2..=p).map(|i| (i as f64).ln() * 0.5).sum()
            }
        })
        .unwrap();
        assert_eq!(normalize_head(&l).log_values(), l.log_values());
    }
}
