use super::WeightSequence;
use crate::error::{Error, Result};
use crate::numeric::{quarter_maxima, regression_slope, strictly_decreasing, EPS_TRIANGLE, SLOPE_TOL};
use serde::{Deserialize, Serialize};

/// Default first index of the comparison window.
pub const DEFAULT_P0: usize = 8;

/// Cap for witness roots in `M ≼ N`, in log units (`R_cap = e^20`).
pub const R_CAP_LOG: f64 = 20.0;

/// Strongest relation established between two sequences on a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationKind {
    LeqPointwise,
    Preceq,
    Triangle,
    Approx,
    None,
}

/// Finite-window comparison of two sequences via `r_p = (log M_p − log N_p)/p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub kind: RelationKind,
    /// `sup_p (M_p/N_p)^{1/p}` over the window.
    pub witness_root_sup: f64,
    /// `(M_P/N_P)^{1/P}` at the end of the window.
    pub tail_root: f64,
    pub window: (usize, usize),
    /// `M_p ≤ N_p` for every index of the prefix.
    pub pointwise_leq: bool,
    /// `M ≼ N` on the window.
    pub preceq: bool,
    /// `N ≼ M` on the window.
    pub reverse_preceq: bool,
    /// `M ◁ N` on the window.
    pub triangle: bool,
    /// Slope of `r_p` against `log p` over the second half of the window.
    pub tail_slope: f64,
}

impl RelationVerdict {
    /// Whether the relation `kind` is established (weaker relations are implied
    /// by stronger ones where that implication is known to hold).
    pub fn holds(&self, kind: RelationKind) -> bool {
        match kind {
            RelationKind::LeqPointwise => self.pointwise_leq,
            RelationKind::Preceq => self.preceq,
            RelationKind::Triangle => self.triangle,
            RelationKind::Approx => self.preceq && self.reverse_preceq,
            RelationKind::None => !self.preceq && !self.reverse_preceq,
        }
    }
}

struct Directed {
    preceq: bool,
    max_r: f64,
    tail_r: f64,
    slope: f64,
    quarters_decreasing: bool,
}

fn directed(rs: &[f64], xs: &[f64]) -> Directed {
    let max_r = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = rs.len() / 2;
    let slope = regression_slope(&xs[half..], &rs[half..]);
    Directed {
        preceq: max_r <= R_CAP_LOG && slope <= SLOPE_TOL,
        max_r,
        tail_r: rs[rs.len() - 1],
        slope,
        quarters_decreasing: strictly_decreasing(&quarter_maxima(rs)),
    }
}

/// Compares `M` and `N` on `[p0, P_max]`.
///
/// `M ≼ N` is accepted when the log-root ratio stays below `log R_cap` and
/// shows no upward trend against `log p`; `M ◁ N` additionally needs the tail
/// root below `0.05` and strictly decreasing quarter maxima.
pub fn relation(m: &WeightSequence, n: &WeightSequence, p0: usize) -> Result<RelationVerdict> {
    let p_max = m.p_max();
    if n.p_max() != p_max {
        return Err(Error::Domain(format!(
            "sequences have different P_max ({} vs {})",
            p_max,
            n.p_max()
        )));
    }
    if p0 == 0 || p0 + 4 > p_max {
        return Err(Error::Domain(format!("window start p0 = {p0} must satisfy 1 ≤ p0 ≤ P_max − 4")));
    }
    let (a, b) = (m.log_values(), n.log_values());
    let xs: Vec<f64> = (p0..=p_max).map(|p| (p as f64).ln()).collect();
    let fwd: Vec<f64> = (p0..=p_max).map(|p| (a[p] - b[p]) / p as f64).collect();
    let bwd: Vec<f64> = fwd.iter().map(|r| -r).collect();
    let f = directed(&fwd, &xs);
    let r = directed(&bwd, &xs);
    let pointwise_leq = a.iter().zip(b).all(|(x, y)| *x <= *y + 1e-12 * (1.0 + y.abs()));
    let triangle = f.preceq && f.tail_r < EPS_TRIANGLE.ln() && f.quarters_decreasing;
    let kind = if f.preceq && r.preceq {
        RelationKind::Approx
    } else if triangle {
        RelationKind::Triangle
    } else if pointwise_leq {
        RelationKind::LeqPointwise
    } else if f.preceq {
        RelationKind::Preceq
    } else {
        RelationKind::None
    };
    Ok(RelationVerdict {
        kind,
        witness_root_sup: f.max_r.exp(),
        tail_root: f.tail_r.exp(),
        window: (p0, p_max),
        pointwise_leq,
        preceq: f.preceq,
        reverse_preceq: r.preceq,
        triangle,
        tail_slope: f.slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexive_approx() {
        let g = WeightSequence::gevrey(0.7, 400).unwrap();
        assert_eq!(relation(&g, &g, DEFAULT_P0).unwrap().kind, RelationKind::Approx);
    }

    #[test]
    fn smaller_gevrey_is_triangle_on_a_long_window() {
        let a = WeightSequence::gevrey(0.5, 2000).unwrap();
        let b = WeightSequence::gevrey(1.0, 2000).unwrap();
        let v = relation(&a, &b, DEFAULT_P0).unwrap();
        assert_eq!(v.kind, RelationKind::Triangle);
        assert!(v.holds(RelationKind::Preceq));
        let v = relation(&b, &a, DEFAULT_P0).unwrap();
        assert_eq!(v.kind, RelationKind::None);
    }

    #[test]
    fn short_window_keeps_preceq_but_not_triangle() {
        let a = WeightSequence::gevrey(0.5, 400).unwrap();
        let b = WeightSequence::gevrey(1.0, 400).unwrap();
        let v = relation(&a, &b, DEFAULT_P0).unwrap();
        assert!(v.preceq && !v.reverse_preceq && !v.triangle);
        assert!(v.tail_root > EPS_TRIANGLE);
    }

    #[test]
    fn stirling_equivalence() {
        let g = WeightSequence::gevrey(2.0, 400).unwrap();
        let pp = WeightSequence::from_fn(400, |p| {
            if p == 0 {
                0.0
            } else {
                2.0 * p as f64 * (p as f64).ln()
            }
        })
        .unwrap();
        assert_eq!(relation(&pp, &g, DEFAULT_P0).unwrap().kind, RelationKind::Approx);
    }
}
