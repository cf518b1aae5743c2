use super::{small_root_vanishes, WeightSequence};
use crate::error::{Error, Result};
use serde::Serialize;

/// Options for [`uniform_bound`].
#[derive(Debug, Clone, Default)]
pub struct UniformBoundOptions {
    /// Run the construction on the family divided by the small sequence `m`
    /// of this sequence and multiply the result by `m` afterwards.
    pub remark_base: Option<WeightSequence>,
}

/// A sequence dominating every small sequence of a family in the root sense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBound {
    /// `log a_j` for `j = 0..=P_max`, with `a_0 = 1`.
    pub log_a: Vec<f64>,
    /// Breakpoints `j_1 < j_2 < …`, one per family member.
    pub breakpoints: Vec<usize>,
    /// Log-roots `log (a_j)^{1/j}`; index 0 holds 0.
    pub log_roots: Vec<f64>,
    /// Per member: the last-quarter minimum of `(a_j/n_j)^{1/j}` exceeds its
    /// first-quarter maximum.
    pub divergence: Vec<bool>,
    /// The tail condition on later members is only checked up to `P_max`.
    pub horizon_relaxed: bool,
}

/// Builds the uniform bound by greedy breakpoint selection.
///
/// With `ρ_k(j) = log (n^{(k)}_j)^{1/j}`, start at `j_1 = 1` and take each
/// `j_{k+1} > j_k` minimal such that `ρ_{k+1}(j_{k+1}) < ρ_k(j_k) − log k` and,
/// for `k ≥ 2`, `ρ_{k-1}(j) ≤ ρ_k(j_k)` for all `j_{k+1} ≤ j ≤ P_max`. The
/// roots of `a` are `ρ_1(j_1)` on `[j_1, j_3)` and `ρ_k(j_k)` on
/// `[j_{k+2}, j_{k+3})`, the last block running to `P_max`.
pub fn uniform_bound(family: &[WeightSequence], opts: &UniformBoundOptions) -> Result<UniformBound> {
    let first = family
        .first()
        .ok_or_else(|| Error::Domain("family must not be empty".into()))?;
    let p_max = first.p_max();
    if family.iter().any(|s| s.p_max() != p_max) {
        return Err(Error::Domain("family members must share P_max".into()));
    }
    let base_small = match &opts.remark_base {
        Some(b) if b.p_max() != p_max => {
            return Err(Error::Domain("remark base must share P_max with the family".into()))
        }
        Some(b) => Some(b.log_small()),
        None => None,
    };
    let small: Vec<Vec<f64>> = family
        .iter()
        .map(|s| {
            let mut n = s.log_small();
            if let Some(m) = &base_small {
                n.iter_mut().zip(m).for_each(|(v, w)| *v -= w);
            }
            n
        })
        .collect();
    for k in 1..small.len() {
        if let Some(p) = (0..=p_max).find(|&p| small[k - 1][p] > small[k][p] + 1e-12 * (1.0 + small[k][p].abs())) {
            return Err(Error::Precondition(format!(
                "pointwise order fails between members {k} and {} at p = {p}",
                k + 1
            )));
        }
    }
    for (k, n) in small.iter().enumerate() {
        let seq = WeightSequence::from_log_values(n.iter().zip(0..).map(|(v, p)| v + lf(p)).collect())?;
        if !small_root_vanishes(&seq) {
            return Err(Error::Precondition(format!(
                "small-sequence root of member {} does not tend to zero on the window",
                k + 1
            )));
        }
    }

    let rho = |k: usize, j: usize| small[k][j] / j as f64;
    let kk = small.len();
    let mut bps = vec![1usize];
    for k in 1..kk {
        // step k chooses j_{k+1} for member k+1 (1-based); arrays are 0-based
        let jk = bps[k - 1];
        let target = rho(k - 1, jk) - (k as f64).ln();
        let tail_ok_from = if k >= 2 {
            let bound = rho(k - 1, jk);
            let mut from = p_max + 1;
            for j in (1..=p_max).rev() {
                if rho(k - 2, j) <= bound {
                    from = j;
                } else {
                    break;
                }
            }
            from
        } else {
            1
        };
        let found = (jk + 1..=p_max).find(|&j| j >= tail_ok_from && rho(k, j) < target);
        match found {
            Some(j) => bps.push(j),
            None => return Err(Error::Capacity { k: k + 1, p_max }),
        }
    }

    let block_root = |j: usize| -> f64 {
        // number of breakpoints j_{k+2} ≤ j decides the block index k
        let mut member = 0usize;
        for k in 1..=kk {
            if k + 2 <= kk && bps[k + 1] <= j {
                member = k - 1;
            }
        }
        rho(member, bps[member])
    };
    let mut log_roots = vec![0.0; p_max + 1];
    let mut log_a = vec![0.0; p_max + 1];
    for j in 1..=p_max {
        log_roots[j] = block_root(j);
        log_a[j] = j as f64 * log_roots[j];
    }
    if let Some(m) = &base_small {
        for j in 1..=p_max {
            log_a[j] += m[j];
        }
    }

    let q = p_max / 4;
    let divergence = small
        .iter()
        .map(|n| {
            let ratio = |j: usize| (log_a[j] - n[j] - base_small.as_ref().map_or(0.0, |m| m[j])) / j as f64;
            let head = (1..=q.max(1)).map(ratio).fold(f64::NEG_INFINITY, f64::max);
            let tail = (p_max - q..=p_max).map(ratio).fold(f64::INFINITY, f64::min);
            tail > head
        })
        .collect();
    Ok(UniformBound {
        log_a,
        breakpoints: bps,
        log_roots,
        divergence,
        horizon_relaxed: true,
    })
}

fn lf(p: usize) -> f64 {
    (1..=p).map(|i| (i as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_factorials;

    fn family(exponents: &[f64], p_max: usize) -> Vec<WeightSequence> {
        let lf = log_factorials(p_max);
        exponents
            .iter()
            .map(|&e| WeightSequence::from_log_values(lf.iter().map(|v| v + e * v).collect()).unwrap())
            .collect()
    }

    #[test]
    fn widely_spread_family_succeeds() {
        let fam = family(&[-4.0, -3.0, -2.0, -1.0], 400);
        let ub = uniform_bound(&fam, &UniformBoundOptions::default()).unwrap();
        assert_eq!(ub.breakpoints.len(), 4);
        assert!(ub.log_roots[1..].windows(2).all(|w| w[1] <= w[0]));
        assert!(ub.log_roots[400] <= 0.5f64.ln());
        assert!(ub.divergence.iter().all(|&d| d));
    }

    #[test]
    fn single_member_gives_constant_root() {
        let fam = family(&[-0.5], 100);
        let ub = uniform_bound(&fam, &UniformBoundOptions::default()).unwrap();
        assert_eq!(ub.breakpoints, vec![1]);
        assert!(ub.log_roots[1..].iter().all(|&r| r == ub.log_roots[1]));
        assert_eq!(ub.log_a[0], 0.0);
    }

    #[test]
    fn order_violation_is_rejected() {
        let fam = family(&[-1.0, -2.0], 100);
        assert!(matches!(
            uniform_bound(&fam, &UniformBoundOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
