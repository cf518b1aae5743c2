use super::relation::DEFAULT_P0;
use super::WeightSequence;
use crate::exec;
use crate::numeric::{quarter_maxima, regression_slope, strictly_decreasing, EPS_TRIANGLE, SLOPE_TOL};

/// Default absolute tolerance for the log-convexity test.
pub const TOL_LC: f64 = 1e-12;

/// Cap for the moderate-growth constant, in log units (`C_cap = e^10`).
pub const C_CAP_LOG: f64 = 10.0;

/// Outcome of the log-convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogConvexity {
    pub holds: bool,
    /// Smallest index `q` with `μ_q < μ_{q-1}` beyond tolerance.
    pub first_violation: Option<usize>,
}

/// Tests `2 log M_p ≤ log M_{p-1} + log M_{p+1}` for `1 ≤ p < P_max`.
///
/// The tolerance scales as `TOL_LC · (1 + |log M_p|)` so that long prefixes
/// with large log values are not rejected on rounding noise.
pub fn is_log_convex(m: &WeightSequence) -> LogConvexity {
    let lv = m.log_values();
    for p in 1..lv.len() - 1 {
        if 2.0 * lv[p] > lv[p - 1] + lv[p + 1] + TOL_LC * (1.0 + lv[p].abs()) {
            return LogConvexity {
                holds: false,
                first_violation: Some(p + 1),
            };
        }
    }
    LogConvexity {
        holds: true,
        first_violation: None,
    }
}

/// True when `μ_p / p` is non-decreasing for `p ≥ 1`.
pub fn is_strongly_log_convex(m: &WeightSequence) -> bool {
    let lmu = m.log_quotients();
    (2..lmu.len()).all(|p| {
        let prev = lmu[p - 1] - ((p - 1) as f64).ln();
        let cur = lmu[p] - (p as f64).ln();
        cur >= prev - TOL_LC * (1.0 + prev.abs())
    })
}

/// Lower convex hull of the points `(p, log M_p)`, evaluated at every integer `p`.
pub fn log_convex_minorant(m: &WeightSequence) -> WeightSequence {
    let lv = m.log_values();
    let mut hull: Vec<usize> = Vec::with_capacity(lv.len());
    for p in 0..lv.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies strictly above the chord from a to p.
            let cross = (b - a) as f64 * (lv[p] - lv[a]) - (p - a) as f64 * (lv[b] - lv[a]);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = lv.to_vec();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (lv[b] - lv[a]) / (b - a) as f64;
        for (p, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            *slot = lv[a] + slope * (p - a) as f64;
        }
    }
    WeightSequence::from_log_values(out)
        .expect("hull of finite values is finite")
        .named(format!("lc({})", m.name()))
}

/// Outcome of the moderate-growth search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModerateGrowth {
    pub holds: bool,
    /// Smallest admissible constant, or the cap when the search saturates.
    pub witness_c: f64,
}

/// Smallest `C ≥ 1` with `log M_{p+q} ≤ (p+q+1) log C + log M_p + log M_q`
/// for all `p + q ≤ P_max`.
pub fn check_moderate_growth(m: &WeightSequence) -> ModerateGrowth {
    let lv = m.log_values();
    let n = lv.len();
    let row_max = exec::map_range(n, |p| {
        let mut best = 0.0f64;
        for q in 0..n - p {
            let need = (lv[p + q] - lv[p] - lv[q]) / (p + q + 1) as f64;
            best = best.max(need);
        }
        best
    });
    let log_c = row_max.into_iter().fold(0.0f64, f64::max);
    if log_c <= C_CAP_LOG {
        ModerateGrowth {
            holds: true,
            witness_c: log_c.exp(),
        }
    } else {
        ModerateGrowth {
            holds: false,
            witness_c: C_CAP_LOG.exp(),
        }
    }
}

/// Minimal constants for the two equivalent root conditions on small sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConstants {
    /// Minimal `H ≥ 1` with `(m_{p+1})^{1/(p+1)} ≤ H^{1/(p+1)} (m_p)^{1/p}`.
    pub h: f64,
    /// Minimal `A ≥ 1` with `μ_{p+1} ≤ A (M_p)^{1/p}`.
    pub a: f64,
}

/// Computes both minimal constants over `1 ≤ p < P_max`.
pub fn root_almost_decreasing_constants(m: &WeightSequence) -> RootConstants {
    let lm = m.log_small();
    let lmu = m.log_quotients();
    let lv = m.log_values();
    let mut log_h = 0.0f64;
    let mut log_a = 0.0f64;
    for p in 1..m.p_max() {
        let pf = p as f64;
        log_h = log_h.max(lm[p + 1] - (pf + 1.0) / pf * lm[p]);
        log_a = log_a.max(lmu[p + 1] - lv[p] / pf);
    }
    RootConstants {
        h: log_h.exp(),
        a: log_a.exp(),
    }
}

fn log_root_window(series: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p_max = series.len() - 1;
    let p0 = DEFAULT_P0.min(p_max / 2).max(1);
    let xs: Vec<f64> = (p0..=p_max).map(|p| (p as f64).ln()).collect();
    let ys: Vec<f64> = (p0..=p_max).map(|p| series[p] / p as f64).collect();
    (xs, ys)
}

/// Finite-window proxy for `(M_p)^{1/p} → ∞`: the log-root grows against `log p`
/// over the second half of the window.
pub fn root_diverges(m: &WeightSequence) -> bool {
    let lv = m.log_values();
    let shifted: Vec<f64> = lv.iter().map(|v| v - lv[0]).collect();
    let (xs, ys) = log_root_window(&shifted);
    let half = xs.len() / 2;
    regression_slope(&xs[half..], &ys[half..]) >= SLOPE_TOL
}

/// Finite-window proxy for `(m_p)^{1/p} → 0`: the log-root of the small
/// sequence trends down (strictly decreasing quarter maxima) and is either
/// already tiny or falling against `log p`.
pub fn small_root_vanishes(m: &WeightSequence) -> bool {
    let (xs, ys) = log_root_window(&m.log_small());
    if !strictly_decreasing(&quarter_maxima(&ys)) {
        return false;
    }
    let half = xs.len() / 2;
    ys[ys.len() - 1] <= EPS_TRIANGLE.ln() || regression_slope(&xs[half..], &ys[half..]) <= -SLOPE_TOL
}

/// Membership test for standard log-convex sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardLogConvex {
    pub log_convex: bool,
    pub normalized: bool,
    pub root_diverges: bool,
}

impl StandardLogConvex {
    pub fn holds(&self) -> bool {
        self.log_convex && self.normalized && self.root_diverges
    }
}

/// Log-convex, normalized (`1 = M_0 ≤ M_1`) and with diverging root.
pub fn standard_log_convex(m: &WeightSequence) -> StandardLogConvex {
    StandardLogConvex {
        log_convex: is_log_convex(m).holds,
        normalized: m.is_normalized(1e-12),
        root_diverges: root_diverges(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternating() -> WeightSequence {
        WeightSequence::from_fn(20, |p| if p % 2 == 1 { 10f64.ln() } else { 0.0 }).unwrap()
    }

    #[test]
    fn gevrey_is_log_convex_alternating_is_not() {
        for s in [0.1, 0.5, 1.0, 3.0] {
            assert!(is_log_convex(&WeightSequence::gevrey(s, 400).unwrap()).holds);
        }
        let v = is_log_convex(&alternating());
        assert!(!v.holds);
        assert_eq!(v.first_violation, Some(2));
        let c = WeightSequence::gevrey(2.0, 100).unwrap().conjugate();
        assert_eq!(is_log_convex(&c).first_violation, Some(2));
    }

    #[test]
    fn minorant_of_small_example() {
        let l10 = 10f64.ln();
        let mut v = vec![0.0, l10, 0.0, l10, 2.0 * l10];
        // pad with a steep convex tail so the prefix is long enough
        for k in 5..12 {
            v.push(2.0 * l10 + (k - 4) as f64 * 3.0 * l10);
        }
        let m = WeightSequence::from_log_values(v.clone()).unwrap();
        let lc = log_convex_minorant(&m);
        // brute-force lower hull: for each p, min over chords through points a ≤ p ≤ b
        for p in 0..v.len() {
            let mut best = v[p];
            for a in 0..=p {
                for b in p..v.len() {
                    if a == b {
                        continue;
                    }
                    let val = v[a] + (v[b] - v[a]) * (p - a) as f64 / (b - a) as f64;
                    best = best.min(val);
                }
            }
            assert!((lc.log_value(p) - best).abs() < 1e-12, "p = {p}");
        }
        assert_eq!(lc.log_value(1), 0.0);
        assert!(is_log_convex(&lc).holds);
        let g = WeightSequence::gevrey(1.0, 200).unwrap();
        assert_eq!(log_convex_minorant(&g).log_values(), g.log_values());
    }

    #[test]
    fn moderate_growth_examples() {
        for s in [0.25, 1.0, 2.0] {
            let mg = check_moderate_growth(&WeightSequence::gevrey(s, 200).unwrap());
            assert!(mg.holds);
            assert!(mg.witness_c <= 2f64.powf(s) + 1e-9);
        }
        let sq = WeightSequence::qgevrey(std::f64::consts::E, 200).unwrap();
        let mg = check_moderate_growth(&sq);
        assert!(!mg.holds);
        assert_eq!(mg.witness_c, C_CAP_LOG.exp());
        let c = WeightSequence::gevrey(0.5, 200).unwrap().conjugate();
        assert!(check_moderate_growth(&c).holds);
    }

    #[test]
    fn root_constant_correspondence() {
        for s in [0.25, 0.5, 0.75] {
            let rc = root_almost_decreasing_constants(&WeightSequence::gevrey(s, 400).unwrap());
            assert!(rc.a <= 2.0 * std::f64::consts::E * rc.h + 1e-9);
            assert!(rc.h <= rc.a + 1e-9);
        }
    }

    #[test]
    fn root_proxies() {
        assert!(root_diverges(&WeightSequence::gevrey(0.5, 400).unwrap()));
        assert!(!root_diverges(&WeightSequence::from_log_values(vec![0.0; 401]).unwrap()));
        assert!(small_root_vanishes(&WeightSequence::gevrey(0.5, 400).unwrap()));
        assert!(!small_root_vanishes(&WeightSequence::gevrey(1.0, 400).unwrap()));
        assert!(!small_root_vanishes(&WeightSequence::gevrey(1.5, 400).unwrap()));
        assert!(standard_log_convex(&WeightSequence::gevrey(1.0, 400).unwrap()).holds());
        assert!(is_strongly_log_convex(&WeightSequence::gevrey(2.0, 100).unwrap()));
        assert!(!is_strongly_log_convex(&WeightSequence::gevrey(0.5, 100).unwrap()));
    }
}
