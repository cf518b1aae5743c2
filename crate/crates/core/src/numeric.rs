//! Numerical kernels shared by every layer: the log-factorial table, log-spaced
//! grids, golden-section refinement with grid-edge extension, and the
//! tail-window statistics used by the finite-window verdicts.

/// Relative threshold below which a ratio counts as "small" in vanishing tests.
pub const EPS_TRIANGLE: f64 = 0.05;

/// Minimal log-log slope magnitude that counts as a genuine trend on a window.
///
/// Bounded ratios that settle like `log p / p` (Stirling-type corrections)
/// still show slopes near `0.025` at `p ≈ 300`, so the threshold sits above that.
pub const SLOPE_TOL: f64 = 0.05;

/// Allowed increase of a minimal almost-monotone witness (in log units) when
/// the window doubles; larger growth means the witness is not bounded.
pub const GROWTH_TOL: f64 = 0.01;

/// Upper limit for the log variable during grid-edge extension (`t ≈ 1e300`).
pub const LOG_T_LIMIT: f64 = 690.0;

/// Cumulative table `lf[p] = log p!` for `p = 0..=n`.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// `n` points equally spaced in log scale between `a` and `b` (inclusive).
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    lin_space(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// `n` equally spaced points between `a` and `b` (inclusive).
pub fn lin_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
///
/// Returns the best visited abscissa and value, so the result never falls
/// below the values at the probe points.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = sanitize(f(x1));
    let mut f2 = sanitize(f(x2));
    let (mut best_x, mut best_v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = sanitize(f(x1));
            if f1 > best_v {
                best_v = f1;
                best_x = x1;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = sanitize(f(x2));
            if f2 > best_v {
                best_v = f2;
                best_x = x2;
            }
        }
    }
    (best_x, best_v)
}

/// What to do when the grid maximum sits on a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// Keep walking outward with doubling steps until the objective drops.
    Extend,
    /// Treat the boundary as a hard constraint.
    Stop,
}

/// Location and value of a refined maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Argmax {
    pub arg: f64,
    pub value: f64,
    /// The optimum is pinned at (or ran past) the lower end.
    pub at_lower: bool,
    /// The optimum is pinned at (or ran past) the upper end.
    pub at_upper: bool,
}

/// Maximizes `f` given its values on the uniform grid `us`, then refines the
/// best cell with golden-section search.
///
/// `values[i]` must equal `f(us[i])`; callers pass cached tables here.
pub fn maximize_on_grid<F: Fn(f64) -> f64>(
    f: &F,
    us: &[f64],
    values: &[f64],
    lower: Edge,
    upper: Edge,
    iters: usize,
) -> Argmax {
    let n = us.len();
    assert!(n >= 3 && values.len() == n, "grid needs at least three points");
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        let v = sanitize(v);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    if best_v == f64::NEG_INFINITY {
        return Argmax {
            arg: us[0],
            value: f64::NEG_INFINITY,
            at_lower: true,
            at_upper: false,
        };
    }
    let h = us[1] - us[0];
    let mut at_lower = false;
    let mut at_upper = false;
    let (a, b) = if best == n - 1 {
        match upper {
            Edge::Stop => {
                at_upper = true;
                (us[n - 2], us[n - 1])
            }
            Edge::Extend => {
                let (a, b, ran_out) = walk(f, us[n - 2], us[n - 1], best_v, h);
                at_upper = ran_out;
                (a, b)
            }
        }
    } else if best == 0 {
        match lower {
            Edge::Stop => {
                at_lower = true;
                (us[0], us[1])
            }
            Edge::Extend => {
                let (a, b, ran_out) = walk(f, us[1], us[0], best_v, -h);
                at_lower = ran_out;
                (a, b)
            }
        }
    } else {
        (us[best - 1], us[best + 1])
    };
    let (x, v) = golden_max(f, a, b, iters);
    let (arg, value) = if v > best_v { (x, v) } else { (us[best], best_v) };
    Argmax {
        arg,
        value,
        at_lower,
        at_upper,
    }
}

/// Walks from `cur` in steps of `step` (doubling) while `f` keeps increasing.
/// Returns a bracket and whether the walk hit the global limit.
fn walk<F: Fn(f64) -> f64>(f: &F, prev: f64, cur: f64, cur_v: f64, step: f64) -> (f64, f64, bool) {
    let (mut prev, mut cur, mut cur_v, mut step) = (prev, cur, cur_v, step);
    loop {
        let next = cur + step;
        if next.abs() > LOG_T_LIMIT {
            return (prev.min(cur), prev.max(cur), true);
        }
        let v = sanitize(f(next));
        if v > cur_v {
            prev = cur;
            cur = next;
            cur_v = v;
            step *= 2.0;
        } else {
            return (prev.min(next), prev.max(next), false);
        }
    }
}

/// Maxima of the four consecutive quarters of `xs`.
pub fn quarter_maxima(xs: &[f64]) -> [f64; 4] {
    let n = xs.len();
    let mut out = [f64::NEG_INFINITY; 4];
    for (i, q) in out.iter_mut().enumerate() {
        let lo = i * n / 4;
        let hi = ((i + 1) * n / 4).max(lo + 1).min(n);
        *q = xs[lo..hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    out
}

/// Strict decrease of consecutive entries.
pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `ys` against `xs`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Decides whether a sampled series looks bounded above as the window grows.
///
/// Accepts when the last quarter does not exceed the earlier maximum by more
/// than a scale-relative tolerance, or when the series increases but its
/// increments shrink at least geometrically (approach to an asymptote).
pub fn bounded_above(d: &[f64], scale: f64) -> bool {
    bounded_with_shrink(d, scale, 0.5)
}

/// Exponent `κ` such that increments decaying like `t^{−κ}` count as an
/// approach to an asymptote in [`bounded_above_log`].
pub const INCREMENT_DECAY: f64 = 0.3;

/// [`bounded_above`] for samples at known log-abscissae.
///
/// The required shrink factor of successive increments follows the spacing:
/// increments must decay at least like `t^{−κ}` with `κ = INCREMENT_DECAY`.
/// On a window spanning four decades this is the fixed factor 1/2 used by
/// [`bounded_above`]; short windows need less shrinkage per quarter.
pub fn bounded_above_log(log_x: &[f64], d: &[f64], scale: f64) -> bool {
    let n = d.len();
    if n < 8 || log_x.len() != n {
        return bounded_above(d, scale);
    }
    let quarter = log_x[n - 1] - log_x[3 * n / 4];
    bounded_with_shrink(d, scale, (-INCREMENT_DECAY * quarter).exp())
}

fn bounded_with_shrink(d: &[f64], scale: f64, shrink: f64) -> bool {
    let n = d.len();
    if n < 8 {
        return d.iter().all(|v| v.is_finite());
    }
    if d.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return false;
    }
    let tol = 1e-3 * (1.0 + scale.abs());
    let head = d[..3 * n / 4].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = d[3 * n / 4..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if tail <= head + tol {
        return true;
    }
    let a = d[n / 2];
    let b = d[3 * n / 4];
    let c = d[n - 1];
    let inc_prev = b - a;
    let inc_last = c - b;
    inc_prev > 0.0 && inc_last <= shrink * inc_prev
}

/// Decides whether a positive ratio sampled at increasing log-abscissae tends to zero.
///
/// Requires strictly decreasing quarter maxima and either a small final value
/// or a clearly negative log-log slope over the second half that does not
/// flatten out towards a positive limit.
pub fn vanishing(log_x: &[f64], ratio: &[f64]) -> bool {
    let n = ratio.len();
    if n < 8 || ratio.iter().any(|r| r.is_nan()) {
        return false;
    }
    if !strictly_decreasing(&quarter_maxima(ratio)) {
        return false;
    }
    let last = ratio[n - 1];
    if last <= EPS_TRIANGLE {
        return true;
    }
    // A ratio settling at a positive limit has −log(ratio) approaching an asymptote.
    let neg_log: Vec<f64> = ratio.iter().map(|r| -r.max(1e-300).ln()).collect();
    if bounded_above_log(log_x, &neg_log, 0.0) {
        return false;
    }
    let half = n / 2;
    regression_slope(&log_x[half..], &neg_log[half..]) >= SLOPE_TOL
}

/// Log-log slope over the second half of a positive series.
pub fn tail_log_slope(log_x: &[f64], ys: &[f64]) -> f64 {
    let half = ys.len() / 2;
    let ly: Vec<f64> = ys[half..].iter().map(|r| r.max(1e-300).ln()).collect();
    regression_slope(&log_x[half..], &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factorial_matches_direct_product() {
        let lf = log_factorials(20);
        let mut prod = 1.0f64;
        for (p, v) in lf.iter().enumerate().skip(1) {
            prod *= p as f64;
            assert!((v - prod.ln()).abs() < 1e-12);
        }
        assert_eq!(lf[0], 0.0);
    }

    #[test]
    fn log_space_endpoints_are_exact() {
        let g = log_space(1e-2, 1e8, 2048);
        assert_eq!(g.len(), 2048);
        assert!((g[0] - 1e-2).abs() < 1e-16);
        assert!((g[2047] - 1e8).abs() < 1e-6);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(&|x: f64| -(x - 0.3).powi(2) + 2.0, -1.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_maximum_extends_past_upper_edge() {
        let f = |u: f64| -(u - 30.0).powi(2);
        let us = lin_space(0.0, 10.0, 101);
        let vals: Vec<f64> = us.iter().map(|&u| f(u)).collect();
        let r = maximize_on_grid(&f, &us, &vals, Edge::Stop, Edge::Extend, 80);
        assert!((r.arg - 30.0).abs() < 1e-6);
        assert!(!r.at_upper);
        let r = maximize_on_grid(&f, &us, &vals, Edge::Stop, Edge::Stop, 80);
        assert!(r.at_upper);
    }

    #[test]
    fn bounded_and_vanishing_classifiers() {
        let xs = lin_space(0.0, 10.0, 200);
        let grow: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let settle: Vec<f64> = xs.iter().map(|x| 1.0 - (-x).exp()).collect();
        let osc: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        assert!(!bounded_above(&grow, 1.0));
        assert!(bounded_above(&settle, 1.0));
        assert!(bounded_above(&osc, 10.0));
        let decay: Vec<f64> = xs.iter().map(|x| (-0.5 * x).exp()).collect();
        assert!(vanishing(&xs, &decay));
        let flat = vec![1.0; 200];
        assert!(!vanishing(&xs, &flat));
    }

    #[test]
    fn spacing_aware_boundedness() {
        // 1 − t^{−1/2} settles while log t does not, on a short and a long window.
        for (a, b) in [(5.0f64, 30.0f64), (1e3, 1e7)] {
            let lx: Vec<f64> = lin_space(a.ln(), b.ln(), 256);
            let settle: Vec<f64> = lx.iter().map(|l| 1.0 - (-0.5 * l).exp()).collect();
            assert!(bounded_above_log(&lx, &settle, 1.0), "[{a}, {b}]");
            assert!(!bounded_above_log(&lx, &lx, 1.0), "[{a}, {b}]");
            let to_one: Vec<f64> = lx.iter().map(|l| 1.0 + (-0.5 * l).exp()).collect();
            assert!(!vanishing(&lx, &to_one), "[{a}, {b}]");
            let power: Vec<f64> = lx.iter().map(|l| (-0.2 * l).exp()).collect();
            assert!(vanishing(&lx, &power), "[{a}, {b}]");
        }
    }

    #[test]
    fn regression_slope_recovers_line() {
        let xs = lin_space(0.0, 1.0, 50);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((regression_slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }
}
