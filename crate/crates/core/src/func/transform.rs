use super::associated::associated;
use super::conditions::{c1_holds, c2_holds};
use super::relation::{relation_fn, FunctionRelationKind};
use super::{GridSpec, Node, WeightFunction, Window, GOLDEN_ITERS};
use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::{maximize_on_grid, Edge};
use crate::seq::{is_log_convex, relation, RelationKind, WeightSequence, DEFAULT_P0};

/// Inner function tabulated on `u = log t` for `ω*(s) = sup_t {st − ω(t)}`.
pub(crate) struct ConjugateData {
    inner: WeightFunction,
    us: Vec<f64>,
    ts: Vec<f64>,
    values: Vec<f64>,
    at_zero: f64,
    /// Nodes of a sampled `ω`; its interpolant is piecewise linear, so on the
    /// sampled range the supremum is attained at one of them.
    nodes: Option<(Vec<f64>, Vec<f64>)>,
}

impl ConjugateData {
    pub(crate) fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.at_zero;
        }
        let table: Vec<f64> = self.ts.iter().zip(&self.values).map(|(t, w)| s * t - w).collect();
        let f = |u: f64| {
            let t = u.exp();
            s * t - self.inner.eval(t)
        };
        let am = maximize_on_grid(&f, &self.us, &table, Edge::Extend, Edge::Extend, GOLDEN_ITERS);
        if am.at_upper {
            return f64::INFINITY;
        }
        let at_nodes = self.nodes.as_ref().map_or(f64::NEG_INFINITY, |(ts, vs)| {
            ts.iter().zip(vs).map(|(t, v)| s * t - v).fold(f64::NEG_INFINITY, f64::max)
        });
        am.value.max(at_nodes).max(self.at_zero)
    }
}

/// `ω*(s) = sup_{t ≥ 0} {st − ω(t)}` by grid scan plus golden-section refinement.
///
/// Fails with a well-definedness error unless `t/ω(t) → 0` on the tail
/// window, since `ω*` is finite everywhere exactly when `t = o(ω(t))`.
/// The scan stops at the domain hint of `ω`; values of `s` whose optimum lies
/// beyond it come back as `+∞`, and the hint of the result marks where that starts.
/// For `ω(0) ≠ 0` the result is still built and `ω*(0) = −ω(0)` is negative.
pub fn conjugate(omega: &WeightFunction, grid: &GridSpec) -> Result<WeightFunction> {
    grid.validate()?;
    let window = Window::tail(omega.domain_hint());
    if !c2_holds(omega, &window) {
        return Err(Error::WellDefinedness(format!(
            "t/ω(t) does not vanish for {} on [{:.3e}, {:.3e}]; ω*(s) < +∞ for all s ≥ 0 iff t = o(ω(t))",
            omega.name(),
            window.t0,
            window.t_max
        )));
    }
    let d = omega.domain_hint();
    let us = reachable(grid, d).log_points();
    let ts: Vec<f64> = us.iter().map(|u| u.exp()).collect();
    let values = omega.eval_many(&ts);
    let hint = if d.is_finite() {
        (omega.eval(d) - omega.eval(0.5 * d)) / (0.5 * d)
    } else {
        f64::INFINITY
    };
    let data = ConjugateData {
        inner: omega.clone(),
        us,
        ts,
        values,
        at_zero: -omega.eval(0.0),
        nodes: omega.samples().map(|(t, v)| (t.to_vec(), v.to_vec())),
    };
    Ok(WeightFunction::from_node(format!("{}*", omega.name()), hint, Node::Conjugate(data)))
}

/// Clips the scan grid to the range where `ω` is known rather than extrapolated.
/// Past that range an associated function of a finite prefix grows only like
/// `P log t`, which would make every supremum run off to infinity.
fn reachable(grid: &GridSpec, domain_hint: f64) -> GridSpec {
    if !(domain_hint < grid.t_max) {
        return *grid;
    }
    let t_max = domain_hint;
    let t_min = grid.t_min.min(t_max * 1e-6);
    GridSpec { t_min, t_max, n: grid.n }
}

/// `ω** = (ω*)*`; requires `ω(0) = 0` in addition to the conjugate's condition.
pub fn biconjugate(omega: &WeightFunction, grid: &GridSpec) -> Result<WeightFunction> {
    if !c1_holds(omega) {
        return Err(Error::Precondition(format!(
            "{} has ω(0) = {} ≠ 0",
            omega.name(),
            omega.eval(0.0)
        )));
    }
    conjugate(&conjugate(omega, grid)?, grid)
}

/// Shared data of both Legendre envelopes: `σ` tabulated on `u = log s`.
pub(crate) struct EnvelopeData {
    sigma: WeightFunction,
    tau: WeightFunction,
    us: Vec<f64>,
    sigma_values: Vec<f64>,
}

impl EnvelopeData {
    fn new(sigma: &WeightFunction, tau: &WeightFunction, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let us = reachable(grid, sigma.domain_hint()).log_points();
        let sigma_values = exec::map_slice(&us, |&u| sigma.eval(u.exp()));
        Ok(EnvelopeData {
            sigma: sigma.clone(),
            tau: tau.clone(),
            us,
            sigma_values,
        })
    }

    /// `inf_{s > 0} {σ(s) + τ(t/s)}`.
    pub(crate) fn eval_lower(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.sigma.eval(0.0) + self.tau.eval(0.0);
        }
        let table: Vec<f64> = self
            .us
            .iter()
            .zip(&self.sigma_values)
            .map(|(u, sv)| -(sv + self.tau.eval(t * (-u).exp())))
            .collect();
        let f = |u: f64| -(self.sigma.eval(u.exp()) + self.tau.eval(t * (-u).exp()));
        let am = maximize_on_grid(&f, &self.us, &table, Edge::Extend, Edge::Extend, GOLDEN_ITERS);
        -am.value
    }

    /// `sup_{s ≥ 0} {σ(s) − τ(s/t)}`.
    pub(crate) fn eval_upper(&self, t: f64) -> f64 {
        let at_zero = self.sigma.eval(0.0) - self.tau.eval(0.0);
        if t <= 0.0 {
            return at_zero;
        }
        let table: Vec<f64> = self
            .us
            .iter()
            .zip(&self.sigma_values)
            .map(|(u, sv)| sv - self.tau.eval(u.exp() / t))
            .collect();
        let f = |u: f64| {
            let s = u.exp();
            self.sigma.eval(s) - self.tau.eval(s / t)
        };
        let am = maximize_on_grid(&f, &self.us, &table, Edge::Extend, Edge::Extend, GOLDEN_ITERS);
        if am.at_upper {
            return f64::INFINITY;
        }
        am.value.max(at_zero)
    }
}

/// Lower Legendre envelope `σ ⋆̌ τ`.
///
/// When both inputs have finite domain hints the result is trusted up to
/// their product, the reach of `ω_M ⋆̌ ω_N = ω_{M·N}`.
pub fn envelope_lower(sigma: &WeightFunction, tau: &WeightFunction, grid: &GridSpec) -> Result<WeightFunction> {
    let data = EnvelopeData::new(sigma, tau, grid)?;
    let (a, b) = (sigma.domain_hint(), tau.domain_hint());
    let hint = if a.is_finite() && b.is_finite() { a * b } else { a.min(b) };
    Ok(WeightFunction::from_node(
        format!("({})⋆̌({})", sigma.name(), tau.name()),
        hint,
        Node::EnvelopeLower(data),
    ))
}

/// Upper Legendre envelope `σ ⋆̂ τ`, with `σ ⋆̂ τ(0) = σ(0) − τ(0)`.
///
/// The supremum is finite for every `t` exactly when `τ ◁_c σ`; that relation
/// is checked on the common tail window and the construction is refused when
/// it fails there.
pub fn envelope_upper(sigma: &WeightFunction, tau: &WeightFunction, grid: &GridSpec) -> Result<WeightFunction> {
    envelope_upper_on(sigma, tau, grid, &Window::tail_for(&[sigma, tau]))
}

/// [`envelope_upper`] with the finiteness test run on a caller-chosen window.
pub fn envelope_upper_on(
    sigma: &WeightFunction,
    tau: &WeightFunction,
    grid: &GridSpec,
    window: &Window,
) -> Result<WeightFunction> {
    let v = relation_fn(tau, sigma, window);
    if !v.holds(FunctionRelationKind::TriangleC) {
        return Err(Error::WellDefinedness(format!(
            "{} ◁_c {} fails on [{:.3e}, {:.3e}]; σ⋆̂τ is finite iff τ ◁_c σ",
            tau.name(),
            sigma.name(),
            window.t0,
            window.t_max
        )));
    }
    upper_unchecked(sigma, tau, grid)
}

/// Upper Legendre envelope `ω_M ⋆̂ ω_N` of two associated functions.
///
/// Finiteness is decided on the sequences instead of the functions: for
/// log-convex `N` the envelope is finite exactly when `N ◁ M`, and that
/// relation is read off the prefixes with [`relation`]. This avoids the
/// function-level test, whose smallest scale `h = 2^{-10}` needs a tail far
/// longer than the finite prefixes reach.
pub fn envelope_upper_of_sequences(m: &WeightSequence, n: &WeightSequence, grid: &GridSpec) -> Result<WeightFunction> {
    if !is_log_convex(n).holds {
        return Err(Error::Precondition(format!("{} is not log-convex", n.name())));
    }
    let p0 = DEFAULT_P0.min(m.p_max() / 2).max(1);
    if !relation(n, m, p0)?.holds(RelationKind::Triangle) {
        return Err(Error::WellDefinedness(format!(
            "{} ◁ {} fails on [{p0}, {}]; ω_M⋆̂ω_N is finite iff N ◁ M",
            n.name(),
            m.name(),
            m.p_max()
        )));
    }
    upper_unchecked(&associated(m)?, &associated(n)?, grid)
}

/// The trusted range is `hint(σ)/hint(τ)` when both are finite, the reach of
/// `ω_M ⋆̂ ω_N = ω_{M/N}`.
fn upper_unchecked(sigma: &WeightFunction, tau: &WeightFunction, grid: &GridSpec) -> Result<WeightFunction> {
    let data = EnvelopeData::new(sigma, tau, grid)?;
    let (a, b) = (sigma.domain_hint(), tau.domain_hint());
    let hint = if a.is_finite() && b.is_finite() { a / b } else { a.min(b) };
    Ok(WeightFunction::from_node(
        format!("({})⋆̂({})", sigma.name(), tau.name()),
        hint,
        Node::EnvelopeUpper(data),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_space;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn square_is_self_conjugate_up_to_a_factor() {
        let sq = WeightFunction::power(0.5).unwrap();
        let c = conjugate(&sq, &GridSpec::default()).unwrap();
        for s in log_space(1e-2, 1e4, 64) {
            assert!(rel(c.eval(s), s * s / 4.0) < 1e-10, "s = {s}");
        }
        assert_eq!(c.eval(0.0), 0.0);
    }

    #[test]
    fn identity_has_no_conjugate() {
        assert!(matches!(
            conjugate(&WeightFunction::identity(), &GridSpec::default()),
            Err(Error::WellDefinedness(_))
        ));
    }

    #[test]
    fn biconjugate_of_convex_powers() {
        for alpha in [0.5, 0.75] {
            let w = WeightFunction::power(alpha).unwrap();
            let bb = biconjugate(&w, &GridSpec::default()).unwrap();
            for t in log_space(1.0, 1e4, 32) {
                assert!(rel(bb.eval(t), w.eval(t)) < 1e-6, "alpha = {alpha}, t = {t}");
            }
        }
    }

    #[test]
    fn lower_envelope_of_identities() {
        let id = WeightFunction::identity();
        let e = envelope_lower(&id, &id, &GridSpec::default()).unwrap();
        for t in log_space(1e-1, 1e6, 40) {
            assert!(rel(e.eval(t), 2.0 * t.sqrt()) < 1e-9, "t = {t}");
        }
        assert_eq!(e.eval(0.0), 0.0);
        let sq = WeightFunction::power(0.5).unwrap();
        let a = envelope_lower(&sq, &id, &GridSpec::default()).unwrap();
        let b = envelope_lower(&id, &sq, &GridSpec::default()).unwrap();
        for t in log_space(1.0, 1e5, 20) {
            assert!(rel(a.eval(t), b.eval(t)) < 1e-9);
        }
    }

    #[test]
    fn upper_envelope_precondition() {
        let sq = WeightFunction::power(0.5).unwrap();
        let id = WeightFunction::identity();
        assert!(matches!(
            envelope_upper(&sq, &id, &GridSpec::default()),
            Err(Error::WellDefinedness(_))
        ));
        let root = WeightFunction::power(2.0).unwrap();
        // sup_s {√s − s/t} = t/4
        let e = envelope_upper(&root, &id, &GridSpec::default()).unwrap();
        for t in log_space(1.0, 1e5, 20) {
            assert!(rel(e.eval(t), t / 4.0) < 1e-9, "t = {t}");
        }
        assert_eq!(e.eval(0.0), 0.0);
    }

    #[test]
    fn sequence_envelope_reproduces_quotient_function() {
        // ω_{G²} ⋆̂ ω_{G¹} = ω_{G¹} since all three sequences are log-convex.
        let g2 = WeightSequence::gevrey(2.0, 400).unwrap();
        let g1 = WeightSequence::gevrey(1.0, 400).unwrap();
        let e = envelope_upper_of_sequences(&g2, &g1, &GridSpec::default()).unwrap();
        assert!((e.domain_hint() - 400.0).abs() < 1e-9);
        let w = associated(&g1).unwrap();
        for t in log_space(1.0, 300.0, 40) {
            assert!((e.eval(t) - w.eval(t)).abs() <= 1e-9 * (1.0 + w.eval(t)), "t = {t}");
        }
        assert!(matches!(
            envelope_upper_of_sequences(&g1, &g2, &GridSpec::default()),
            Err(Error::WellDefinedness(_))
        ));
    }
}
