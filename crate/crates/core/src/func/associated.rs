use super::conditions::log_dominated;
use super::{GridSpec, Node, WeightFunction, Window, GOLDEN_ITERS};
use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::{maximize_on_grid, Edge};
use crate::seq::{log_convex_minorant, root_diverges, WeightSequence};

/// Quotient table of the log-convex minorant, shared by the piecewise and
/// the counting-integral evaluators.
pub(crate) struct AssociatedData {
    lv: Vec<f64>,
    /// `log μ_k` for `k = 1..=P`, non-decreasing.
    log_mu: Vec<f64>,
    /// `Σ_{k ≤ p} log μ_k`, summed term by term.
    log_mu_prefix: Vec<f64>,
}

impl AssociatedData {
    fn new(m: &WeightSequence) -> Self {
        let lc = log_convex_minorant(m);
        let lv = lc.log_values().to_vec();
        let log_mu: Vec<f64> = lc.log_quotients()[1..].to_vec();
        let mut log_mu_prefix = Vec::with_capacity(log_mu.len() + 1);
        let mut acc = 0.0;
        log_mu_prefix.push(acc);
        for v in &log_mu {
            acc += v;
            log_mu_prefix.push(acc);
        }
        AssociatedData {
            lv,
            log_mu,
            log_mu_prefix,
        }
    }

    fn count(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let lt = t.ln();
        self.log_mu.partition_point(|&x| x <= lt)
    }

    /// `log M_0 + p log t − log M_p` on `[μ_p, μ_{p+1})`; the last segment
    /// continues past `μ_P`.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        let p = self.count(t);
        if p == 0 {
            return 0.0;
        }
        p as f64 * t.ln() - (self.lv[p] - self.lv[0])
    }

    /// `Σ_{k: μ_k ≤ t} (log t − log μ_k)`.
    pub(crate) fn eval_integral(&self, t: f64) -> f64 {
        let p = self.count(t);
        if p == 0 {
            return 0.0;
        }
        p as f64 * t.ln() - self.log_mu_prefix[p]
    }

    fn hint(&self) -> f64 {
        self.log_mu.last().copied().unwrap_or(0.0).exp()
    }
}

/// `ω_M(t) = sup_p log(M_0 t^p / M_p)`, evaluated exactly on the log-convex
/// minorant by locating `t` among the quotients.
///
/// Requires the root `(M_p)^{1/p}` to diverge on the window, which is what
/// makes `ω_M` a weight function.
pub fn associated(m: &WeightSequence) -> Result<WeightFunction> {
    let data = AssociatedData::new(m);
    if !root_diverges(&log_convex_minorant(m)) {
        return Err(Error::WellDefinedness(format!(
            "root of {} does not diverge on [0, {}]; ω_M needs lim (M_p)^(1/p) = +∞",
            m.name(),
            m.p_max()
        )));
    }
    let hint = data.hint();
    Ok(WeightFunction::from_node(format!("ω_{}", m.name()), hint, Node::Associated(data)))
}

/// `Σ_M(t) = #{p ≥ 1 : μ_p ≤ t}` for the quotients of the log-convex minorant.
pub fn counting(m: &WeightSequence, t: f64) -> usize {
    AssociatedData::new(m).count(t)
}

/// `t ↦ ∫_0^t Σ_M(u)/u du`, computed as a finite sum of logarithms.
pub fn integral_form(m: &WeightSequence) -> WeightFunction {
    let data = AssociatedData::new(m);
    let hint = data.hint();
    WeightFunction::from_node(format!("∫Σ_{}", m.name()), hint, Node::IntegralForm(data))
}

/// Rebuilds `log M_p = log M_0 + sup_t (p log t − ω(t))` for `p = 0..=p_max`.
///
/// For `ω = ω_N` with `N` log-convex this returns `N` (and in general the
/// log-convex minorant). Optima that run off the grid raise a domain error.
pub fn recover_sequence(omega: &WeightFunction, m0: f64, p_max: usize, grid: &GridSpec) -> Result<WeightSequence> {
    grid.validate()?;
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Domain(format!("M_0 must be positive, got {m0}")));
    }
    let window = Window::tail(omega.domain_hint());
    if !log_dominated(omega, &window) {
        return Err(Error::Precondition(format!(
            "log t = o(ω(t)) fails for {} on [{:.3e}, {:.3e}]",
            omega.name(),
            window.t0,
            window.t_max
        )));
    }
    let us = grid.log_points();
    let w = exec::map_slice(&us, |&u| omega.eval(u.exp()));
    let lm0 = m0.ln();
    let w0 = omega.eval(0.0);
    let values: Vec<Result<f64>> = exec::map_range(p_max + 1, |p| {
        if p == 0 {
            return Ok(lm0 - w0);
        }
        let pf = p as f64;
        let table: Vec<f64> = us.iter().zip(&w).map(|(u, v)| pf * u - v).collect();
        let f = |u: f64| pf * u - omega.eval(u.exp());
        let am = maximize_on_grid(&f, &us, &table, Edge::Extend, Edge::Extend, GOLDEN_ITERS);
        if am.at_upper || am.at_lower || !am.value.is_finite() {
            return Err(Error::DomainExhausted(format!(
                "supremum for p = {p} is not attained inside the reachable range of t"
            )));
        }
        Ok(lm0 + am.value)
    });
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(WeightSequence::from_log_values(values)?.named(format!("rec({})", omega.name())))
}
