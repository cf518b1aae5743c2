//! Weights in the sense of Braun, Meise and Taylor and their weight matrices.
//!
//! The central object is the Legendre-Fenchel-Young conjugate
//! `φ*(x) = sup_{y ≥ 0} {xy − ω(e^y)}`, which generates the associated weight
//! matrix `W^{(ℓ)}_p = exp(φ*(ℓp)/ℓ)`. On top of it sit the conjugate matrix,
//! the constancy diagnosis, the two sandwich estimates between `ω` and the
//! matrix, and the condition report for `(ω₀)`–`(ω₆)`.

mod matrix;
mod report;

pub use matrix::{
    associated_matrix, classic_sandwich, conjugate_matrix, conjugate_sandwich, constancy_check, default_ells,
    exp_absorb, matrix_invariants, ClassicSandwich, ConjugateSandwich, ConstancyVerdict, ExpAbsorb,
    MatrixInvariants, MemberCheck, ModerateGrowthCheck, PairVerdict, Provenance, WeightMatrix,
};
pub use report::{bmt_report, BmtReport, OMEGA4_TOL};

use crate::error::{Error, Result};
use crate::func::{log_dominated, GridSpec, WeightFunction, Window, GOLDEN_ITERS};
use crate::numeric::{lin_space, maximize_on_grid, Edge};

/// Values of `ω(1)` below this are treated as zero when normalizing.
pub const NORMALIZE_TOL: f64 = 1e-12;

/// `φ_ω(y) = ω(e^y)` tabulated on `y ∈ [0, log t_max]`, reusable for many `x`.
pub struct LegendreTable {
    omega: WeightFunction,
    ys: Vec<f64>,
    phi: Vec<f64>,
}

impl LegendreTable {
    /// Tabulates `φ_ω` after checking `log t = o(ω(t))` on the tail window,
    /// which is what keeps `φ*` finite.
    pub fn new(omega: &WeightFunction, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        if grid.t_max <= 1.0 {
            return Err(Error::Domain(format!("φ* needs t_max > 1, got {}", grid.t_max)));
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
        let ys = lin_space(0.0, grid.t_max.ln(), grid.n);
        let phi = crate::exec::map_slice(&ys, |&y| omega.eval(y.exp()));
        Ok(LegendreTable {
            omega: omega.clone(),
            ys,
            phi,
        })
    }

    /// `φ*(x)` for `x ≥ 0`. The search may walk past `log t_max`; running out
    /// of range is a domain error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("φ* is evaluated at x ≥ 0 only, got {x}")));
        }
        let table: Vec<f64> = self.ys.iter().zip(&self.phi).map(|(y, v)| x * y - v).collect();
        let f = |y: f64| x * y - self.omega.eval(y.exp());
        let am = maximize_on_grid(&f, &self.ys, &table, Edge::Stop, Edge::Extend, GOLDEN_ITERS);
        if am.at_upper || !am.value.is_finite() {
            return Err(Error::DomainExhausted(format!(
                "supremum of x·y − ω(e^y) at x = {x} runs past the reachable range of y"
            )));
        }
        Ok(am.value)
    }
}

/// One-off evaluation of `φ*_ω(x)`; build a [`LegendreTable`] for repeated use.
pub fn phi_star(omega: &WeightFunction, x: f64, grid: &GridSpec) -> Result<f64> {
    LegendreTable::new(omega, grid)?.eval(x)
}

/// `ω̃ = max(0, ω − ω(1))`, which vanishes on `[0, 1]` for non-decreasing `ω`;
/// returned together with the subtracted offset. Already normalized input is
/// passed through unchanged.
pub fn normalized(omega: &WeightFunction) -> (WeightFunction, f64) {
    let w1 = omega.eval(1.0);
    if w1.abs() <= NORMALIZE_TOL {
        (omega.clone(), 0.0)
    } else {
        (omega.shifted_at(1.0), w1)
    }
}
