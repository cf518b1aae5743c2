//! Tail-window proxies for the asymptotic side conditions on weights.

use super::{WeightFunction, Window};
use crate::numeric::vanishing;

/// Tolerance for `ω(0) = 0`.
pub const C1_TOL: f64 = 1e-12;

fn vanishing_ratio(w: &Window, num: impl Fn(f64, f64) -> f64, omega: &WeightFunction) -> bool {
    let ts = w.points();
    let vals = omega.eval_many(&ts);
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ratio: Vec<f64> = ts
        .iter()
        .zip(&vals)
        .map(|(&t, &v)| if v > 0.0 { num(t, v) / v } else { f64::INFINITY })
        .collect();
    vanishing(&log_t, &ratio)
}

/// `ω(0) = 0` within [`C1_TOL`].
pub fn c1_holds(omega: &WeightFunction) -> bool {
    omega.eval(0.0).abs() <= C1_TOL
}

/// `t = o(ω(t))`: the conjugate `ω*` is finite everywhere exactly in this case.
pub fn c2_holds(omega: &WeightFunction, w: &Window) -> bool {
    vanishing_ratio(w, |t, _| t, omega)
}

/// `log t = o(ω(t))`.
pub fn log_dominated(omega: &WeightFunction, w: &Window) -> bool {
    if w.t0 <= 1.0 {
        return false;
    }
    vanishing_ratio(w, |t, _| t.ln(), omega)
}

/// `ω(t) = o(t)`.
pub fn sublinear(omega: &WeightFunction, w: &Window) -> bool {
    let ts = w.points();
    let vals = omega.eval_many(&ts);
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ratio: Vec<f64> = ts.iter().zip(&vals).map(|(&t, &v)| v / t).collect();
    vanishing(&log_t, &ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ClosedForm;

    #[test]
    fn proxies_on_closed_forms() {
        let w = Window::default();
        let sq = WeightFunction::power(0.5).unwrap();
        let id = WeightFunction::identity();
        let root = WeightFunction::power(2.0).unwrap();
        let tlog = WeightFunction::closed(ClosedForm::TLog).unwrap();
        let log = WeightFunction::closed(ClosedForm::Log).unwrap();
        assert!(c2_holds(&sq, &w) && c2_holds(&tlog, &w));
        assert!(!c2_holds(&id, &w) && !c2_holds(&root, &w));
        assert!(sublinear(&root, &w) && sublinear(&log, &w));
        assert!(!sublinear(&id, &w) && !sublinear(&sq, &w));
        assert!(log_dominated(&root, &w) && log_dominated(&sq, &w));
        assert!(!log_dominated(&log, &w));
        assert!(c1_holds(&sq));
        assert!(!c1_holds(&WeightFunction::closed(ClosedForm::ExpLogSquared).unwrap()));
    }
}
