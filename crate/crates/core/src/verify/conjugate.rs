use super::{bad_param, Args, Ctx, CLOSED_FORM_TOL, INDEX_TOL, INEQ_TOL, TRANSFORM_TOL};
use crate::error::Result;
use crate::func::{
    biconjugate, c1_holds, c2_holds, conjugate, envelope_lower, envelope_upper, gamma_indices, relation_fn,
    FunctionRelationKind, GridSpec, WeightFunction, Window,
};
use crate::numeric::{bounded_above, lin_space, log_space};

fn power(alpha: f64) -> Result<WeightFunction> {
    WeightFunction::power(alpha).map_err(bad_param)
}

/// Numeric conjugate of `id^{1/α}` against `s^{1/(1−α)}(α^{α/(1−α)} − α^{1/(1−α)})`.
pub(super) fn gevrey_conj(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let alpha = args.f64("alpha", 0.5)?;
    let sigma = power(alpha)?;
    let grid = GridSpec::default();
    let window = Window::default();
    ctx.set_grid(grid);
    ctx.set_window(window);
    if !c2_holds(&sigma, &window) {
        ctx.skip(format!("t = o(σ(t)) fails for α = {alpha}"));
        return Ok(());
    }
    let conj = conjugate(&sigma, &grid)?;
    let ss = log_space(1.0, 1e4, 128);
    let numeric = conj.eval_many(&ss);
    let e = 1.0 / (1.0 - alpha);
    let k = alpha.powf(alpha * e) - alpha.powf(e);
    let exact: Vec<f64> = ss.iter().map(|s| k * s.powf(e)).collect();
    ctx.close_all("σ* = closed form", &ss, &numeric, &exact, CLOSED_FORM_TOL);
    let worst = numeric
        .iter()
        .zip(&exact)
        .map(|(a, b)| super::rel_err(*a, *b))
        .fold(0.0f64, f64::max);
    ctx.witness("max_rel_err", worst);
    Ok(())
}

/// Largest midpoint-convexity defect of `ω` on the samples, relative to `1 + |ω|`.
fn convexity_defect(omega: &WeightFunction, ts: &[f64]) -> f64 {
    let v = omega.eval_many(ts);
    v.windows(3)
        .map(|w| (w[1] - 0.5 * (w[0] + w[2])) / (1.0 + w[1].abs()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `ω** = ω` for convex weights with `(C1)`, `(C2)`; `ω** ≤ ω` for a non-convex one.
pub(super) fn biconj_convex(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let case = args.choice("case", &["square", "four_thirds", "nonconvex"])?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let omega = match case.as_str() {
        "square" => power(0.5)?,
        "four_thirds" => power(0.75)?,
        _ => {
            let ts = lin_space(0.0, 100.0, 4001);
            let vs = ts.iter().map(|t| t * t + t * t.sin().powi(2)).collect();
            WeightFunction::sampled(ts, vs)?.named("t²+t·sin²t")
        }
    };
    let window = Window::tail(omega.domain_hint());
    ctx.set_window(window);
    if !c1_holds(&omega) || !c2_holds(&omega, &window) {
        ctx.skip(format!("{} lacks (C1) or (C2)", omega.name()));
        return Ok(());
    }
    let defect = convexity_defect(&omega, &lin_space(0.0, 100.0, 2001));
    ctx.witness("convexity_defect", defect);
    let bb = biconjugate(&omega, &grid)?;
    if case == "nonconvex" {
        let ts = lin_space(1.0, 50.0, 128);
        let lhs = bb.eval_many(&ts);
        let rhs = omega.eval_many(&ts);
        ctx.leq_all("ω** ≤ ω", &ts, &lhs, &rhs, INEQ_TOL);
        let gap = lhs.iter().zip(&rhs).map(|(a, b)| b - a).fold(0.0f64, f64::max);
        ctx.witness("max_gap", gap);
    } else {
        if defect > 1e-12 {
            ctx.skip(format!("{} is not convex on the samples", omega.name()));
            return Ok(());
        }
        let ts = log_space(1.0, 1e3, 128);
        ctx.close_all("ω** = ω", &ts, &bb.eval_many(&ts), &omega.eval_many(&ts), TRANSFORM_TOL);
    }
    Ok(())
}

fn pairwise(ctx: &mut Ctx, name: &str, ts: &[f64], a: &[f64], b: &[f64]) -> f64 {
    ctx.close_all(name, ts, a, b, TRANSFORM_TOL);
    a.iter()
        .zip(b)
        .map(|(x, y)| super::rel_err(*x, *y))
        .fold(0.0f64, f64::max)
}

/// Conjugation turns the lower envelope into an upper one, three ways.
pub(super) fn env_duality(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let sigma = power(args.f64("sigma_alpha", 0.25)?)?;
    let tau = power(args.f64("tau_alpha", 0.3)?)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    if !c1_holds(&sigma) || !c1_holds(&tau) {
        ctx.skip("σ(0) = 0 = τ(0) fails");
        return Ok(());
    }
    let lower = envelope_lower(&sigma, &tau, &grid)?;
    let window = Window::tail(lower.domain_hint());
    ctx.set_window(window);
    if !c2_holds(&lower, &window) {
        ctx.skip("σ⋆̌τ lacks (C2), so (σ⋆̌τ)* is not defined");
        return Ok(());
    }
    let a = envelope_upper(&conjugate(&tau, &grid)?, &sigma, &grid)?;
    let b = conjugate(&lower, &grid)?;
    let c = envelope_upper(&conjugate(&sigma, &grid)?, &tau, &grid)?;
    let d = envelope_upper(&envelope_upper(&WeightFunction::identity(), &tau, &grid)?, &sigma, &grid)?;
    let ts = log_space(1.0, 1e3, 128);
    let (va, vb, vc, vd) = (a.eval_many(&ts), b.eval_many(&ts), c.eval_many(&ts), d.eval_many(&ts));
    let ab = pairwise(ctx, "τ*⋆̂σ = (σ⋆̌τ)*", &ts, &va, &vb);
    let cb = pairwise(ctx, "σ*⋆̂τ = (σ⋆̌τ)*", &ts, &vc, &vb);
    let ac = pairwise(ctx, "τ*⋆̂σ = σ*⋆̂τ", &ts, &va, &vc);
    let cd = pairwise(ctx, "σ*⋆̂τ = (id⋆̂τ)⋆̂σ", &ts, &vc, &vd);
    ctx.witness("max_rel_dev_triple", ab.max(cb).max(ac));
    ctx.witness("max_rel_dev_nested", cd);
    Ok(())
}

/// Index bounds for `σ*` in terms of those of `σ = id^{1/α}`.
pub(super) fn index_transfer(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let alpha = args.f64("alpha", 0.3)?;
    let sigma = power(alpha)?;
    let grid = GridSpec::default();
    let window = Window::default();
    ctx.set_grid(grid);
    ctx.set_window(window);
    if !c1_holds(&sigma) || !c2_holds(&sigma, &window) {
        ctx.skip(format!("id^(1/{alpha}) lacks (C1) or (C2)"));
        return Ok(());
    }
    let star = conjugate(&sigma, &grid)?;
    let is = gamma_indices(&sigma, &window);
    let ic = gamma_indices(&star, &Window::tail(star.domain_hint()));
    ctx.witness("gamma_sigma", is.gamma);
    ctx.witness("gamma_bar_sigma", is.gamma_bar);
    ctx.witness("gamma_star", ic.gamma);
    ctx.witness("gamma_bar_star", ic.gamma_bar);

    ctx.require(
        "γ̄(σ*) < ∞",
        f64::NAN,
        !ic.gamma_bar_saturated,
        "estimator saturated for the conjugate",
    );
    if is.gamma_bar < 1.0 {
        ctx.margin("1 − γ̄(σ) ≤ γ(σ*)", f64::NAN, ic.gamma - (1.0 - is.gamma_bar) + INDEX_TOL);
    }
    if is.gamma > 0.0 && is.gamma < 1.0 {
        ctx.margin("γ̄(σ*) ≤ 1 − γ(σ)", f64::NAN, (1.0 - is.gamma) - ic.gamma_bar + INDEX_TOL);
    }

    // Equalities need σ** ∼ σ; a short window keeps the double transform affordable.
    let short = Window::new(window.t0, window.t_max, 64)?;
    let bb = biconjugate(&sigma, &grid)?;
    let sim = relation_fn(&bb, &sigma, &short).holds(FunctionRelationKind::Sim);
    ctx.witness("biconjugate_equivalent", sim);
    if sim {
        if is.gamma > 0.0 && is.gamma < 1.0 {
            ctx.margin(
                "γ(σ) = 1 − γ̄(σ*)",
                f64::NAN,
                INDEX_TOL - (is.gamma - (1.0 - ic.gamma_bar)).abs(),
            );
        }
        if is.gamma > 0.0 && is.gamma_bar < 1.0 {
            ctx.margin(
                "1 − γ̄(σ) = γ(σ*)",
                f64::NAN,
                INDEX_TOL - ((1.0 - is.gamma_bar) - ic.gamma).abs(),
            );
        }
    }
    // Independent of the estimates for σ: the conjugate of id^{1/α} is a
    // multiple of id^{1/(1−α)}, whose indices are both 1 − α.
    ctx.margin("γ(σ*) ≈ 1 − α", f64::NAN, INDEX_TOL - (ic.gamma - (1.0 - alpha)).abs());
    ctx.margin("γ̄(σ*) ≈ 1 − α", f64::NAN, INDEX_TOL - (ic.gamma_bar - (1.0 - alpha)).abs());
    Ok(())
}

/// `max_s f(s)` and whether `f` stays bounded along the samples.
fn deficit_bound(d: &[f64]) -> (f64, bool) {
    let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (max, max.is_finite() && bounded_above(d, scale))
}

/// Growth relations between `σ` and `τ` turn into inequalities between conjugates.
pub(super) fn rel_transfer(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let sigma = power(args.f64("sigma_alpha", 0.5)?)?;
    let tau = power(args.f64("tau_alpha", 0.75)?)?;
    let grid = GridSpec::default();
    let window = Window::tail_for(&[&sigma, &tau]);
    ctx.set_grid(grid);
    ctx.set_window(window);
    if !c1_holds(&sigma) || !c1_holds(&tau) || !c2_holds(&tau, &window) {
        ctx.skip("needs (C1) for σ, τ and (C2) for τ");
        return Ok(());
    }
    let v = relation_fn(&sigma, &tau, &window);
    ctx.witness("relation", v.kind);
    if !(v.preceq || v.preceq_c) {
        ctx.skip("neither σ ≼ τ nor σ ≼_c τ holds");
        return Ok(());
    }
    let ss_ = conjugate(&sigma, &grid)?;
    let ts_ = conjugate(&tau, &grid)?;
    let ss = log_space(1e-2, 1e9, 256);
    let sv = ss_.eval_many(&ss);
    let scaled = |k: f64| ts_.eval_many(&ss.iter().map(|s| k * s).collect::<Vec<_>>());

    if v.preceq {
        // C σ*(s) ≤ τ*(Cs) + C with the smallest C = 2^k that works.
        let found = (0..=20).map(|k| 2f64.powi(k)).find_map(|c| {
            let rhs: Vec<f64> = scaled(c).iter().map(|t| t + c).collect();
            let lhs: Vec<f64> = sv.iter().map(|s| c * s).collect();
            lhs.iter().zip(&rhs).all(|(a, b)| a <= b).then_some((c, lhs, rhs))
        });
        match found {
            Some((c, lhs, rhs)) => {
                ctx.leq_all("Cσ*(s) ≤ τ*(Cs) + C", &ss, &lhs, &rhs, INEQ_TOL);
                ctx.witness("C", c);
            }
            None => ctx.require("Cσ*(s) ≤ τ*(Cs) + C", f64::NAN, false, "no C ≤ 2^20 works"),
        }
    }
    if v.triangle {
        let mut d_c = Vec::new();
        for k in 1..=10 {
            let c = 2f64.powi(-k);
            let rhs = scaled(c);
            let d: Vec<f64> = sv.iter().zip(&rhs).map(|(s, t)| c * s - t).collect();
            let (max, bounded) = deficit_bound(&d);
            ctx.require("cσ*(s) ≤ τ*(cs) + D_c", c, bounded, format!("deficit unbounded at c = {c}"));
            d_c.push((c, max.max(1.0)));
        }
        ctx.witness("D_c", d_c);
    }
    if v.preceq_c {
        let found = (0..=40).map(|j| 2f64.powf(j as f64 / 4.0)).find_map(|h| {
            let rhs = scaled(h);
            let d: Vec<f64> = sv.iter().zip(&rhs).map(|(s, t)| s - t).collect();
            let (max, bounded) = deficit_bound(&d);
            bounded.then_some((h, max.max(1.0)))
        });
        match found {
            Some((h, c)) => ctx.witness("h_C", (h, c)),
            None => ctx.require("σ*(s) ≤ τ*(hs) + C", f64::NAN, false, "no h ≤ 1024 works"),
        }
    }
    if v.triangle_c {
        let mut c_h = Vec::new();
        for k in 1..=10 {
            let h = 2f64.powi(-k);
            let rhs = scaled(h);
            let d: Vec<f64> = sv.iter().zip(&rhs).map(|(s, t)| s - t).collect();
            let (max, bounded) = deficit_bound(&d);
            ctx.require("σ*(s) ≤ τ*(hs) + C_h", h, bounded, format!("deficit unbounded at h = {h}"));
            c_h.push((h, max.max(1.0)));
        }
        ctx.witness("C_h", c_h);
    }
    Ok(())
}
