use super::{bad_param, Args, Ctx, INEQ_TOL, TRANSFORM_TOL};
use crate::bmt::bmt_report;
use crate::error::Result;
use crate::func::{
    associated, conjugate, envelope_lower, envelope_upper_of_sequences, relation_fn, slowly_varying_sequence_test,
    FunctionRelationKind, GridSpec, WeightFunction, Window,
};
use crate::numeric::{bounded_above, log_space};
use crate::seq::{
    almost_decreasing_regularize, check_moderate_growth, is_log_convex, is_strongly_log_convex, normalize_head,
    relation, root_almost_decreasing_constants, root_diverges, small_root_vanishes, uniform_bound, RelationKind,
    UniformBoundOptions, WeightSequence, DEFAULT_P0, DEFAULT_P_MAX,
};

const SAMPLES: usize = 128;

fn gevrey(s: f64, p_max: usize) -> Result<WeightSequence> {
    WeightSequence::gevrey(s, p_max).map_err(bad_param)
}

fn p0_for(m: &WeightSequence) -> usize {
    DEFAULT_P0.min(m.p_max() / 2).max(1)
}

fn scaled(f: &WeightFunction, k: f64, ts: &[f64]) -> Vec<f64> {
    f.eval_many(&ts.iter().map(|t| k * t).collect::<Vec<_>>())
}

/// `log max_j M_j / (h^j N_j)` over the common prefix, the constant in
/// `ω_N(t) ≤ ω_M(ht) + c` that follows from `M_j ≤ C h^j N_j`.
fn prefix_constant(m: &WeightSequence, n: &WeightSequence, h: f64) -> f64 {
    let lh = h.ln();
    m.log_values()
        .iter()
        .zip(n.log_values())
        .enumerate()
        .map(|(j, (a, b))| a - b - j as f64 * lh)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Asserts `lhs(t) ≤ rhs(ht) + c` on `t ∈ [t_lo, t_hi]` with `t_hi` the largest
/// point both sides are trusted at.
#[allow(clippy::too_many_arguments)]
fn scaled_leq(
    ctx: &mut Ctx,
    name: &str,
    lhs: &WeightFunction,
    rhs: &WeightFunction,
    h: f64,
    c: f64,
    t_lo: f64,
    tol: f64,
) {
    let t_hi = lhs.domain_hint().min(rhs.domain_hint() / h);
    if !(t_hi > t_lo) {
        ctx.require(name, h, false, format!("empty sample range [{t_lo:.3e}, {t_hi:.3e}]"));
        return;
    }
    let ts = log_space(t_lo, t_hi, SAMPLES);
    let l = lhs.eval_many(&ts);
    let r: Vec<f64> = scaled(rhs, h, &ts).iter().map(|v| v + c).collect();
    ctx.leq_all(name, &ts, &l, &r, tol);
}

/// `ω*_M` against `ω_{M*}` through a regularized equivalent sequence.
pub(super) fn bridge(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let s = args.f64("s", 1.0 / 3.0)?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let m = gevrey(s, p_max)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    if !small_root_vanishes(&m) || !is_log_convex(&m).holds {
        ctx.skip("needs M log-convex with (m_p)^(1/p) → 0");
        return Ok(());
    }
    let reg = match almost_decreasing_regularize(&m) {
        Ok(r) => r,
        Err(e) if e.is_precondition() => {
            ctx.skip(format!("μ_p/p is not almost decreasing: {e}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    ctx.witness("regularization_h", reg.h);
    let l = normalize_head(&reg.sequence);
    let conj_l = conjugate(&associated(&l)?, &grid)?;
    let assoc_lstar = associated(&l.conjugate())?;
    let s_hi = 0.5 * conj_l.domain_hint();
    let ss = log_space(1e-2, s_hi, SAMPLES);
    let cv = conj_l.eval_many(&ss);

    let half: Vec<f64> = scaled(&assoc_lstar, 0.5, &ss);
    ctx.leq_all("ω_{L*}(s/2) ≤ ω*_L(s)", &ss, &half, &cv, TRANSFORM_TOL);

    let found = (0..40).map(|k| 2f64.powf(k as f64 / 4.0)).find(|&c| {
        scaled(&assoc_lstar, c, &ss)
            .iter()
            .zip(&cv)
            .all(|(r, l)| *l <= r + 1.0 + TRANSFORM_TOL * (1.0 + r.abs()))
    });
    match found {
        Some(c) => {
            let rhs: Vec<f64> = scaled(&assoc_lstar, c, &ss).iter().map(|v| v + 1.0).collect();
            ctx.leq_all("ω*_L(s) ≤ ω_{L*}(Cs) + 1", &ss, &cv, &rhs, TRANSFORM_TOL);
            ctx.witness("C", c);
        }
        None => ctx.require("ω*_L(s) ≤ ω_{L*}(Cs) + 1", f64::NAN, false, "no C ≤ 2^(39/4) works"),
    }

    // The same two-sided estimate for M itself, with a common (h, D).
    let conj_m = conjugate(&associated(&m)?, &grid)?;
    let assoc_mstar = associated(&m.conjugate())?;
    let ss = log_space(1e-2, 0.5 * conj_m.domain_hint(), SAMPLES);
    let cm = conj_m.eval_many(&ss);
    let hd = (0..40).map(|k| 2f64.powf(k as f64 / 4.0)).find_map(|h| {
        let up: Vec<f64> = cm.iter().zip(scaled(&assoc_mstar, h, &ss)).map(|(a, b)| a - b).collect();
        let down: Vec<f64> = scaled(&assoc_mstar, 1.0 / h, &ss).iter().zip(&cm).map(|(a, b)| a - b).collect();
        let d = up.iter().chain(&down).copied().fold(1.0f64, f64::max);
        (bounded_above(&up, d) && bounded_above(&down, d)).then_some((h, d))
    });
    match hd {
        Some((h, d)) => ctx.witness("h_D", (h, d)),
        None => ctx.require("−D + ω_{M*}(s/h) ≤ ω*_M(s) ≤ ω_{M*}(hs) + D", f64::NAN, false, "no h ≤ 2^(39/4) works"),
    }

    let window = Window::tail_for(&[&assoc_lstar, &conj_l]);
    ctx.set_window(window);
    let v = relation_fn(&assoc_lstar, &conj_l, &window);
    ctx.witness("relation", v.kind);
    for (name, kind) in [("ω_{L*} ∼_c ω*_L", FunctionRelationKind::SimC), ("ω_{L*} ∼ ω*_L", FunctionRelationKind::Sim)] {
        ctx.require(name, f64::NAN, v.holds(kind), format!("relation on the tail window is {:?}", v.kind));
    }
    Ok(())
}

/// The three well-definedness proxies for `ω*_M` and `ω_{M*}` agree.
pub(super) fn conj_welldef_equiv(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let s = args.f64("s", 0.5)?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let m = gevrey(s, p_max)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let vanishes = small_root_vanishes(&m);
    let conj_ok = associated(&m).and_then(|w| conjugate(&w, &grid)).is_ok();
    let assoc_ok = associated(&m.conjugate()).is_ok();
    ctx.witness("small_root_vanishes", vanishes);
    ctx.witness("conjugate_defined", conj_ok);
    ctx.witness("conjugate_sequence_associated_defined", assoc_ok);
    ctx.witness("expected", s < 1.0);
    ctx.require(
        "proxies agree",
        s,
        vanishes == conj_ok && conj_ok == assoc_ok,
        format!("(m_p)^(1/p) → 0: {vanishes}, ω*_M: {conj_ok}, ω_(M*): {assoc_ok}"),
    );
    Ok(())
}

fn relation_holds(
    ctx: &mut Ctx,
    name: &str,
    lhs: &WeightFunction,
    rhs: &WeightFunction,
    kind: FunctionRelationKind,
) {
    let window = Window::tail_for(&[lhs, rhs]);
    ctx.set_window(window);
    let v = relation_fn(lhs, rhs, &window);
    ctx.witness("relation", v.kind);
    ctx.witness("ratio_sup", v.ratio_sup);
    ctx.require(name, f64::NAN, v.holds(kind), format!("relation on the tail window is {:?}", v.kind));
}

/// Largest `|a − b|/(1 + |b|)` on the tail window of both functions.
fn max_deviation(a: &WeightFunction, b: &WeightFunction) -> f64 {
    let ts = Window::tail_for(&[a, b]).points();
    a.eval_many(&ts)
        .iter()
        .zip(b.eval_many(&ts))
        .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
        .fold(0.0f64, f64::max)
}

/// Envelope identities between `ω_M`, `ω_{M*}` and related sequences.
pub(super) fn envelope_id(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let clause = args.choice("clause", &["i", "ii", "iii", "iv", "v"])?;
    let default_s = match clause.as_str() {
        "i" => 1.0 / 3.0,
        "ii" => 2.0,
        "iii" => 0.5,
        "iv" => 0.75,
        _ => 0.25,
    };
    let s = args.f64("s", default_s)?;
    let p_max = args.usize("p_max", 2000)?;
    let m = gevrey(s, p_max)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let id = WeightFunction::identity();
    let lc = |x: &WeightSequence| is_log_convex(x).holds;
    match clause.as_str() {
        "i" => {
            if !(lc(&m) && lc(&m.conjugate()) && small_root_vanishes(&m)) {
                ctx.skip("needs M, M* log-convex and (m_p)^(1/p) → 0");
                return Ok(());
            }
            let e = envelope_lower(&associated(&m)?, &associated(&m.conjugate())?, &grid)?;
            relation_holds(ctx, "ω_M⋆̌ω_{M*} ∼ id", &e, &id, FunctionRelationKind::Sim);
        }
        "ii" => {
            let small = m.small();
            if !(is_strongly_log_convex(&m) && root_diverges(&small)) {
                ctx.skip("needs M strongly log-convex with (m_p)^(1/p) → ∞");
                return Ok(());
            }
            let e = envelope_upper_of_sequences(&m, &small, &grid)?;
            relation_holds(ctx, "ω_M⋆̂ω_{(M*)^(-1)} ∼ id", &e, &id, FunctionRelationKind::Sim);
            let g1 = associated(&gevrey(1.0, p_max)?)?;
            ctx.witness("deviation_from_gevrey_1", max_deviation(&e, &g1));
        }
        "iii" => {
            if !lc(&m) {
                ctx.skip("needs M log-convex");
                return Ok(());
            }
            let top = m.product(&m)?.product(&m.conjugate())?;
            let e = envelope_upper_of_sequences(&top, &m, &grid)?;
            relation_holds(ctx, "ω_{M²M*}⋆̂ω_M ∼ id", &e, &id, FunctionRelationKind::Sim);
        }
        "iv" => {
            let mm = m.product(&m.small())?;
            if !(small_root_vanishes(&m) && root_diverges(&mm) && lc(&m) && lc(&m.conjugate()) && lc(&mm)) {
                ctx.skip("needs (m_p)^(1/p) → 0, (M_p m_p)^(1/p) → ∞ and M, M*, M·m log-convex");
                return Ok(());
            }
            let e = envelope_upper_of_sequences(&m, &m.conjugate(), &grid)?;
            let target = associated(&mm)?;
            relation_holds(ctx, "ω_M⋆̂ω_{M*} ∼_c ω_{M·m}", &e, &target, FunctionRelationKind::SimC);
            ctx.witness("pointwise_deviation", max_deviation(&e, &target));
        }
        _ => {
            let g1 = gevrey(1.0, p_max)?;
            let q = g1.quotient(&m.product(&m)?)?;
            let ok = lc(&m) && small_root_vanishes(&m) && lc(&m.conjugate()) && lc(&q) && root_diverges(&q);
            if !ok {
                ctx.skip("needs M, M*, G¹M⁻² log-convex, (m_p)^(1/p) → 0 and (p!/M_p²)^(1/p) → ∞");
                return Ok(());
            }
            let e = envelope_upper_of_sequences(&m.conjugate(), &m, &grid)?;
            let target = associated(&q)?;
            relation_holds(ctx, "ω_{M*}⋆̂ω_M = ω_{G¹M⁻²}", &e, &target, FunctionRelationKind::SimC);
            ctx.witness("pointwise_deviation", max_deviation(&e, &target));
        }
    }
    Ok(())
}

/// Transfers of `≼` and `◁` between sequences to their associated, conjugate
/// and envelope functions, with the constants read off the prefixes.
pub(super) fn growthrel_seq(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let part = args.choice("part", &["growthrel", "lower", "upper"])?;
    let p_max = args.usize("p_max", 2000)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let g = |s: f64| gevrey(s, p_max);
    let scales = |m: &WeightSequence, n: &WeightSequence| -> Result<Option<Vec<f64>>> {
        let v = relation(m, n, p0_for(m))?;
        Ok(if v.holds(RelationKind::Triangle) {
            Some((0..=10).map(|k| 2f64.powi(-k)).collect())
        } else if v.holds(RelationKind::Preceq) {
            Some(vec![1.0])
        } else {
            None
        })
    };
    let mut constants = Vec::new();
    match part.as_str() {
        "growthrel" => {
            let (m, n) = (g(0.25)?, g(0.75)?);
            if !(is_log_convex(&m).holds && is_log_convex(&n).holds && small_root_vanishes(&n)) {
                ctx.skip("needs M, N log-convex and (n_p)^(1/p) → 0");
                return Ok(());
            }
            let Some(hs) = scales(&m, &n)? else {
                ctx.skip("neither M ≼ N nor M ◁ N");
                return Ok(());
            };
            let (ms, ns) = (associated(&m.conjugate())?, associated(&n.conjugate())?);
            let (cm, cn) = (
                conjugate(&associated(&m)?, &grid)?,
                conjugate(&associated(&n)?, &grid)?,
            );
            for h in hs {
                // N*_j ≤ C h^j M*_j, read off as M_j ≤ C h^j N_j.
                let c = prefix_constant(&m, &n, h);
                scaled_leq(ctx, "ω_{M*}(t) ≤ ω_{N*}(ht) + D", &ms, &ns, h, c, 1e-2, INEQ_TOL);
                scaled_leq(ctx, "ω*_M(s) ≤ ω*_N(hs) + D", &cm, &cn, h, c, 1e-2, TRANSFORM_TOL);
                constants.push((h, c));
            }
        }
        "lower" => {
            let (m, p) = (g(0.25)?, g(0.75)?);
            let (n, q) = (m.clone(), p.clone());
            let (Some(h1), Some(h2)) = (scales(&m, &p)?, scales(&n, &q)?) else {
                ctx.skip("needs M ≼ P and N ≼ Q");
                return Ok(());
            };
            let hs = if h1.len() < h2.len() { h1 } else { h2 };
            let lhs = envelope_lower(&associated(&p)?, &associated(&q)?, &grid)?;
            let rhs = envelope_lower(&associated(&m)?, &associated(&n)?, &grid)?;
            for h in hs {
                let c = prefix_constant(&m, &p, h).max(prefix_constant(&n, &q, h));
                scaled_leq(ctx, "ω_P⋆̌ω_Q(t) ≤ ω_M⋆̌ω_N(h²t) + D", &lhs, &rhs, h * h, 2.0 * c, 1e-2, TRANSFORM_TOL);
                constants.push((h, 2.0 * c));
            }
        }
        _ => {
            let (m, p, n, q) = (g(1.5)?, g(2.0)?, g(1.0)?, g(0.5)?);
            let (Some(h1), Some(h2)) = (scales(&m, &p)?, scales(&q, &n)?) else {
                ctx.skip("needs M ≼ P and Q ≼ N");
                return Ok(());
            };
            let hs = if h1.len() < h2.len() { h1 } else { h2 };
            let lhs = envelope_upper_of_sequences(&p, &q, &grid)?;
            let rhs = envelope_upper_of_sequences(&m, &n, &grid)?;
            for h in hs {
                let c = prefix_constant(&m, &p, h).max(prefix_constant(&q, &n, h));
                scaled_leq(ctx, "ω_P⋆̂ω_Q(t) ≤ ω_M⋆̂ω_N(h²t) + D", &lhs, &rhs, h * h, 2.0 * c, 1e-2, TRANSFORM_TOL);
                constants.push((h, 2.0 * c));
            }
        }
    }
    ctx.witness("h_D", constants);
    Ok(())
}

/// The uniform bound sequence built from a family of small sequences.
pub(super) fn uniform_bound_check(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let family = args.choice("family", &["spread", "literal"])?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let exponents: Vec<f64> = match family.as_str() {
        "literal" => (1..=4).map(|k| -1.0 / (k as f64 + 1.0)).collect(),
        _ => vec![-4.0, -3.0, -2.0, -1.0],
    };
    let lf = crate::numeric::log_factorials(p_max);
    let members = exponents
        .iter()
        .map(|e| {
            WeightSequence::from_log_values(lf.iter().map(|v| (1.0 + e) * v).collect())
                .map(|s| s.named(format!("p!^(1{e:+})")))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(bad_param)?;
    if let Some(bad) = members.iter().find(|m| !small_root_vanishes(m)) {
        ctx.skip(format!("(n_p)^(1/p) → 0 fails for {}", bad.name()));
        return Ok(());
    }
    let ub = uniform_bound(&members, &UniformBoundOptions::default())?;
    let roots = &ub.log_roots;
    let worst_step = roots[1..]
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    ctx.margin("(a_j)^(1/j) non-increasing", f64::NAN, worst_step.min(0.0));
    let last = roots[roots.len() - 1];
    ctx.margin(
        "(a_P)^(1/P) ≤ (a_1)/2",
        f64::NAN,
        (roots[1] + 0.5f64.ln() - last).min(0.0),
    );
    for (k, div) in ub.divergence.iter().enumerate() {
        ctx.require("(a_j/n_j)^(1/j) → ∞", k as f64, *div, format!("member {k}"));
    }
    ctx.witness("breakpoints", &ub.breakpoints);
    ctx.witness("root_ratio", (last - roots[1]).exp());
    Ok(())
}

/// Slowly varying `ω_M` and its sequence-side characterization.
pub(super) fn slowly_varying(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let case = args.choice("case", &["exp_square", "gevrey"])?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let m = match case.as_str() {
        "exp_square" => WeightSequence::from_fn(p_max, |p| (p * p) as f64).map_err(bad_param)?.named("exp(p²)"),
        _ => gevrey(args.f64("s", 1.0)?, p_max)?,
    };
    let v = match slowly_varying_sequence_test(&m) {
        Ok(v) => v,
        Err(e) if e.is_precondition() => {
            ctx.skip(e.to_string());
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    ctx.witness("beta3_holds", v.beta3_holds);
    ctx.witness("ratio_diverges", v.ratio_diverges);
    ctx.witness("slowly_varying", v.slowly_varying);
    ctx.witness("direct_ratios", &v.direct_ratios);
    ctx.witness("direct_extrapolated", v.direct_extrapolated);
    if case == "gevrey" {
        ctx.require("not slowly varying", f64::NAN, !v.slowly_varying, "verdict is slowly varying");
        ctx.require("ratio does not diverge", f64::NAN, !v.ratio_diverges, "ratio diverges");
        return Ok(());
    }
    if v.beta3_holds && v.ratio_diverges {
        ctx.require("slowly varying", f64::NAN, v.slowly_varying, "both conditions hold but the verdict is negative");
    } else {
        ctx.skip("the two sequence conditions do not both hold");
    }
    // On a finite prefix ω_M(ut)/ω_M(t) tends to 1 only slowly; the trend is
    // what is checked: the ratios exceed 1 and shrink as t grows.
    let omega = associated(&m)?;
    let at = |t: f64| -> Vec<f64> { [2.0, 5.0, 10.0].iter().map(|u| omega.eval(u * t) / omega.eval(t)).collect() };
    let (early, late) = (at(1e3), at(1e6));
    for (k, (e, l)) in early.iter().zip(&late).enumerate() {
        ctx.margin("ω(ut)/ω(t) > 1", k as f64, l - 1.0);
        ctx.margin("ω(ut)/ω(t) decreases in t", k as f64, e - l);
    }
    ctx.witness("ratios_at_1e3", early);
    let mg = check_moderate_growth(&m).holds;
    let omega6 = bmt_report(&omega).omega6;
    ctx.witness("moderate_growth", mg);
    ctx.witness("omega6", omega6);
    ctx.require("(mg) fails alongside", f64::NAN, !mg, "M has moderate growth");
    ctx.require("(ω₆) fails alongside", f64::NAN, !omega6, "ω_M satisfies (ω₆)");
    Ok(())
}

/// The constants `H` and `A` of the two root conditions bound each other.
pub(super) fn root_almost_decr(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let s = args.f64("s", 0.5)?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let m = gevrey(s, p_max)?;
    let rc = root_almost_decreasing_constants(&m);
    ctx.witness("H", rc.h);
    ctx.witness("A", rc.a);
    let two_e = 2.0 * std::f64::consts::E;
    ctx.margin("A ≤ 2eH", f64::NAN, (two_e * rc.h - rc.a) / (1.0 + rc.a) + INEQ_TOL);
    ctx.margin("H ≤ A", f64::NAN, (rc.a - rc.h) / (1.0 + rc.a) + INEQ_TOL);
    if is_log_convex(&m).holds && is_log_convex(&m.conjugate()).holds {
        let mg = check_moderate_growth(&m);
        ctx.witness("moderate_growth_constant", mg.witness_c);
        ctx.require("M, M* log-convex ⇒ (mg)", f64::NAN, mg.holds, "(mg) fails");
    } else {
        ctx.witness("corollary", "skipped: M or M* is not log-convex");
    }
    Ok(())
}
