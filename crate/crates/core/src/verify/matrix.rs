use super::{bad_param, Args, Ctx, INEQ_TOL};
use crate::bmt::{
    associated_matrix, bmt_report, classic_sandwich, conjugate_matrix, conjugate_sandwich, constancy_check,
    default_ells, exp_absorb, matrix_invariants, normalized,
};
use crate::error::{Error, Result};
use crate::func::{
    associated, c2_holds, conjugate, log_dominated, relation_fn, ClosedForm, FunctionRelationKind, GridSpec,
    WeightFunction, Window,
};
use crate::seq::DEFAULT_P_MAX;

fn power(alpha: f64) -> Result<WeightFunction> {
    WeightFunction::power(alpha).map_err(bad_param)
}

const SANDWICH_ELLS: [f64; 3] = [0.5, 1.0, 2.0];

/// `ω` against the associated functions of its matrix, directly and after conjugation.
pub(super) fn bmt_sandwich(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let omega = power(args.f64("alpha", 0.5)?)?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let report = bmt_report(&omega);
    ctx.set_window(report.window);
    if !(report.omega0 && report.omega3 && report.omega4 && report.c2) {
        ctx.skip(format!("{} lacks one of (ω₀), (ω₃), (ω₄), (C2)", omega.name()));
        return Ok(());
    }
    let ells = default_ells();
    let mat = associated_matrix(&omega, &ells, p_max, &grid)?;
    let inv = matrix_invariants(&mat, 200);
    ctx.require("matrix invariants", f64::NAN, inv.holds(), format!("{inv:?}"));

    let mut d_ells = Vec::new();
    for ell in SANDWICH_ELLS {
        let cs = classic_sandwich(&omega, &mat, ell)?;
        ctx.margin("ℓ ω_{W^(ℓ)} ≤ ω", ell, cs.lower_margin + INEQ_TOL);
        ctx.require("ω ≤ 2ℓ ω_{W^(ℓ)} + D_ℓ", ell, cs.bounded, "deficit unbounded");
        let js = conjugate_sandwich(&omega, &mat, ell, cs.d_ell, &grid)?;
        ctx.margin("ω*(ℓs)/ℓ ≤ ω*_{W^(ℓ)}(s)", ell, js.lower_margin + INEQ_TOL);
        ctx.margin("ω*_{W^(ℓ)}(s) ≤ (ω*(2ℓs) + D_ℓ)/(2ℓ)", ell, js.upper_margin + INEQ_TOL);
        d_ells.push((ell, cs.d_ell));
    }
    ctx.witness("D_ell", d_ells);

    let cv = constancy_check(&mat, Some(&omega))?;
    ctx.witness("constant", cv.constant);
    ctx.require("matrix is constant", f64::NAN, cv.constant, "members are pairwise inequivalent");
    ctx.require(
        "constancy agrees with (ω₆)",
        f64::NAN,
        cv.consistent == Some(true),
        format!("constant = {}, (ω₆) = {:?}", cv.constant, cv.omega6),
    );

    // With γ̄ < 1 the conjugates of ω, of ω_W and ω_{W*} are all equivalent.
    if report.indices.gamma_bar < 0.95 {
        let (w, _) = normalized(&omega);
        let ws = conjugate(&w, &grid)?;
        let member = mat.member(1.0).ok_or_else(|| Error::Domain("ℓ = 1 missing".into()))?;
        let wws = conjugate(&associated(member)?, &grid)?;
        let wcs = associated(&member.conjugate())?;
        let pairs = [
            ("ω* ∼ ω*_W", &ws, &wws, FunctionRelationKind::Sim),
            ("ω*_W ∼_c ω_{W*}", &wws, &wcs, FunctionRelationKind::SimC),
        ];
        for (name, a, b, kind) in pairs {
            let v = relation_fn(a, b, &Window::tail_for(&[a, b]));
            ctx.require(name, f64::NAN, v.holds(kind), format!("{:?}", v.kind));
        }
    }
    Ok(())
}

/// Constancy of the matrix matches `(ω₆)`, and survives conjugation.
pub(super) fn matrix_const(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let which = args.choice("omega", &["square", "log_squared"])?;
    // φ(y) = y² puts the maximizer of xy − φ(y) at y = x/2, so the matrix of
    // log² needs y up to ℓP/2 rather than the default log 10^8.
    let (omega, default_p, grid) = match which.as_str() {
        "square" => (power(0.5)?, DEFAULT_P_MAX, GridSpec::default()),
        _ => (
            WeightFunction::closed(ClosedForm::LogSquared)?,
            120,
            GridSpec::new(1e-2, 1e300, 4096)?,
        ),
    };
    let p_max = args.usize("p_max", default_p)?;
    ctx.set_grid(grid);
    let mat = associated_matrix(&omega, &default_ells(), p_max, &grid)?;
    let cv = constancy_check(&mat, Some(&omega))?;
    ctx.witness("constant", cv.constant);
    ctx.witness("omega6", cv.omega6);
    ctx.require(
        "constant ⇔ (ω₆)",
        f64::NAN,
        cv.consistent == Some(true),
        format!("constant = {}, (ω₆) = {:?}", cv.constant, cv.omega6),
    );
    match conjugate_matrix(&mat).and_then(|c| constancy_check(&c, None)) {
        Ok(cc) => {
            ctx.witness("conjugate_constant", cc.constant);
            ctx.require(
                "conjugate matrix has the same constancy",
                f64::NAN,
                cc.constant == cv.constant,
                format!("original {}, conjugate {}", cv.constant, cc.constant),
            );
        }
        Err(e) if e.is_precondition() => ctx.witness("conjugate_matrix", e.to_string()),
        Err(e) => return Err(e),
    }
    let window = Window::tail(omega.domain_hint());
    ctx.set_window(window);
    if c2_holds(&omega, &window) {
        let star = conjugate(&omega, &grid)?;
        let tail = Window::tail(star.domain_hint());
        ctx.require("log t = o(ω*(t))", f64::NAN, log_dominated(&star, &tail), "ω* is too small");
        match associated_matrix(&star, &default_ells(), p_max, &grid) {
            Ok(_) => ctx.witness("conjugate_weight_matrix", "built"),
            Err(e) => ctx.require("matrix of ω* is defined", f64::NAN, false, e.to_string()),
        }
    }
    Ok(())
}

/// `h^j W^{(ℓ)}_j ≤ D W^{(dℓ)}_j` for a weight with `(ω₁)`.
pub(super) fn new_exp_absorb(args: &mut Args, ctx: &mut Ctx) -> Result<()> {
    let omega = power(args.f64("alpha", 0.5)?)?;
    let p_max = args.usize("p_max", DEFAULT_P_MAX)?;
    let grid = GridSpec::default();
    ctx.set_grid(grid);
    let report = bmt_report(&omega);
    ctx.set_window(report.window);
    if !report.omega1 {
        ctx.skip(format!("{} lacks (ω₁)", omega.name()));
        return Ok(());
    }
    let mut found = Vec::new();
    for h in [2.0, 4.0] {
        for ell in SANDWICH_ELLS {
            let ea = exp_absorb(&omega, ell, h, p_max, &grid)?;
            ctx.require("some d absorbs h^j", h, ea.d.is_some(), format!("none for ℓ = {ell}, h = {h}"));
            if let (Some(d), Some(c)) = (ea.d, ea.log_const) {
                found.push((h, ell, d, c));
            }
        }
    }
    let max_d = found.iter().map(|f| f.2).fold(0.0f64, f64::max);
    ctx.witness("h_ell_d_logD", found);
    ctx.witness("max_d", max_d);
    Ok(())
}
