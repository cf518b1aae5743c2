//! Acceptance criteria, one line each.
//!
//! Every criterion is evaluated with its stated tolerance and reported as
//! PASS or FAIL on stderr. Criteria listed in `UNATTAINABLE` fail for
//! mathematical reasons at desk scale; for those the test pins the reason
//! against an independent computation instead of loosening the tolerance, and
//! it flags them if they ever start passing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::Instant;
use weightcalc::bmt::{
    associated_matrix, bmt_report, classic_sandwich, conjugate_sandwich, constancy_check, matrix_invariants,
};
use weightcalc::func::{
    associated, biconjugate, c2_holds, conjugate, envelope_lower, envelope_upper, envelope_upper_of_sequences,
    gamma_indices, integral_form, recover_sequence, relation_fn, slowly_varying_sequence_test, FunctionRelationKind,
    GridSpec, WeightFunction, Window,
};
use weightcalc::numeric::{lin_space, log_space};
use weightcalc::seq::{
    almost_decreasing_regularize, check_moderate_growth, normalize_head, small_root_vanishes,
    uniform_bound, UniformBoundOptions, WeightSequence,
};
use weightcalc::Error;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

/// `ln p!` by direct summation, independent of the library's factorial table.
fn ln_fact(p: usize) -> f64 {
    (2..=p).map(|k| (k as f64).ln()).sum()
}

fn power(alpha: f64) -> WeightFunction {
    WeightFunction::power(alpha).unwrap()
}

fn c1_gevrey_conj() -> Outcome {
    const TOL: f64 = 1e-4;
    let grid = GridSpec::default();
    let ss = log_space(1.0, 1e4, 128);
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 0.75] {
        let star = conjugate(&power(alpha), &grid).unwrap();
        let e = 1.0 / (1.0 - alpha);
        let k = alpha.powf(alpha * e) - alpha.powf(e);
        let exact: Vec<f64> = ss.iter().map(|s| k * s.powf(e)).collect();
        worst = worst.max(max_rel(&star.eval_many(&ss), &exact));
    }
    Outcome::new(worst <= TOL, format!("max rel err {worst:.2e} (tol {TOL:.0e})"))
}

fn c2_biconj() -> Outcome {
    const TOL: f64 = 1e-3;
    let grid = GridSpec::default();
    let ts = log_space(1.0, 1e3, 128);
    let mut worst = 0.0f64;
    for alpha in [0.5, 0.75] {
        let w = power(alpha);
        worst = worst.max(max_rel(&biconjugate(&w, &grid).unwrap().eval_many(&ts), &w.eval_many(&ts)));
    }
    let xs = lin_space(0.0, 100.0, 4001);
    let vs = xs.iter().map(|t| t * t + t * t.sin().powi(2)).collect();
    let wavy = WeightFunction::sampled(xs, vs).unwrap();
    let bb = biconjugate(&wavy, &grid).unwrap();
    let samples = lin_space(0.5, 99.5, 128);
    let excess = samples
        .iter()
        .map(|&t| bb.eval(t) - wavy.eval(t))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = worst <= TOL && excess <= 1e-9;
    Outcome::new(
        pass,
        format!("convex max rel err {worst:.2e} (tol {TOL:.0e}); non-convex max(ω** − ω) {excess:.2e} (tol 1e-9)"),
    )
}

fn c3_assoc_exact() -> Outcome {
    const TOL: f64 = 1e-10;
    let p_max = 400;
    let g = WeightSequence::gevrey(1.0, p_max).unwrap();
    let (piecewise, integral) = (associated(&g).unwrap(), integral_form(&g));
    let lf: Vec<f64> = (0..=p_max).map(ln_fact).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut e_pw, mut e_int) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        // μ_p = p for p!, so [μ_1, μ_P] = [1, P].
        let t: f64 = rng.gen_range(1.0..p_max as f64);
        let brute = (0..=p_max).map(|p| p as f64 * t.ln() - lf[p]).fold(f64::NEG_INFINITY, f64::max);
        e_pw = e_pw.max((piecewise.eval(t) - brute).abs());
        e_int = e_int.max((integral.eval(t) - brute).abs());
    }
    Outcome::new(
        e_pw <= TOL && e_int <= TOL,
        format!("piecewise {e_pw:.1e}, integral {e_int:.1e} (abs tol {TOL:.0e}, 500 points, seed {SEED})"),
    )
}

fn c4_recovery() -> Outcome {
    const TOL: f64 = 1e-3;
    let g = WeightSequence::gevrey(0.5, 400).unwrap();
    let back = recover_sequence(&associated(&g).unwrap(), 1.0, 50, &GridSpec::default()).unwrap();
    let err = (0..=50)
        .map(|p| (back.log_value(p) - 0.5 * ln_fact(p)).abs())
        .fold(0.0f64, f64::max);
    Outcome::new(err <= TOL, format!("max |Δ log M_p|, p ≤ 50: {err:.2e} (tol {TOL:.0e})"))
}

fn c5_index() -> Outcome {
    const TOL: f64 = 0.05;
    const SUB_TOL: f64 = 0.1;
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 0.75, 1.5] {
        let est = gamma_indices(&power(alpha), &Window::default());
        worst = worst.max((est.gamma - alpha).abs()).max((est.gamma_bar - alpha).abs());
    }
    // γ(ω(t^{1/β})) = β γ(ω), likewise for γ̄.
    let bases = [power(0.5), associated(&WeightSequence::gevrey(1.0, 2000).unwrap()).unwrap()];
    let mut sub_worst = 0.0f64;
    for w in &bases {
        let base = gamma_indices(w, &Window::tail(w.domain_hint()));
        for beta in [0.5, 2.0] {
            let ws = w.power_substitution(beta).unwrap();
            let est = gamma_indices(&ws, &Window::tail(ws.domain_hint()));
            sub_worst = sub_worst
                .max((est.gamma - beta * base.gamma).abs())
                .max((est.gamma_bar - beta * base.gamma_bar).abs());
        }
    }
    Outcome::new(
        worst <= TOL && sub_worst <= SUB_TOL,
        format!("max |γ̂ − α| {worst:.3} (tol {TOL}); substitution law {sub_worst:.3} (tol {SUB_TOL})"),
    )
}

fn c6_index_transfer() -> Outcome {
    let star = conjugate(&power(0.3), &GridSpec::default()).unwrap();
    let est = gamma_indices(&star, &Window::tail(star.domain_hint()));
    let inside = |x: f64| (0.65..=0.75).contains(&x);
    Outcome::new(
        inside(est.gamma) && inside(est.gamma_bar),
        format!("γ̂ {:.4}, γ̄̂ {:.4} (range [0.65, 0.75])", est.gamma, est.gamma_bar),
    )
}

/// Log-log slope of `f` between `a` and `b`.
fn slope(f: &WeightFunction, a: f64, b: f64) -> f64 {
    (f.eval(b) / f.eval(a)).ln() / (b / a).ln()
}

fn c7_env_duality() -> Outcome {
    const TOL: f64 = 1e-3;
    let grid = GridSpec::default();
    let (sigma, tau) = (power(0.5), power(0.75));
    let lower = envelope_lower(&sigma, &tau, &grid).unwrap();
    let window = Window::tail(lower.domain_hint());
    if !c2_holds(&lower, &window) {
        return Outcome::new(
            false,
            format!(
                "σ⋆̌τ grows like t^{:.3}, so t = o(σ⋆̌τ) fails and (σ⋆̌τ)* = +∞",
                slope(&lower, 1e3, 1e6)
            ),
        );
    }
    let run = || -> Result<(f64, f64), Error> {
        let ts = log_space(1.0, 1e3, 128);
        let a = envelope_upper(&conjugate(&tau, &grid)?, &sigma, &grid)?.eval_many(&ts);
        let b = conjugate(&lower, &grid)?.eval_many(&ts);
        let c = envelope_upper(&conjugate(&sigma, &grid)?, &tau, &grid)?.eval_many(&ts);
        let inner = envelope_upper(&WeightFunction::identity(), &tau, &grid)?;
        let d = envelope_upper(&inner, &sigma, &grid)?.eval_many(&ts);
        Ok((max_rel(&a, &b).max(max_rel(&c, &b)).max(max_rel(&a, &c)), max_rel(&c, &d)))
    };
    match run() {
        Ok((triple, nested)) => Outcome::new(
            triple <= TOL && nested <= TOL,
            format!("triple {triple:.2e}, nested {nested:.2e} (tol {TOL:.0e})"),
        ),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn c8_bridge() -> Outcome {
    let grid = GridSpec::default();
    let m = WeightSequence::gevrey(1.0 / 3.0, 400).unwrap();
    let l = normalize_head(&almost_decreasing_regularize(&m).unwrap().sequence);
    let conj_l = conjugate(&associated(&l).unwrap(), &grid).unwrap();
    let lstar = associated(&l.conjugate()).unwrap();
    let ss = log_space(1e-2, 0.5 * conj_l.domain_hint(), 128);
    let cv = conj_l.eval_many(&ss);
    let at = |c: f64| -> Vec<f64> { ss.iter().map(|s| lstar.eval(c * s)).collect() };
    let lower_ok = at(0.5).iter().zip(&cv).all(|(a, b)| *a <= b + 1e-9 * (1.0 + b.abs()));
    let c = (0..=40)
        .map(|k| 2f64.powf(k as f64 / 4.0))
        .take_while(|c| *c <= 1e3)
        .find(|&c| at(c).iter().zip(&cv).all(|(r, l)| *l <= r + 1.0 + 1e-9 * (1.0 + r.abs())));
    let v = relation_fn(&lstar, &conj_l, &Window::tail_for(&[&lstar, &conj_l]));
    let sim = v.holds(FunctionRelationKind::Sim);
    Outcome::new(
        lower_ok && c.is_some() && sim,
        format!(
            "lower side {}, C = {}, ω_{{L*}} ∼ ω*_L {} (reported kind {:?})",
            if lower_ok { "holds" } else { "fails" },
            c.map_or("none ≤ 1e3".into(), |c| format!("{c:.3}")),
            sim,
            v.kind
        ),
    )
}

fn c9_envelope_id() -> Outcome {
    let grid = GridSpec::default();
    let p = 2000;
    let g = |s: f64| WeightSequence::gevrey(s, p).unwrap();
    let id = WeightFunction::identity();
    let holds = |a: &WeightFunction, b: &WeightFunction, kind| relation_fn(a, b, &Window::tail_for(&[a, b])).holds(kind);
    let mut verdicts = Vec::new();

    let m = g(1.0 / 3.0);
    let e = envelope_lower(&associated(&m).unwrap(), &associated(&m.conjugate()).unwrap(), &grid).unwrap();
    verdicts.push(("i", holds(&e, &id, FunctionRelationKind::Sim)));

    let m = g(2.0);
    let e = envelope_upper_of_sequences(&m, &m.small(), &grid).unwrap();
    verdicts.push(("ii", holds(&e, &id, FunctionRelationKind::Sim)));

    let m = g(0.5);
    let top = m.product(&m).unwrap().product(&m.conjugate()).unwrap();
    let e = envelope_upper_of_sequences(&top, &m, &grid).unwrap();
    verdicts.push(("iii", holds(&e, &id, FunctionRelationKind::Sim)));

    let m = g(0.75);
    let e = envelope_upper_of_sequences(&m, &m.conjugate(), &grid).unwrap();
    let target = associated(&m.product(&m.small()).unwrap()).unwrap();
    verdicts.push(("iv", holds(&e, &target, FunctionRelationKind::SimC)));

    let m = g(0.25);
    let q = g(1.0).quotient(&m.product(&m).unwrap()).unwrap();
    let e = envelope_upper_of_sequences(&m.conjugate(), &m, &grid).unwrap();
    verdicts.push(("v", holds(&e, &associated(&q).unwrap(), FunctionRelationKind::SimC)));

    let detail = verdicts.iter().map(|(c, ok)| format!("({c}) {ok}")).collect::<Vec<_>>().join(", ");
    Outcome::new(verdicts.iter().all(|v| v.1), detail)
}

fn c10_bmt() -> Outcome {
    let grid = GridSpec::default();
    let omega = power(0.5);
    let ells = [0.5, 1.0, 2.0];
    let mat = associated_matrix(&omega, &ells, 400, &grid).unwrap();
    let inv = matrix_invariants(&mat, 200);

    // Closed form for ω̃ = max(0, t² − 1): φ*(x) = (x/2) ln(x/2) − x/2 + 1 for
    // x ≥ 2 and 0 below, and log W^{(ℓ)}_p = φ*(ℓp)/ℓ.
    let phi_star = |x: f64| if x <= 2.0 { 0.0 } else { 0.5 * x * (0.5 * x).ln() - 0.5 * x + 1.0 };
    let mut oracle = 0.0f64;
    for (ell, seq) in ells.iter().zip(mat.sequences()) {
        for (p, v) in seq.log_values().iter().enumerate() {
            let exact = phi_star(ell * p as f64) / ell;
            oracle = oracle.max((v - exact).abs() / (1.0 + exact.abs()));
        }
    }

    let mut sandwich_ok = true;
    let mut d_ells = Vec::new();
    for ell in ells {
        let cs = classic_sandwich(&omega, &mat, ell).unwrap();
        let js = conjugate_sandwich(&omega, &mat, ell, cs.d_ell, &grid).unwrap();
        sandwich_ok &= cs.lower_margin >= -1e-9 && cs.bounded && js.lower_margin >= -1e-9 && js.upper_margin >= -1e-9;
        d_ells.push(format!("{:.2}", cs.d_ell));
    }
    let cv = constancy_check(&mat, Some(&omega)).unwrap();
    let pass = inv.holds() && oracle <= 1e-6 && sandwich_ok && cv.constant && cv.consistent == Some(true);
    Outcome::new(
        pass,
        format!(
            "members/(mg) {}, closed-form dev {oracle:.1e} (tol 1e-6), sandwiches {sandwich_ok} with D_ℓ [{}], constant {} consistent {:?}",
            inv.holds(),
            d_ells.join(", "),
            cv.constant,
            cv.consistent
        ),
    )
}

/// Sequences `M^{(k)} = p!^{1 − 1/(k+1)}`, whose small sequences are `p!^{−1/(k+1)}`.
fn literal_family(p_max: usize) -> Vec<WeightSequence> {
    (1..=4).map(|k| WeightSequence::gevrey(1.0 - 1.0 / (k as f64 + 1.0), p_max).unwrap()).collect()
}

fn c11_uniform_bound() -> Outcome {
    let family = literal_family(400);
    match uniform_bound(&family, &UniformBoundOptions::default()) {
        Ok(ub) => {
            let r = &ub.log_roots;
            let monotone = r[1..].windows(2).all(|w| w[1] <= w[0]);
            let halved = r[r.len() - 1] <= r[1] + 0.5f64.ln();
            let div = ub.divergence.iter().all(|d| *d);
            Outcome::new(
                monotone && halved && div,
                format!("non-increasing {monotone}, halved {halved}, divergence {div}, breakpoints {:?}", ub.breakpoints),
            )
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn c12_slowly_varying() -> Outcome {
    let m = WeightSequence::from_fn(400, |p| (p * p) as f64).unwrap();
    let v = slowly_varying_sequence_test(&m).unwrap();
    let in_band = v.direct_ratios.iter().all(|(_, r)| (0.98..=1.02).contains(r));
    let gevrey_not = !slowly_varying_sequence_test(&WeightSequence::gevrey(1.0, 400).unwrap())
        .unwrap()
        .slowly_varying;
    let mg = check_moderate_growth(&m).holds;
    let omega6 = bmt_report(&associated(&m).unwrap()).omega6;
    let ratios = v.direct_ratios.iter().map(|(u, r)| format!("u={u}: {r:.3}")).collect::<Vec<_>>().join(", ");
    Outcome::new(
        v.slowly_varying && in_band && gevrey_not && !mg && !omega6,
        format!(
            "verdict {}, ratios at t=1e6 [{ratios}] (band [0.98, 1.02]), gevrey(1) not SV {gevrey_not}, (mg) {mg}, (ω₆) {omega6}",
            v.slowly_varying
        ),
    )
}

fn c13_conj_welldef() -> Outcome {
    let grid = GridSpec::default();
    let mut bad = Vec::new();
    for s in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
        let m = WeightSequence::gevrey(s, 400).unwrap();
        let proxies = [
            small_root_vanishes(&m),
            associated(&m).and_then(|w| conjugate(&w, &grid)).is_ok(),
            associated(&m.conjugate()).is_ok(),
        ];
        if proxies.iter().any(|x| *x != (s < 1.0)) {
            bad.push(format!("s={s}: {proxies:?}"));
        }
    }
    Outcome::new(bad.is_empty(), if bad.is_empty() { "all proxies agree for s ∈ {0.25, 0.5, 0.75, 1, 1.5, 2}".into() } else { bad.join("; ") })
}

type Criterion = fn() -> Outcome;

const CRITERIA: [(&str, Criterion); 13] = [
    ("GEVREY_CONJ", c1_gevrey_conj),
    ("BICONJ", c2_biconj),
    ("ASSOC_EXACT", c3_assoc_exact),
    ("RECOVERY", c4_recovery),
    ("INDEX", c5_index),
    ("INDEX_TRANSFER", c6_index_transfer),
    ("ENV_DUALITY", c7_env_duality),
    ("BRIDGE", c8_bridge),
    ("ENVELOPE_ID", c9_envelope_id),
    ("BMT", c10_bmt),
    ("UNIFORM_BOUND", c11_uniform_bound),
    ("SLOWLY_VARYING", c12_slowly_varying),
    ("CONJ_WELLDEF", c13_conj_welldef),
];

/// Criteria that cannot pass as stated; see `unattainable_for_the_recorded_reasons`.
const UNATTAINABLE: [&str; 3] = ["ENV_DUALITY", "UNIFORM_BOUND", "SLOWLY_VARYING"];

#[test]
fn acceptance_criteria() {
    // Written straight to stderr so the summary shows up without --nocapture.
    let mut err = std::io::stderr().lock();
    let mut unexpected = Vec::new();
    writeln!(err, "\nacceptance criteria").unwrap();
    for (k, (name, run)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        let secs = start.elapsed().as_secs_f64();
        writeln!(err, "  {:>2} {name:<15} {status}  {:>5.2}s  {}", k + 1, secs, out.detail).unwrap();
        if out.pass == UNATTAINABLE.contains(name) {
            unexpected.push(format!("{name}: {status}"));
        }
    }
    assert!(unexpected.is_empty(), "criteria with an unexpected outcome: {unexpected:?}");
}

/// Pins why the three failing criteria fail, against independent computations.
#[test]
fn unattainable_for_the_recorded_reasons() {
    let grid = GridSpec::default();

    // ENV_DUALITY: the lower envelope of t² and t^{4/3} is comparable to
    // t^{(2·4/3)/(2+4/3)} = t^{0.8}, which is sublinear, so its conjugate is
    // identically +∞ and the identities have nothing to compare.
    let lower = envelope_lower(&power(0.5), &power(0.75), &grid).unwrap();
    let s = slope(&lower, 1e3, 1e6);
    assert!((s - 0.8).abs() < 0.02, "slope {s}");
    assert!(matches!(conjugate(&lower, &grid), Err(Error::WellDefinedness(_))));

    // UNIFORM_BOUND: n^{(k)}_p = p!^{−1/(k+1)} decays so slowly for k = 4 that
    // no breakpoint exists within P_max = 400, and the halving requirement is
    // out of reach for any P_max.
    // With ρ_k(j) = −ln(j!)/((k+1)j) the greedy steps are j_2 = 2, then the
    // first j with ρ_3(j) < ρ_2(2) − ln 2, then the first with ρ_4(j) < ρ_3(j_3) − ln 3.
    // Even ignoring the tail condition the last step lands near 3.8·10⁴.
    match uniform_bound(&literal_family(400), &UniformBoundOptions::default()) {
        Err(Error::Capacity { k: 4, .. }) => {}
        other => panic!("expected a capacity error for the fourth member, got {other:?}"),
    }
    let mut lf = vec![0.0f64];
    let rho = |lf: &Vec<f64>, k: usize, j: usize| -lf[j] / ((k + 1) as f64 * j as f64);
    for j in 1..=100_000 {
        let next = lf[j - 1] + (j as f64).ln();
        lf.push(next);
    }
    let first_below = |k: usize, target: f64| (1..lf.len()).find(|&j| rho(&lf, k, j) < target).unwrap();
    let j3 = first_below(3, rho(&lf, 2, 2) - 2f64.ln());
    let j4 = first_below(4, rho(&lf, 3, j3) - 3f64.ln());
    assert!(j3 < 400 && j4 > 30_000, "j3 = {j3}, j4 = {j4}");
    // Blocks start at j_{k+2}, so four members step the roots down once, to
    // ρ_2(2): the final root is e^{−ln 2/6} ≈ 0.89 times the first, never ≤ 1/2.
    assert!((rho(&lf, 2, 2).exp() - 2f64.powf(-1.0 / 6.0)).abs() < 1e-15);
    assert!(rho(&lf, 2, 2).exp() > 0.5);

    // SLOWLY_VARYING: ω_M(t) = sup_p (p ln t − p²), so ω_M(ut)/ω_M(t) ≈
    // (1 + ln u / ln t)², far outside [0.98, 1.02] at t = 10⁶.
    let m = WeightSequence::from_fn(400, |p| (p * p) as f64).unwrap();
    let v = slowly_varying_sequence_test(&m).unwrap();
    let brute = |t: f64| (0..=400).map(|p| p as f64 * t.ln() - (p * p) as f64).fold(f64::NEG_INFINITY, f64::max);
    for (u, r) in &v.direct_ratios {
        let exact = brute(u * 1e6) / brute(1e6);
        assert!((r - exact).abs() < 1e-9, "u = {u}: {r} vs {exact}");
        let limit = (1.0 + u.ln() / 1e6f64.ln()).powi(2);
        assert!((r / limit - 1.0).abs() < 0.02, "u = {u}: {r} vs {limit}");
        assert!(*r > 1.05);
    }
}
