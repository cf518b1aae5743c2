use super::report::bmt_report;
use super::{normalized, LegendreTable};
use crate::error::{Error, Result};
use crate::exec;
use crate::func::{associated, conjugate, GridSpec, WeightFunction};
use crate::numeric::{bounded_above, log_space};
use crate::seq::{relation, small_root_vanishes, standard_log_convex, RelationKind, WeightSequence, DEFAULT_P0};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative slack for order relations between computed log values.
const ORDER_TOL: f64 = 1e-9;

/// Relative slack for the sandwich inequalities once their constants are fixed.
const SANDWICH_TOL: f64 = 1e-9;

const SANDWICH_SAMPLES: usize = 256;
const CONJ_SAMPLES: usize = 128;

/// `ℓ = 2^k` for `k = −3..=3`.
pub fn default_ells() -> Vec<f64> {
    (-3..=3).map(|k| 2f64.powi(k)).collect()
}

/// How a matrix was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    /// From `φ*` of the named weight after subtracting `offset = ω(1)`.
    Associated { omega: String, offset: f64 },
    /// Member-wise conjugate with inverted parameter.
    Conjugate { of: Box<Provenance> },
}

/// One-parameter family `{W^{(ℓ)}}` sampled at finitely many `ℓ`.
///
/// The parameter set is sorted and closed under `ℓ ↦ 1/ℓ`, so the inverse of
/// `ells[i]` is `ells[n − 1 − i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct WeightMatrix {
    ells: Vec<f64>,
    sequences: Vec<WeightSequence>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    ells: Vec<f64>,
    sequences: BTreeMap<String, WeightSequence>,
    provenance: Provenance,
}

fn ell_key(ell: f64) -> String {
    format!("{ell}")
}

impl From<WeightMatrix> for MatrixRepr {
    fn from(m: WeightMatrix) -> Self {
        MatrixRepr {
            sequences: m.ells.iter().map(|&l| ell_key(l)).zip(m.sequences).collect(),
            ells: m.ells,
            provenance: m.provenance,
        }
    }
}

impl TryFrom<MatrixRepr> for WeightMatrix {
    type Error = Error;

    fn try_from(mut r: MatrixRepr) -> Result<Self> {
        let mut sequences = Vec::with_capacity(r.ells.len());
        for &ell in &r.ells {
            let seq = r
                .sequences
                .remove(&ell_key(ell))
                .ok_or_else(|| Error::Format(format!("no sequence stored for ℓ = {ell}")))?;
            sequences.push(seq);
        }
        if let Some(extra) = r.sequences.keys().next() {
            return Err(Error::Format(format!("sequence key {extra} is not listed in ells")));
        }
        WeightMatrix::new(r.ells, sequences, r.provenance)
    }
}

fn validate_ells(ells: &[f64]) -> Result<()> {
    if ells.is_empty() {
        return Err(Error::Domain("a weight matrix needs at least one ℓ".into()));
    }
    if ells.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::Domain(format!("every ℓ must be positive and finite, got {ells:?}")));
    }
    if ells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("ℓ values must be strictly increasing, got {ells:?}")));
    }
    let n = ells.len();
    for (i, l) in ells.iter().enumerate() {
        if (l * ells[n - 1 - i] - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "ℓ values must be closed under ℓ ↦ 1/ℓ; 1/{l} is missing"
            )));
        }
    }
    Ok(())
}

impl WeightMatrix {
    pub fn new(ells: Vec<f64>, sequences: Vec<WeightSequence>, provenance: Provenance) -> Result<Self> {
        validate_ells(&ells)?;
        if sequences.len() != ells.len() {
            return Err(Error::Format(format!(
                "{} ℓ values but {} sequences",
                ells.len(),
                sequences.len()
            )));
        }
        let p_max = sequences[0].p_max();
        if sequences.iter().any(|s| s.p_max() != p_max) {
            return Err(Error::Format("matrix members have different P_max".into()));
        }
        Ok(WeightMatrix {
            ells,
            sequences,
            provenance,
        })
    }

    pub fn ells(&self) -> &[f64] {
        &self.ells
    }

    pub fn sequences(&self) -> &[WeightSequence] {
        &self.sequences
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn p_max(&self) -> usize {
        self.sequences[0].p_max()
    }

    /// Member at `ell`, matched to relative precision `1e-12`.
    pub fn member(&self, ell: f64) -> Option<&WeightSequence> {
        self.index_of(ell).map(|i| &self.sequences[i])
    }

    fn index_of(&self, ell: f64) -> Option<usize> {
        self.ells.iter().position(|l| (l - ell).abs() <= 1e-12 * ell.abs())
    }
}

/// `log W^{(ℓ)}_p = φ*(ℓp)/ℓ` for `p = 0..=p_max`, built from the normalized
/// weight `max(0, ω − ω(1))`. Members are computed in parallel over `ℓ`.
pub fn associated_matrix(omega: &WeightFunction, ells: &[f64], p_max: usize, grid: &GridSpec) -> Result<WeightMatrix> {
    validate_ells(ells)?;
    let (w, offset) = normalized(omega);
    let table = LegendreTable::new(&w, grid)?;
    let rows: Vec<Result<WeightSequence>> = exec::map_slice(ells, |&ell| {
        let lv = (0..=p_max)
            .map(|p| table.eval(ell * p as f64).map(|v| v / ell))
            .collect::<Result<Vec<f64>>>()?;
        Ok(WeightSequence::from_log_values(lv)?.named(format!("W^({ell})[{}]", omega.name())))
    });
    let sequences = rows.into_iter().collect::<Result<Vec<_>>>()?;
    WeightMatrix::new(
        ells.to_vec(),
        sequences,
        Provenance::Associated {
            omega: omega.name().to_string(),
            offset,
        },
    )
}

/// `(W^{(ℓ)})*` placed at parameter `1/ℓ`, so the result is again increasing in `ℓ`.
pub fn conjugate_matrix(mat: &WeightMatrix) -> Result<WeightMatrix> {
    for (ell, seq) in mat.ells.iter().zip(&mat.sequences) {
        if !small_root_vanishes(seq) {
            return Err(Error::Precondition(format!(
                "(w_p)^(1/p) does not tend to 0 for the member at ℓ = {ell}"
            )));
        }
    }
    let n = mat.ells.len();
    let sequences = (0..n)
        .map(|i| {
            let src = &mat.sequences[n - 1 - i];
            src.conjugate().named(format!("{}*", src.name()))
        })
        .collect();
    WeightMatrix::new(
        mat.ells.clone(),
        sequences,
        Provenance::Conjugate {
            of: Box::new(mat.provenance.clone()),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberCheck {
    pub ell: f64,
    pub log_convex: bool,
    pub normalized: bool,
    pub root_diverges: bool,
}

/// `W^{(ℓ)}_{p+q} ≤ W^{(2ℓ)}_p W^{(2ℓ)}_q` for `p + q ≤ pq_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModerateGrowthCheck {
    pub ell: f64,
    /// Smallest `(log W^{(2ℓ)}_p + log W^{(2ℓ)}_q − log W^{(ℓ)}_{p+q}) / (1 + |log W^{(ℓ)}_{p+q}|)`.
    pub worst_margin: f64,
    pub worst_pq: (usize, usize),
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixInvariants {
    pub pointwise_order: bool,
    pub quotient_order: bool,
    pub members: Vec<MemberCheck>,
    /// One entry per `ℓ` with `2ℓ` also in the matrix.
    pub moderate_growth: Vec<ModerateGrowthCheck>,
}

impl MatrixInvariants {
    pub fn holds(&self) -> bool {
        self.pointwise_order
            && self.quotient_order
            && self
                .members
                .iter()
                .all(|m| m.log_convex && m.normalized && m.root_diverges)
            && self.moderate_growth.iter().all(|m| m.holds)
    }
}

fn below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + ORDER_TOL * (1.0 + y.abs()))
}

/// Pointwise and quotient order between neighbouring members, membership of
/// every member in the standard log-convex class, and the moderate-growth
/// coupling between `ℓ` and `2ℓ`.
pub fn matrix_invariants(mat: &WeightMatrix, pq_max: usize) -> MatrixInvariants {
    let seqs = &mat.sequences;
    let pointwise_order = seqs.windows(2).all(|w| below(w[0].log_values(), w[1].log_values()));
    let quotient_order = seqs.windows(2).all(|w| below(&w[0].log_quotients(), &w[1].log_quotients()));
    let members = mat
        .ells
        .iter()
        .zip(seqs)
        .map(|(&ell, s)| {
            let st = standard_log_convex(s);
            MemberCheck {
                ell,
                log_convex: st.log_convex,
                normalized: st.normalized,
                root_diverges: st.root_diverges,
            }
        })
        .collect();
    let pq_max = pq_max.min(mat.p_max());
    let moderate_growth = mat
        .ells
        .iter()
        .enumerate()
        .filter_map(|(i, &ell)| mat.index_of(2.0 * ell).map(|j| (i, j, ell)))
        .map(|(i, j, ell)| {
            let a = seqs[i].log_values();
            let b = seqs[j].log_values();
            let mut worst = f64::INFINITY;
            let mut worst_pq = (0, 0);
            for p in 0..=pq_max {
                for q in 0..=pq_max - p {
                    let m = (b[p] + b[q] - a[p + q]) / (1.0 + a[p + q].abs());
                    if m < worst {
                        worst = m;
                        worst_pq = (p, q);
                    }
                }
            }
            ModerateGrowthCheck {
                ell,
                worst_margin: worst,
                worst_pq,
                holds: worst >= -ORDER_TOL,
            }
        })
        .collect();
    MatrixInvariants {
        pointwise_order,
        quotient_order,
        members,
        moderate_growth,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub ell_1: f64,
    pub ell_2: f64,
    pub kind: RelationKind,
    pub approx: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyVerdict {
    pub constant: bool,
    pub pairs: Vec<PairVerdict>,
    /// `(ω₆)` flag of the generating weight, when one was supplied for an associated matrix.
    pub omega6: Option<bool>,
    pub consistent: Option<bool>,
}

/// All-pairs `≈` test between members. A one-member matrix is trivially constant.
pub fn constancy_check(mat: &WeightMatrix, omega: Option<&WeightFunction>) -> Result<ConstancyVerdict> {
    let n = mat.ells.len();
    let p0 = DEFAULT_P0.min(mat.p_max() / 2);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = relation(&mat.sequences[i], &mat.sequences[j], p0)?;
            pairs.push(PairVerdict {
                ell_1: mat.ells[i],
                ell_2: mat.ells[j],
                kind: v.kind,
                approx: v.holds(RelationKind::Approx),
            });
        }
    }
    let constant = pairs.iter().all(|p| p.approx);
    let omega6 = match (omega, &mat.provenance) {
        (Some(w), Provenance::Associated { .. }) => Some(bmt_report(w).omega6),
        _ => None,
    };
    Ok(ConstancyVerdict {
        constant,
        pairs,
        omega6,
        consistent: omega6.map(|f| f == constant),
    })
}

/// `ℓ ω_{W^{(ℓ)}}(t) ≤ ω(t) ≤ 2ℓ ω_{W^{(ℓ)}}(t) + D_ℓ` on `t` up to the largest
/// quotient of the member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicSandwich {
    pub ell: f64,
    /// `max(0, sup_t {ω(t) − 2ℓ ω_{W^{(ℓ)}}(t)})` over the samples.
    pub d_ell: f64,
    /// Smallest `(ω(t) − ℓ ω_{W^{(ℓ)}}(t)) / (1 + ω(t))`.
    pub lower_margin: f64,
    pub lower_worst_t: f64,
    /// The deficit defining `D_ℓ` stays bounded along the samples.
    pub bounded: bool,
    pub t_max: f64,
    pub holds: bool,
}

fn associated_member(mat: &WeightMatrix, ell: f64) -> Result<&WeightSequence> {
    if !matches!(mat.provenance, Provenance::Associated { .. }) {
        return Err(Error::Precondition("sandwich estimates need an associated matrix".into()));
    }
    mat.member(ell)
        .ok_or_else(|| Error::Domain(format!("ℓ = {ell} is not a parameter of the matrix")))
}

/// Scans the sandwich between `ω` (normalized as in [`associated_matrix`]) and
/// the associated function of the member at `ell`.
pub fn classic_sandwich(omega: &WeightFunction, mat: &WeightMatrix, ell: f64) -> Result<ClassicSandwich> {
    let member = associated_member(mat, ell)?;
    let (w, _) = normalized(omega);
    let ow = associated(member)?;
    let t_max = ow.domain_hint();
    let ts = log_space(1e-2f64.min(t_max / 100.0), t_max, SANDWICH_SAMPLES);
    let wv = w.eval_many(&ts);
    let owv = ow.eval_many(&ts);
    let mut lower_margin = f64::INFINITY;
    let mut lower_worst_t = ts[0];
    let mut deficit = Vec::with_capacity(ts.len());
    for ((t, a), b) in ts.iter().zip(&wv).zip(&owv) {
        let m = (a - ell * b) / (1.0 + a.abs());
        if m < lower_margin {
            lower_margin = m;
            lower_worst_t = *t;
        }
        deficit.push(a - 2.0 * ell * b);
    }
    let d_max = deficit.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = deficit.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bounded = d_max.is_finite() && bounded_above(&deficit, scale);
    Ok(ClassicSandwich {
        ell,
        d_ell: d_max.max(0.0),
        lower_margin,
        lower_worst_t,
        bounded,
        t_max,
        holds: lower_margin >= -SANDWICH_TOL && bounded,
    })
}

/// `(1/ℓ) ω*(ℓs) ≤ ω*_{W^{(ℓ)}}(s) ≤ (1/(2ℓ)) ω*(2ℓs) + D_ℓ/(2ℓ)` on sampled `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateSandwich {
    pub ell: f64,
    pub d_ell: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Smallest relative slack of the left inequality.
    pub lower_margin: f64,
    /// Smallest relative slack of the right inequality.
    pub upper_margin: f64,
    pub worst_s: f64,
    pub holds: bool,
}

/// Evaluates both sides of the conjugate sandwich for the member at `ell`.
///
/// The samples stop at half the domain hint of `ω*_{W^{(ℓ)}}`, beyond which
/// the finite prefix of `W^{(ℓ)}` no longer determines the conjugate.
pub fn conjugate_sandwich(
    omega: &WeightFunction,
    mat: &WeightMatrix,
    ell: f64,
    d_ell: f64,
    grid: &GridSpec,
) -> Result<ConjugateSandwich> {
    let member = associated_member(mat, ell)?;
    let (w, _) = normalized(omega);
    let ws = conjugate(&w, grid)?;
    let wws = conjugate(&associated(member)?, grid)?;
    let mut s_max = 0.5 * wws.domain_hint();
    if ws.domain_hint().is_finite() {
        s_max = s_max.min(ws.domain_hint() / (2.0 * ell));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::DomainExhausted(format!("no admissible range of s for ℓ = {ell}")));
    }
    let s_min = 1e-3 * s_max;
    let ss = log_space(s_min, s_max, CONJ_SAMPLES);
    let margins = exec::map_slice(&ss, |&s| {
        let mid = wws.eval(s);
        let lo = ws.eval(ell * s) / ell;
        let hi = (ws.eval(2.0 * ell * s) + d_ell) / (2.0 * ell);
        let scale = 1.0 + mid.abs();
        let lm = (mid - lo) / scale;
        let um = (hi - mid) / scale;
        (
            if lm.is_nan() { f64::NEG_INFINITY } else { lm },
            if um.is_nan() { f64::NEG_INFINITY } else { um },
        )
    });
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    let mut worst_s = ss[0];
    let mut worst = f64::INFINITY;
    for (s, (lm, um)) in ss.iter().zip(&margins) {
        lower_margin = lower_margin.min(*lm);
        upper_margin = upper_margin.min(*um);
        if lm.min(*um) < worst {
            worst = lm.min(*um);
            worst_s = *s;
        }
    }
    Ok(ConjugateSandwich {
        ell,
        d_ell,
        s_min,
        s_max,
        lower_margin,
        upper_margin,
        worst_s,
        holds: lower_margin >= -SANDWICH_TOL && upper_margin >= -SANDWICH_TOL,
    })
}

/// Smallest `d = 2^k` with `h^p W^{(ℓ)}_p ≤ D W^{(dℓ)}_p` for all sampled `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpAbsorb {
    pub ell: f64,
    pub h: f64,
    pub d: Option<f64>,
    /// `log D` for the accepted `d`.
    pub log_const: Option<f64>,
}

const ABSORB_MAX_K: i32 = 10;

/// Scans `d = 1, 2, 4, …, 2^10`; the deficit `p log h + log W^{(ℓ)}_p − log W^{(dℓ)}_p`
/// must stay bounded along `p`. Members are computed directly from `φ*`, so
/// `dℓ` need not belong to any particular parameter set.
pub fn exp_absorb(omega: &WeightFunction, ell: f64, h: f64, p_max: usize, grid: &GridSpec) -> Result<ExpAbsorb> {
    if !(ell > 0.0 && h >= 1.0 && h.is_finite()) {
        return Err(Error::Domain(format!("need ℓ > 0 and h ≥ 1, got ℓ = {ell}, h = {h}")));
    }
    let (w, _) = normalized(omega);
    let table = LegendreTable::new(&w, grid)?;
    let row = |l: f64| -> Result<Vec<f64>> { (0..=p_max).map(|p| table.eval(l * p as f64).map(|v| v / l)).collect() };
    let base = row(ell)?;
    let lh = h.ln();
    let p0 = DEFAULT_P0.min(p_max / 2);
    for k in 0..=ABSORB_MAX_K {
        let d = 2f64.powi(k);
        let Ok(other) = row(d * ell) else { break };
        let deficit: Vec<f64> = (0..=p_max).map(|p| p as f64 * lh + base[p] - other[p]).collect();
        let tail = &deficit[p0..];
        let scale = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if bounded_above(tail, scale) {
            let max = deficit.iter().copied().fold(0.0f64, f64::max);
            return Ok(ExpAbsorb {
                ell,
                h,
                d: Some(d),
                log_const: Some(max),
            });
        }
    }
    Ok(ExpAbsorb {
        ell,
        h,
        d: None,
        log_const: None,
    })
}
