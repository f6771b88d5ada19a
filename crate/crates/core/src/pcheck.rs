//! Certify-or-refute engine for the P, P0 and S properties.
//!
//! Each check runs in three phases: cheap necessary conditions, a closed list
//! of certification rules that each rest on a theorem, and finally a
//! deterministic battery plus multistart subgradient search for a witness.
//! Only a re-evaluated witness can refute, and only a rule can certify;
//! everything else is reported as `LIKELY` with the smallest value seen.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SearchBudget;
use crate::classes::{
    diagonal_sign_report, is_b_tensor, is_diagonally_dominant, is_h_tensor, ClassName,
    ClassReport, Verdict, Witness,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Accumulator, norm2, norm_inf, project_simplex};
use crate::provenance::Provenance;
use crate::sampling::{normalize2, normalize_inf, sign_patterns, simplex, unit_sphere};
use crate::tensor::{is_diagonal_index, support, Tensor};

/// Iterates of the S-search are kept at least this far inside the orthant.
const S_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    P,
    P0,
    S,
}

/// The closed list of rules a certificate chain may cite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertRule {
    /// Strictly diagonally dominant with positive diagonal.
    StrictDiagonalDominance,
    /// Nonsingular H-tensor with positive diagonal.
    NonsingularHPositiveDiagonal,
    /// Built as a strongly completely positive tensor.
    StronglyCompletelyPositive,
    /// B-tensor of odd order.
    OddOrderBTensor,
    /// Symmetric B-tensor of even order.
    SymmetricEvenOrderBTensor,
    /// Diagonally dominant with nonnegative diagonal.
    DiagonalDominance,
    /// H-tensor with nonnegative diagonal.
    HNonnegativeDiagonal,
    /// Built as a completely positive tensor.
    CompletelyPositive,
    /// Built as a hypergraph Laplacian or signless Laplacian.
    LaplacianConstruction,
    /// Built as a (possibly negated off-diagonal) rank-one basis tensor.
    BasisTensorConstruction,
    /// B0-tensor of odd order.
    OddOrderB0Tensor,
    /// Symmetric B0-tensor of even order.
    SymmetricEvenOrderB0Tensor,
    /// A positive vector with positive image was found and re-verified.
    PositiveWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub rule: CertRule,
    pub report: ClassReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVerdict {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Option<Vec<f64>>,
    /// The functional at the reported witness.
    pub witness_value: Option<f64>,
    /// P0 only: the functional at the witness with the exact support
    /// (every nonzero component counts).
    pub witness_value_exact: Option<f64>,
    /// Smallest functional value seen over the search, at unit 2-norm (for
    /// S, the largest `min_i (A x^(m-1))_i` seen on the simplex).
    #[serde(rename = "margin")]
    pub search_margin: Option<f64>,
    #[serde(rename = "chain")]
    pub certificate_chain: Vec<ChainLink>,
    pub budget: SearchBudget,
}

impl PVerdict {
    fn new(property: Property, verdict: Verdict, budget: &SearchBudget) -> Self {
        Self {
            property,
            verdict,
            witness: None,
            witness_value: None,
            witness_value_exact: None,
            search_margin: None,
            certificate_chain: Vec::new(),
            budget: *budget,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn is_refuted(&self) -> bool {
        self.verdict == Verdict::Refuted
    }
}

/// `x_i^(m-1) (A x^(m-1))_i` for every `i`.
pub fn phi_terms(a: &Tensor, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.dim(), x.len())?;
    if norm_inf(x) == 0.0 {
        return Err(Error::DegenerateInput("functional at the zero vector".into()));
    }
    let ax = a.contract_m1(x)?;
    let p = (a.order() - 1) as i32;
    Ok(x.iter().zip(&ax).map(|(xi, v)| xi.powi(p) * v).collect())
}

/// `max_i x_i^(m-1) (A x^(m-1))_i`.
pub fn phi_p(a: &Tensor, x: &[f64]) -> Result<f64> {
    Ok(phi_terms(a, x)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// As [`phi_p`], with the maximum taken over `support(x, tau_rel)` only.
pub fn phi_p0(a: &Tensor, x: &[f64], tau_rel: f64) -> Result<f64> {
    let t = phi_terms(a, x)?;
    let s = support(x, tau_rel)?;
    Ok(s.as_slice().iter().map(|&i| t[i]).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy)]
enum Functional {
    P,
    P0 { tau_rel: f64 },
}

impl Functional {
    fn eval(self, a: &Tensor, x: &[f64]) -> f64 {
        let r = match self {
            Functional::P => phi_p(a, x),
            Functional::P0 { tau_rel } => phi_p0(a, x, tau_rel),
        };
        r.unwrap_or(f64::INFINITY)
    }

    /// Value at `x / ||x||_2`.
    fn eval_unit(self, a: &Tensor, x: &[f64]) -> f64 {
        let r = norm2(x);
        self.eval(a, x) / r.powi(2 * (a.order() as i32 - 1))
    }

    fn active_set(self, x: &[f64]) -> Vec<usize> {
        match self {
            Functional::P => (0..x.len()).collect(),
            Functional::P0 { tau_rel } => support(x, tau_rel)
                .map(|s| s.as_slice().to_vec())
                .unwrap_or_default(),
        }
    }
}

/// Decides the P property: every nonzero `x` has some `i` with
/// `x_i^(m-1) (A x^(m-1))_i > 0`.
pub fn check_p(a: &Tensor, budget: &SearchBudget) -> Result<PVerdict> {
    budget.validate()?;
    let diag = a.diagonal_entries();
    if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
        return refuted(a, Property::P, unit(a.dim(), i), Some(diag[i]), budget);
    }
    if let Some(chain) = p_certificate(a)? {
        let mut v = PVerdict::new(Property::P, Verdict::Certified, budget);
        v.certificate_chain = chain;
        return Ok(v);
    }
    search(a, Property::P, Functional::P, budget)
}

/// Decides the P0 property: every nonzero `x` has some `i` with `x_i != 0`
/// and `x_i^(m-1) (A x^(m-1))_i >= 0`.
pub fn check_p0(a: &Tensor, budget: &SearchBudget) -> Result<PVerdict> {
    budget.validate()?;
    let diag = a.diagonal_entries();
    if let Some(i) = diag.iter().position(|&d| d < -budget.tol) {
        return refuted(a, Property::P0, unit(a.dim(), i), Some(diag[i]), budget);
    }
    if let Some(chain) = p0_certificate(a)? {
        let mut v = PVerdict::new(Property::P0, Verdict::Certified, budget);
        v.certificate_chain = chain;
        return Ok(v);
    }
    search(
        a,
        Property::P0,
        Functional::P0 {
            tau_rel: budget.tau_rel,
        },
        budget,
    )
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn link(rule: CertRule, report: ClassReport) -> ChainLink {
    ChainLink { rule, report }
}

fn trusted_provenance(a: &Tensor) -> Option<&Provenance> {
    a.provenance().filter(|p| p.matches(a))
}

fn provenance_report(class: ClassName, p: &Provenance) -> ClassReport {
    ClassReport::new(
        class,
        Verdict::Certified,
        format!("{} recipe rebuilds the tensor exactly", p.kind()),
    )
}

fn exactly_symmetric(a: &Tensor) -> bool {
    a.symmetric() || a.check_symmetric(0.0)
}

fn p_certificate(a: &Tensor) -> Result<Option<Vec<ChainLink>>> {
    let pos = diagonal_sign_report(a, true);
    if !pos.is_certified() {
        return Ok(None);
    }
    let sdd = is_diagonally_dominant(a, true);
    if sdd.is_certified() {
        return Ok(Some(vec![
            link(CertRule::StrictDiagonalDominance, sdd),
            link(CertRule::StrictDiagonalDominance, pos),
        ]));
    }
    if let Some(p) = trusted_provenance(a).filter(|p| p.is_scp()) {
        return Ok(Some(vec![link(
            CertRule::StronglyCompletelyPositive,
            provenance_report(ClassName::StronglyCompletelyPositive, p),
        )]));
    }
    let odd = a.order() % 2 == 1;
    if odd || exactly_symmetric(a) {
        let b = is_b_tensor(a, true);
        if b.is_certified() {
            let rule = if odd {
                CertRule::OddOrderBTensor
            } else {
                CertRule::SymmetricEvenOrderBTensor
            };
            return Ok(Some(vec![link(rule, b)]));
        }
    }
    let h = is_h_tensor(a, None);
    if h.pivot_above_upper_bound() {
        return Ok(Some(vec![
            link(CertRule::NonsingularHPositiveDiagonal, h.report),
            link(CertRule::NonsingularHPositiveDiagonal, pos),
        ]));
    }
    Ok(None)
}

fn p0_certificate(a: &Tensor) -> Result<Option<Vec<ChainLink>>> {
    if let Some(chain) = p_certificate(a)? {
        return Ok(Some(chain));
    }
    if let Some(p) = trusted_provenance(a) {
        if p.is_cp() {
            return Ok(Some(vec![link(
                CertRule::CompletelyPositive,
                provenance_report(ClassName::CompletelyPositive, p),
            )]));
        }
        if p.is_p0_by_construction() {
            let (rule, class) = match p {
                Provenance::Laplacian { .. } => {
                    (CertRule::LaplacianConstruction, ClassName::HypergraphLaplacian)
                }
                _ => (CertRule::BasisTensorConstruction, ClassName::RankOneBasis),
            };
            return Ok(Some(vec![link(rule, provenance_report(class, p))]));
        }
    }
    let nonneg = diagonal_sign_report(a, false);
    if !nonneg.is_certified() {
        return Ok(None);
    }
    let dd = is_diagonally_dominant(a, false);
    if dd.is_certified() {
        return Ok(Some(vec![
            link(CertRule::DiagonalDominance, dd),
            link(CertRule::DiagonalDominance, nonneg),
        ]));
    }
    let odd = a.order() % 2 == 1;
    if odd || exactly_symmetric(a) {
        let b = is_b_tensor(a, false);
        if b.is_certified() {
            let rule = if odd {
                CertRule::OddOrderB0Tensor
            } else {
                CertRule::SymmetricEvenOrderB0Tensor
            };
            return Ok(Some(vec![link(rule, b)]));
        }
    }
    let h = is_h_tensor(a, None);
    if h.pivot_at_least_upper_bound() {
        return Ok(Some(vec![
            link(CertRule::HNonnegativeDiagonal, h.report),
            link(CertRule::HNonnegativeDiagonal, nonneg),
        ]));
    }
    Ok(None)
}

/// The deterministic probe set: all nonzero sign patterns for `n <= 6`,
/// otherwise `+-e_i` and `+-1`; every probe at unit 2-norm.
fn battery(n: usize) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = if n <= 6 {
        sign_patterns(n).collect()
    } else {
        let mut b = Vec::with_capacity(2 * n + 2);
        for i in 0..n {
            let e = unit(n, i);
            b.push(e.iter().map(|v| -v).collect());
            b.push(e);
        }
        b.push(vec![1.0; n]);
        b.push(vec![-1.0; n]);
        b
    };
    raw.iter().filter_map(|x| normalize2(x)).collect()
}

fn search(a: &Tensor, property: Property, f: Functional, budget: &SearchBudget) -> Result<PVerdict> {
    let n = a.dim();
    let tol = budget.tol;
    let hit = |v: f64| match f {
        Functional::P => v <= tol,
        Functional::P0 { .. } => v < -tol,
    };

    let mut scored: Vec<(f64, Vec<f64>)> = battery(n)
        .into_iter()
        .map(|x| (f.eval_unit(a, &x), x))
        .collect();
    let battery_min = scored.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if let Some(w) = scored
        .iter()
        .filter(|(v, _)| hit(*v))
        .find_map(|(_, x)| confirmed_witness(a, f, x, budget))
    {
        return finish_refuted(a, property, f, &w, battery_min, budget);
    }
    scored.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut starts: Vec<Vec<f64>> = scored
        .iter()
        .take(budget.starts)
        .map(|(_, x)| x.clone())
        .collect();
    starts.extend((0..budget.starts as u64).map(|k| unit_sphere(&mut budget.rng(k), n)));

    let runs: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|x0| subgradient_descent(a, f, x0, budget.iters))
        .collect();
    let mut margin = battery_min;
    let mut found: Option<Vec<f64>> = None;
    for (v, x) in &runs {
        margin = margin.min(*v);
        if found.is_none() && hit(*v) {
            if let Some(w) = confirmed_witness(a, f, x, budget) {
                found = Some(w);
            }
        }
    }
    if let Some(w) = found {
        return finish_refuted(a, property, f, &w, margin, budget);
    }
    let mut v = PVerdict::new(property, Verdict::Likely, budget);
    v.search_margin = Some(margin);
    Ok(v)
}

/// Turns a search hit into a reportable witness, or rejects it. Components
/// below the support threshold are set to zero. A P witness must satisfy
/// `phi_p <= 0` exactly once rescaled to unit max norm; a P0 witness is
/// re-evaluated with the exact support, so it never relies on dropping a tiny
/// nonzero component.
fn confirmed_witness(a: &Tensor, f: Functional, x: &[f64], budget: &SearchBudget) -> Option<Vec<f64>> {
    let scale = norm_inf(x);
    let snapped: Vec<f64> = x
        .iter()
        .map(|&v| if v.abs() <= budget.tau_rel * scale { 0.0 } else { v })
        .collect();
    match f {
        Functional::P => [snapped, x.to_vec()].into_iter().find_map(|c| {
            let w = normalize_inf(&c)?;
            (phi_p(a, &w).ok()? <= 0.0).then_some(w)
        }),
        Functional::P0 { .. } => {
            let v = Functional::P0 { tau_rel: 0.0 }.eval_unit(a, &snapped);
            (v < -budget.tol).then_some(snapped)
        }
    }
}

fn finish_refuted(
    a: &Tensor,
    property: Property,
    f: Functional,
    x: &[f64],
    margin: f64,
    budget: &SearchBudget,
) -> Result<PVerdict> {
    let mut v = refuted(a, property, x.to_vec(), None, budget)?;
    v.search_margin = Some(margin);
    if let (Functional::P0 { .. }, Some(w)) = (f, &v.witness) {
        v.witness_value_exact = Some(phi_p0(a, w, 0.0)?);
    }
    Ok(v)
}

fn refuted(
    a: &Tensor,
    property: Property,
    x: Vec<f64>,
    margin: Option<f64>,
    budget: &SearchBudget,
) -> Result<PVerdict> {
    let w = normalize_inf(&x).ok_or_else(|| Error::DegenerateInput("zero witness".into()))?;
    let value = match property {
        Property::P0 => phi_p0(a, &w, budget.tau_rel)?,
        _ => phi_p(a, &w)?,
    };
    let mut v = PVerdict::new(property, Verdict::Refuted, budget);
    v.witness_value = Some(value);
    if property == Property::P0 {
        v.witness_value_exact = Some(phi_p0(a, &w, 0.0)?);
    }
    v.witness = Some(w);
    v.search_margin = margin;
    Ok(v)
}

/// Subgradient descent on the unit sphere. Coordinates that are zero at the
/// start stay zero, so starts on a coordinate face search the corresponding
/// principal subtensor.
fn subgradient_descent(a: &Tensor, f: Functional, x0: &[f64], iters: usize) -> (f64, Vec<f64>) {
    let p = a.order() as i32 - 1;
    let free: Vec<bool> = x0.iter().map(|&v| v != 0.0).collect();
    let Some(mut x) = normalize2(x0) else {
        return (f64::INFINITY, x0.to_vec());
    };
    let mut best = (f.eval_unit(a, &x), x.clone());
    for k in 0..iters {
        let Ok(ax) = a.contract_m1(&x) else { break };
        let active = f.active_set(&x);
        let Some(i) = active.into_iter().reduce(|b, j| {
            let tb = x[b].powi(p) * ax[b];
            let tj = x[j].powi(p) * ax[j];
            if tj > tb {
                j
            } else {
                b
            }
        }) else {
            break;
        };
        let Ok(row) = a.jacobian_m1_row(i, &x) else { break };
        let xp = x[i].powi(p);
        let mut g: Vec<f64> = row.iter().map(|r| xp * r).collect();
        g[i] += p as f64 * x[i].powi(p - 1) * ax[i];
        for (gj, &fr) in g.iter_mut().zip(&free) {
            if !fr {
                *gj = 0.0;
            }
        }
        let radial = dot(&g, &x);
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(gj, xj)| gj - radial * xj).collect();
        let tn = norm2(&tangent);
        if !(tn > 1e-15) {
            break;
        }
        let step = 1.0 / (k as f64 + 10.0);
        let y: Vec<f64> = x.iter().zip(&tangent).map(|(xj, d)| xj - step * d / tn).collect();
        let Some(y) = normalize2(&y) else { break };
        x = y;
        let v = f.eval_unit(a, &x);
        if v < best.0 {
            best = (v, x.clone());
        }
    }
    best
}

/// Searches for `x > 0` with `A x^(m-1) > 0` by maximizing
/// `min_i (A x^(m-1))_i` over the simplex. Failure to find one is reported
/// as `LIKELY_NOT`, never as a refutation.
pub fn check_s(a: &Tensor, budget: &SearchBudget) -> Result<PVerdict> {
    budget.validate()?;
    let n = a.dim();
    let ones = vec![1.0; n];
    let g1 = s_objective(a, &ones);
    if g1 > budget.tol && s_verified(a, &ones) {
        return Ok(s_certified(ones, g1, budget));
    }
    let mut starts = vec![vec![1.0 / n as f64; n]];
    starts.extend((0..budget.starts as u64).map(|k| simplex(&mut budget.rng(k), n)));
    let runs: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|x0| supergradient_ascent(a, x0, budget.iters))
        .collect();
    let mut margin = g1 / (n as f64).powi(a.order() as i32 - 1);
    for (g, x) in runs {
        margin = margin.max(g);
        if g > budget.tol && s_verified(a, &x) {
            return Ok(s_certified(x, g, budget));
        }
    }
    let mut v = PVerdict::new(Property::S, Verdict::LikelyNot, budget);
    v.search_margin = Some(margin);
    Ok(v)
}

fn s_objective(a: &Tensor, x: &[f64]) -> f64 {
    a.contract_m1(x)
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NEG_INFINITY)
}

fn s_verified(a: &Tensor, x: &[f64]) -> bool {
    x.iter().all(|&v| v > 0.0)
        && a.contract_m1(x)
            .map(|v| v.iter().all(|&u| u > 0.0))
            .unwrap_or(false)
}

fn s_certified(x: Vec<f64>, g: f64, budget: &SearchBudget) -> PVerdict {
    let report = ClassReport::new(
        ClassName::STensor,
        Verdict::Certified,
        "x > 0 and A x^(m-1) > 0 re-verified componentwise",
    )
    .with_witness(Witness::Vector(x.clone()))
    .with_value(g);
    let mut v = PVerdict::new(Property::S, Verdict::Certified, budget);
    v.witness_value = Some(g);
    v.search_margin = Some(g);
    v.witness = Some(x);
    v.certificate_chain = vec![link(CertRule::PositiveWitness, report)];
    v
}

fn supergradient_ascent(a: &Tensor, x0: &[f64], iters: usize) -> (f64, Vec<f64>) {
    let clamp = |y: Vec<f64>| -> Vec<f64> { y.into_iter().map(|v| v.max(S_FLOOR)).collect() };
    let mut x = clamp(project_simplex(x0));
    let mut best = (s_objective(a, &x), x.clone());
    for k in 0..iters {
        let Ok(ax) = a.contract_m1(&x) else { break };
        let i = ax
            .iter()
            .enumerate()
            .fold(0, |b, (j, &v)| if v < ax[b] { j } else { b });
        let Ok(g) = a.jacobian_m1_row(i, &x) else { break };
        let gn = norm2(&g);
        if !(gn > 1e-15) {
            break;
        }
        let step = 0.5 / (k as f64 + 10.0);
        let y: Vec<f64> = x.iter().zip(&g).map(|(xj, gj)| xj + step * gj / gn).collect();
        x = clamp(project_simplex(&y));
        let v = s_objective(a, &x);
        if v > best.0 {
            best = (v, x.clone());
        }
    }
    best
}

/// The diagonal of a positive `D_x` with `<D_x x^[m-1], A x^(m-1)> > 0`,
/// built as `delta + eps` where `delta` marks the positive terms.
pub fn scaling_matrix(a: &Tensor, x: &[f64]) -> Result<Vec<f64>> {
    let t = phi_terms(a, x)?;
    let phi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(phi > 0.0) {
        return Err(Error::NotPBehaviorAt { x: x.to_vec(), phi });
    }
    let delta: Vec<f64> = t.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let pos = dot(&delta, &t);
    let mut acc = Accumulator::default();
    t.iter().for_each(|&v| acc.add(v));
    let total = acc.value();
    let eps = if total == 0.0 {
        1.0
    } else {
        0.5 * pos / total.abs()
    };
    let d: Vec<f64> = delta.iter().map(|v| v + eps).collect();
    let inner = dot(&d, &t);
    if !(inner > 0.0) {
        return Err(Error::NotPBehaviorAt { x: x.to_vec(), phi });
    }
    Ok(d)
}

/// Membership in `{A : diag(A) >= 0}`, the convex hull of the P0 tensors.
pub fn hull_membership(a: &Tensor) -> ClassReport {
    let diag = a.diagonal_entries();
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    match diag.iter().position(|&d| d < 0.0) {
        None => ClassReport::new(ClassName::P0Hull, Verdict::Certified, "diagonal is nonnegative")
            .with_value(min),
        Some(i) => ClassReport::new(
            ClassName::P0Hull,
            Verdict::Refuted,
            format!("diagonal entry {i} equals {}", diag[i]),
        )
        .with_witness(Witness::Index(vec![i; a.order()]))
        .with_value(diag[i]),
    }
}

/// `+-e_(i1) ⊗ ... ⊗ e_(im)`. Negation is only allowed off the diagonal.
pub fn basis_p0_tensor(indices: &[usize], dim: usize, negate: bool) -> Result<Tensor> {
    if indices.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "order must be >= 2, got {}",
            indices.len()
        )));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= dim) {
        return Err(Error::Index { index: i, dim });
    }
    let diagonal = is_diagonal_index(indices);
    if negate && diagonal {
        return Err(Error::DiagonalNegation(indices.to_vec()));
    }
    let t = Tensor::zeros(indices.len(), dim)?;
    let pos = t.linear_index(indices)?;
    let mut values = t.into_values();
    values[pos] = if negate { -1.0 } else { 1.0 };
    Ok(Tensor::new(indices.len(), dim, values, diagonal)?.with_provenance(Provenance::BasisP0 {
        indices: indices.to_vec(),
        negate,
    }))
}
