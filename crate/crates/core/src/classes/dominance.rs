use serde::{Deserialize, Serialize};

use super::{ClassName, ClassReport, Verdict, Witness};
use crate::error::{Error, Result};
use crate::linalg::Accumulator;
use crate::spectral::{nqz_spectral_radius, SpectralRadiusResult};
use crate::tensor::Tensor;

const NQZ_MAX_ITER: usize = 20_000;

/// `|a_{i..i}| >= sum of |a_{i i2..im}|` over the rest of row `i` (strictly
/// if `strict`). Compared exactly: entries are data, not estimates.
pub fn is_diagonally_dominant(a: &Tensor, strict: bool) -> ClassReport {
    let class = if strict {
        ClassName::StrictlyDiagonallyDominant
    } else {
        ClassName::DiagonallyDominant
    };
    let mut min_slack = f64::INFINITY;
    for i in 0..a.dim() {
        let diag_pos = a.diagonal_position(i) - i * a.row_len();
        let mut off = Accumulator::default();
        for (k, v) in a.row(i).iter().enumerate() {
            if k != diag_pos {
                off.add(v.abs());
            }
        }
        let d = a.row(i)[diag_pos].abs();
        let off = off.value();
        min_slack = min_slack.min(d - off);
        let holds = if strict { d > off } else { d >= off };
        if !holds {
            return ClassReport::new(
                class,
                Verdict::Refuted,
                format!("row {i}: |diagonal| = {d} but off-diagonal absolute sum = {off}"),
            )
            .with_witness(Witness::Index(vec![i]))
            .with_value(d - off);
        }
    }
    ClassReport::new(class, Verdict::Certified, "every row dominated by its diagonal entry")
        .with_value(min_slack)
}

/// Sign of the diagonal: all entries `> 0` (`strict`) or `>= 0`.
pub fn diagonal_sign_report(a: &Tensor, strict: bool) -> ClassReport {
    let class = if strict {
        ClassName::PositiveDiagonal
    } else {
        ClassName::NonnegativeDiagonal
    };
    let diag = a.diagonal_entries();
    let bad = diag
        .iter()
        .position(|&d| if strict { d <= 0.0 } else { d < 0.0 });
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    match bad {
        None => ClassReport::new(class, Verdict::Certified, "diagonal sign condition holds")
            .with_value(min),
        Some(i) => ClassReport::new(
            class,
            Verdict::Refuted,
            format!("diagonal entry {i} equals {}", diag[i]),
        )
        .with_witness(Witness::Index(vec![i; a.order()]))
        .with_value(diag[i]),
    }
}

/// Every off-diagonal entry `<= 0`.
pub fn is_z_tensor(a: &Tensor) -> ClassReport {
    for (k, &v) in a.values().iter().enumerate() {
        let idx = a.multi_index(k);
        if v > 0.0 && !crate::tensor::is_diagonal_index(&idx) {
            return ClassReport::new(
                ClassName::ZTensor,
                Verdict::Refuted,
                format!("positive off-diagonal entry {v} at {idx:?}"),
            )
            .with_witness(Witness::Index(idx))
            .with_value(v);
        }
    }
    ClassReport::new(ClassName::ZTensor, Verdict::Certified, "all off-diagonal entries are <= 0")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MTensorReport {
    pub report: ClassReport,
    /// The `s` in `A = s I - B`.
    pub pivot: Option<f64>,
    pub radius: Option<SpectralRadiusResult>,
}

impl MTensorReport {
    /// True when `s` exceeds the Collatz-Wielandt upper bound on `rho(B)`,
    /// which certifies `s > rho(B)` without relying on a tolerance.
    pub fn pivot_above_upper_bound(&self) -> bool {
        match (self.pivot, &self.radius) {
            (Some(s), Some(r)) => s > r.upper_bound * (1.0 + 1e-12),
            _ => false,
        }
    }

    /// `s >= upper bound`: certifies `s >= rho(B)`.
    pub fn pivot_at_least_upper_bound(&self) -> bool {
        match (self.pivot, &self.radius) {
            (Some(s), Some(r)) => s >= r.upper_bound * (1.0 + 1e-12),
            _ => false,
        }
    }
}

/// Decomposes a Z-tensor as `s I - B` with `s = max diagonal + 1` and
/// compares `s` against `rho(B)`. `tol` defaults to the NQZ uncertainty plus
/// `1e-7`.
pub fn classify_m_tensor(a: &Tensor, tol: Option<f64>) -> MTensorReport {
    let s = a
        .diagonal_entries()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    classify_m_tensor_with_pivot(a, s, tol)
        .expect("pivot above the largest diagonal entry is always admissible")
}

pub fn classify_m_tensor_with_pivot(a: &Tensor, s: f64, tol: Option<f64>) -> Result<MTensorReport> {
    let z = is_z_tensor(a);
    if z.is_refuted() {
        return Ok(MTensorReport {
            report: ClassReport {
                class: ClassName::MTensor,
                detail: format!("not a Z-tensor: {}", z.detail),
                ..z
            },
            pivot: None,
            radius: None,
        });
    }
    let max_diag = a.diagonal_entries().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !(s >= max_diag) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "pivot {s} is below the largest diagonal entry {max_diag}"
        )));
    }
    // B = s I - A is nonnegative because A is a Z-tensor and s >= diag.
    let b = a
        .scaled(-1.0)?
        .add_scaled_identity(s)?;
    let b = clamp_negative_zeros(b)?;
    let radius = nqz_spectral_radius(&b, 1e-12 * s.abs().max(1.0), NQZ_MAX_ITER)?;
    let rho = radius.rho;
    let tol = tol.unwrap_or(radius.uncertainty + 1e-7);
    let report = if s > rho + tol {
        ClassReport::new(
            ClassName::NonsingularMTensor,
            Verdict::Certified,
            format!("A = {s} I - B with rho(B) = {rho} < {s}"),
        )
    } else if (s - rho).abs() <= tol {
        ClassReport::new(
            ClassName::MTensor,
            Verdict::Certified,
            format!("A = {s} I - B with rho(B) = {rho} equal to {s} within {tol:e}"),
        )
    } else {
        ClassReport::new(
            ClassName::MTensor,
            Verdict::Refuted,
            format!("A = {s} I - B with rho(B) = {rho} > {s}"),
        )
    };
    Ok(MTensorReport {
        report: report.with_value(rho),
        pivot: Some(s),
        radius: Some(radius),
    })
}

/// H-tensor test through the comparison tensor.
pub fn is_h_tensor(a: &Tensor, tol: Option<f64>) -> MTensorReport {
    let mut r = classify_m_tensor(&a.comparison_tensor(), tol);
    r.report.class = match (r.report.class, r.report.verdict) {
        (ClassName::NonsingularMTensor, _) => ClassName::NonsingularHTensor,
        _ => ClassName::HTensor,
    };
    let signs = diagonal_sign_report(a, true);
    r.report.detail = format!(
        "comparison tensor: {}; diagonal {}",
        r.report.detail,
        if signs.is_certified() {
            "all positive"
        } else if diagonal_sign_report(a, false).is_certified() {
            "nonnegative with zeros"
        } else {
            "has negative entries"
        }
    );
    r
}

/// B0 (or B when `strict`): every row sum is nonnegative and the row average
/// dominates each off-diagonal entry of the row.
pub fn is_b_tensor(a: &Tensor, strict: bool) -> ClassReport {
    let class = if strict {
        ClassName::BTensor
    } else {
        ClassName::B0Tensor
    };
    let cmp = |lhs: f64, rhs: f64| if strict { lhs > rhs } else { lhs >= rhs };
    let width = a.row_len() as f64;
    let mut min_slack = f64::INFINITY;
    for i in 0..a.dim() {
        let row = a.row(i);
        let mut acc = Accumulator::default();
        row.iter().for_each(|&v| acc.add(v));
        let sum = acc.value();
        if !cmp(sum, 0.0) {
            return ClassReport::new(class, Verdict::Refuted, format!("row {i} sums to {sum}"))
                .with_witness(Witness::Index(vec![i]))
                .with_value(sum);
        }
        let avg = sum / width;
        let diag_pos = a.diagonal_position(i) - i * a.row_len();
        for (k, &v) in row.iter().enumerate() {
            if k == diag_pos {
                continue;
            }
            min_slack = min_slack.min(avg - v);
            if !cmp(avg, v) {
                let idx = a.multi_index(i * a.row_len() + k);
                return ClassReport::new(
                    class,
                    Verdict::Refuted,
                    format!("row {i} average {avg} does not dominate entry {v} at {idx:?}"),
                )
                .with_witness(Witness::Index(idx))
                .with_value(avg - v);
            }
        }
    }
    ClassReport::new(class, Verdict::Certified, "row sums and row averages dominate")
        .with_value(min_slack)
}

fn clamp_negative_zeros(b: Tensor) -> Result<Tensor> {
    // -0.0 entries would trip the nonnegativity check of the power iteration.
    let symmetric = b.symmetric();
    let (order, dim) = (b.order(), b.dim());
    let values = b.into_values().into_iter().map(|v| v + 0.0).collect();
    Tensor::new(order, dim, values, symmetric)
}
