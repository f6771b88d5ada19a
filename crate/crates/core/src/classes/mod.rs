//! Structured tensor classes: predicates that return auditable reports and
//! constructors for the structured families.

mod definiteness;
mod dominance;
mod structured;

use serde::{Deserialize, Serialize};

pub use definiteness::{is_copositive, is_psd};
pub use dominance::{
    classify_m_tensor, classify_m_tensor_with_pivot, diagonal_sign_report, is_b_tensor,
    is_diagonally_dominant, is_h_tensor, is_z_tensor, MTensorReport,
};
pub use structured::{
    cauchy_tensor, cp_tensor, laplacian_tensors, FactorSet, Hypergraph, LaplacianTensors,
    LaplacianVariant,
};
pub(crate) use structured::permutations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Certified,
    Likely,
    LikelyNot,
    Refuted,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassName {
    PositiveDiagonal,
    NonnegativeDiagonal,
    DiagonallyDominant,
    StrictlyDiagonallyDominant,
    ZTensor,
    MTensor,
    NonsingularMTensor,
    HTensor,
    NonsingularHTensor,
    BTensor,
    B0Tensor,
    Copositive,
    StrictlyCopositive,
    Psd,
    Pd,
    /// `{A : diag(A) >= 0}`, the convex hull of the P0 tensors.
    P0Hull,
    CompletelyPositive,
    StronglyCompletelyPositive,
    HypergraphLaplacian,
    RankOneBasis,
    STensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Vector(Vec<f64>),
    Index(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: ClassName,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// The quantity the verdict was decided on (row slack, minimum found,
    /// spectral radius), when there is one.
    pub value: Option<f64>,
    pub detail: String,
}

impl ClassReport {
    pub(crate) fn new(class: ClassName, verdict: Verdict, detail: impl Into<String>) -> Self {
        Self {
            class,
            verdict,
            witness: None,
            value: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub(crate) fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn is_refuted(&self) -> bool {
        self.verdict == Verdict::Refuted
    }
}
