//! Construction recipes attached to generated tensors.
//!
//! A recipe is only ever used as a certificate after [`Provenance::matches`]
//! has rebuilt the tensor from it and compared entry by entry, so a stale or
//! edited recipe degrades to no certificate rather than a wrong one.

use serde::{Deserialize, Serialize};

use crate::classes::{cauchy_tensor, cp_tensor, laplacian_tensors, FactorSet, Hypergraph, LaplacianVariant};
use crate::error::{Error, Result};
use crate::tensor::{is_diagonal_index, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    CompletelyPositive { factors: FactorSet },
    Cauchy { generator: Vec<f64> },
    Laplacian { hypergraph: Hypergraph, variant: LaplacianVariant },
    BasisP0 { indices: Vec<usize>, negate: bool },
}

impl Provenance {
    pub fn kind(&self) -> &'static str {
        match self {
            Provenance::CompletelyPositive { .. } => "completely_positive",
            Provenance::Cauchy { .. } => "cauchy",
            Provenance::Laplacian { .. } => "laplacian",
            Provenance::BasisP0 { .. } => "basis_p0",
        }
    }

    /// Rebuilds the tensor described by the recipe.
    pub fn rebuild(&self, order: usize, dim: usize) -> Result<Tensor> {
        let t = match self {
            Provenance::CompletelyPositive { factors } => cp_tensor(factors, order)?,
            Provenance::Cauchy { generator } => cauchy_tensor(generator, order)?,
            Provenance::Laplacian { hypergraph, variant } => {
                if hypergraph.arity() != order {
                    return Err(Error::InvalidParameter(format!(
                        "hypergraph arity {} does not match order {order}",
                        hypergraph.arity()
                    )));
                }
                let l = laplacian_tensors(hypergraph)?;
                match variant {
                    LaplacianVariant::Adjacency => l.adjacency,
                    LaplacianVariant::Laplacian => l.laplacian,
                    LaplacianVariant::Signless => l.signless,
                }
            }
            Provenance::BasisP0 { indices, negate } => {
                if indices.len() != order {
                    return Err(Error::InvalidParameter(format!(
                        "{} basis indices for order {order}",
                        indices.len()
                    )));
                }
                crate::pcheck::basis_p0_tensor(indices, dim, *negate)?
            }
        };
        if t.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: t.dim(),
            });
        }
        Ok(t)
    }

    /// True iff rebuilding the recipe reproduces `t` to `1e-12` relative.
    pub fn matches(&self, t: &Tensor) -> bool {
        match self.rebuild(t.order(), t.dim()) {
            Ok(r) => r.values().iter().zip(t.values()).all(|(a, b)| {
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
            }),
            Err(_) => false,
        }
    }

    /// Completely positive by construction.
    pub fn is_cp(&self) -> bool {
        match self {
            Provenance::CompletelyPositive { .. } => true,
            Provenance::Cauchy { generator } => generator.iter().all(|&u| u > 0.0),
            // e_i ⊗ ... ⊗ e_i is the only symmetric basis tensor.
            Provenance::BasisP0 { indices, negate } => !negate && is_diagonal_index(indices),
            Provenance::Laplacian { .. } => false,
        }
    }

    /// Strongly completely positive by construction.
    pub fn is_scp(&self) -> bool {
        match self {
            Provenance::CompletelyPositive { factors } => factors.spans(),
            Provenance::Cauchy { generator } => {
                let mut u = generator.clone();
                u.sort_by(f64::total_cmp);
                u.iter().all(|&v| v > 0.0) && u.windows(2).all(|w| w[0] != w[1])
            }
            Provenance::BasisP0 { .. } | Provenance::Laplacian { .. } => false,
        }
    }

    /// Recipes whose output is P0 by a direct theorem (rank-one basis tensors,
    /// Laplacian and signless Laplacian tensors).
    pub fn is_p0_by_construction(&self) -> bool {
        match self {
            Provenance::BasisP0 { indices, negate } => !(*negate && is_diagonal_index(indices)),
            Provenance::Laplacian { variant, .. } => *variant != LaplacianVariant::Adjacency,
            _ => false,
        }
    }
}
