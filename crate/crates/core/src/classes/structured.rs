use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::numerical_rank;
use crate::provenance::Provenance;
use crate::tensor::{checked_len, kron_power, multi_indices, Tensor};

/// Relative threshold for the rank test deciding whether CP factors span.
pub const FACTOR_RANK_TOL: f64 = 1e-10;

/// An `m`-uniform hypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph", into = "RawHypergraph")]
pub struct Hypergraph {
    n: usize,
    m: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawHypergraph {
    n: usize,
    m: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<RawHypergraph> for Hypergraph {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<Self> {
        Hypergraph::new(raw.n, raw.m, raw.edges)
    }
}

impl From<Hypergraph> for RawHypergraph {
    fn from(g: Hypergraph) -> Self {
        RawHypergraph {
            n: g.n,
            m: g.m,
            edges: g.edges,
        }
    }
}

impl Hypergraph {
    /// Edges are sorted on input; repeated vertices, repeated edges and
    /// out-of-range vertices are rejected.
    pub fn new(n: usize, m: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidHypergraph(format!("arity must be >= 2, got {m}")));
        }
        if n < 1 {
            return Err(Error::InvalidHypergraph("no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        let mut sorted = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.len() != m {
                return Err(Error::Arity {
                    edge: e.clone(),
                    expected: m,
                    found: e.len(),
                });
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {e:?} repeats a vertex")));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidHypergraph(format!(
                    "vertex {v} out of range for {n} vertices"
                )));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::InvalidHypergraph(format!("edge {e:?} listed twice")));
            }
            sorted.push(e);
        }
        Ok(Self {
            n,
            m,
            edges: sorted,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                d[v] += 1;
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianVariant {
    Adjacency,
    Laplacian,
    Signless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianTensors {
    pub adjacency: Tensor,
    pub laplacian: Tensor,
    pub signless: Tensor,
    pub degrees: Vec<usize>,
}

/// Adjacency, Laplacian `D - A` and signless Laplacian `D + A` tensors.
///
/// The adjacency tensor holds `1/(m-1)!` at every ordering of every edge and
/// zero at tuples with repeated indices.
pub fn laplacian_tensors(g: &Hypergraph) -> Result<LaplacianTensors> {
    let (n, m) = (g.n, g.m);
    let len = checked_len(m, n)?;
    let weight = 1.0 / factorial(m - 1);
    let mut adj = vec![0.0; len];
    for e in &g.edges {
        for p in permutations(e) {
            let k = p.iter().fold(0, |k, &i| k * n + i);
            adj[k] = weight;
        }
    }
    let degrees = g.degrees();
    let diag_step = (0..m).fold(0, |s, _| s * n + 1);
    let mut lap: Vec<f64> = adj.iter().map(|v| -v).collect();
    let mut sgn = adj.clone();
    for (i, &d) in degrees.iter().enumerate() {
        lap[i * diag_step] = d as f64;
        sgn[i * diag_step] = d as f64;
    }
    // -0.0 from negating empty slots
    let lap = lap.into_iter().map(|v| v + 0.0).collect();
    let tag = |variant| Provenance::Laplacian {
        hypergraph: g.clone(),
        variant,
    };
    Ok(LaplacianTensors {
        adjacency: Tensor::new(m, n, adj, true)?.with_provenance(tag(LaplacianVariant::Adjacency)),
        laplacian: Tensor::new(m, n, lap, true)?.with_provenance(tag(LaplacianVariant::Laplacian)),
        signless: Tensor::new(m, n, sgn, true)?.with_provenance(tag(LaplacianVariant::Signless)),
        degrees,
    })
}

/// Nonnegative factor vectors `u_1, ..., u_r` of a completely positive tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FactorSet(Vec<Vec<f64>>);

impl FactorSet {
    pub fn new(factors: Vec<Vec<f64>>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::InvalidParameter("factor set is empty".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidParameter("factors have dimension 0".into()));
        }
        for (k, u) in factors.iter().enumerate() {
            check_dim(n, u.len())?;
            for (i, &v) in u.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("factor {k} entry {i} is {v}")));
                }
                if v < 0.0 {
                    return Err(Error::NotNonnegative {
                        index: vec![k, i],
                        value: v,
                    });
                }
            }
        }
        Ok(Self(factors))
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0[0].len()
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.0, FACTOR_RANK_TOL)
    }

    /// The factors span `R^n`.
    pub fn spans(&self) -> bool {
        self.rank() == self.dim()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FactorSet {
    type Error = Error;

    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        FactorSet::new(v)
    }
}

impl From<FactorSet> for Vec<Vec<f64>> {
    fn from(f: FactorSet) -> Self {
        f.0
    }
}

/// `sum_k u_k^{⊗m}`.
pub fn cp_tensor(factors: &FactorSet, m: usize) -> Result<Tensor> {
    let n = factors.dim();
    let len = checked_len(m, n)?;
    if m < 2 {
        return Err(Error::InvalidParameter(format!("order must be >= 2, got {m}")));
    }
    let mut values = vec![0.0; len];
    for u in factors.factors() {
        for (v, p) in values.iter_mut().zip(kron_power(u, m)) {
            *v += p;
        }
    }
    Ok(Tensor::new(m, n, values, true)?.with_provenance(Provenance::CompletelyPositive {
        factors: factors.clone(),
    }))
}

/// Cauchy tensor `c_{i1..im} = 1 / (u_{i1} + ... + u_{im})`.
pub fn cauchy_tensor(u: &[f64], m: usize) -> Result<Tensor> {
    if u.is_empty() {
        return Err(Error::InvalidParameter("empty generating vector".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("order must be >= 2, got {m}")));
    }
    if let Some(v) = u.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("generating vector entry {v}")));
    }
    checked_len(m, u.len())?;
    let mut values = Vec::with_capacity(u.len().pow(m as u32));
    for idx in multi_indices(m, u.len()) {
        // Summing in sorted order makes every orbit bitwise identical.
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        let den: f64 = sorted.iter().map(|&i| u[i]).sum();
        if den == 0.0 {
            return Err(Error::SingularCauchy(idx));
        }
        values.push(1.0 / den);
    }
    Ok(Tensor::new(m, u.len(), values, true)?.with_provenance(Provenance::Cauchy {
        generator: u.to_vec(),
    }))
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All orderings of `items` (with repetition if `items` repeats).
pub(crate) fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_entries() {
        let c = cauchy_tensor(&[1.0, 2.0], 3).unwrap();
        assert_eq!(c.get(&[0, 0, 0]).unwrap(), 1.0 / 3.0);
        assert_eq!(c.get(&[0, 0, 1]).unwrap(), 1.0 / 4.0);
        assert_eq!(c.get(&[1, 0, 1]).unwrap(), 1.0 / 5.0);
        assert_eq!(c.get(&[1, 1, 1]).unwrap(), 1.0 / 6.0);
        assert!(c.symmetric());
        let p = c.provenance().unwrap();
        assert!(p.is_cp() && p.is_scp());

        let flat = cauchy_tensor(&[1.0, 1.0], 3).unwrap();
        assert!(flat.values().iter().all(|&v| v == 1.0 / 3.0));
        assert!(flat.provenance().unwrap().is_cp());
        assert!(!flat.provenance().unwrap().is_scp());

        let three = cauchy_tensor(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(three.dim(), 3);
        assert!(three.provenance().unwrap().is_scp());
    }

    #[test]
    fn cauchy_singular_denominator() {
        assert!(matches!(cauchy_tensor(&[1.0, -1.0], 2), Err(Error::SingularCauchy(_))));
        let mixed = cauchy_tensor(&[-1.0, 3.0], 3).unwrap();
        assert!(!mixed.provenance().unwrap().is_cp());
    }

    #[test]
    fn single_edge_laplacian() {
        let g = Hypergraph::new(3, 3, vec![vec![2, 0, 1]]).unwrap();
        let l = laplacian_tensors(&g).unwrap();
        assert_eq!(l.degrees, vec![1, 1, 1]);
        for p in permutations(&[0, 1, 2]) {
            assert_eq!(l.adjacency.get(&p).unwrap(), 0.5);
            assert_eq!(l.laplacian.get(&p).unwrap(), -0.5);
            assert_eq!(l.signless.get(&p).unwrap(), 0.5);
        }
        assert_eq!(l.adjacency.values().iter().filter(|&&v| v != 0.0).count(), 6);
        assert_eq!(l.laplacian.diagonal_entries(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn empty_and_two_edge_hypergraphs() {
        let g = Hypergraph::new(3, 3, vec![]).unwrap();
        let l = laplacian_tensors(&g).unwrap();
        assert!(l.laplacian.values().iter().all(|&v| v == 0.0));
        assert!(l.signless.values().iter().all(|&v| v == 0.0));
        let g = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![0, 1, 3]]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 1, 1]);
    }

    #[test]
    fn hypergraph_validation() {
        assert!(matches!(
            Hypergraph::new(4, 3, vec![vec![0, 1]]),
            Err(Error::Arity { expected: 3, found: 2, .. })
        ));
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1, 4]]).is_err());
        assert!(Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![2, 1, 0]]).is_err());
        let g: Hypergraph = serde_json::from_str(r#"{"n": 3, "m": 2, "edges": [[1, 0]]}"#).unwrap();
        assert_eq!(g.edges(), &[vec![0, 1]]);
        assert!(serde_json::from_str::<Hypergraph>(r#"{"n": 3, "m": 2, "edges": [[0]]}"#).is_err());
    }

    #[test]
    fn cp_constructions() {
        let basis = FactorSet::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])
            .unwrap();
        let t = cp_tensor(&basis, 3).unwrap();
        assert_eq!(t.values(), Tensor::identity(3, 3).unwrap().values());
        assert!(basis.spans());

        let single = FactorSet::new(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(cp_tensor(&single, 3).unwrap().values(), &[1.0; 8]);
        assert!(!single.spans());

        let two = FactorSet::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let t = cp_tensor(&two, 3).unwrap();
        assert!(two.spans());
        assert_eq!(t.get(&[0, 0, 0]).unwrap(), 2.0);
        assert!(t.provenance().unwrap().is_scp());
    }

    #[test]
    fn negative_factor_rejected() {
        assert!(matches!(
            FactorSet::new(vec![vec![1.0, -0.5]]),
            Err(Error::NotNonnegative { .. })
        ));
        assert!(FactorSet::new(vec![]).is_err());
        assert!(FactorSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
