//! Dense hypercubic tensors and the multilinear kernels built on them.
//!
//! Entries are stored row-major: the multi-index `(i_1, ..., i_m)` lives at
//! `sum_k i_k * n^(m-k)` with 0-based indices, so the first index selects a
//! contiguous block of `n^(m-1)` entries.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm_inf, Accumulator};
use crate::provenance::Provenance;

/// Relative tolerance used when validating a claimed symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default relative threshold for [`support`].
pub const DEFAULT_TAU_REL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
    symmetric: bool,
    provenance: Option<Provenance>,
}

impl Tensor {
    /// Builds a tensor from row-major values. A `symmetric` claim is checked
    /// by a full permutation scan.
    pub fn new(order: usize, dim: usize, values: Vec<f64>, symmetric: bool) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidTensor(format!("order must be >= 2, got {order}")));
        }
        if dim < 1 {
            return Err(Error::InvalidTensor("dimension must be >= 1".into()));
        }
        let len = checked_len(order, dim)?;
        if values.len() != len {
            return Err(Error::InvalidTensor(format!(
                "expected {len} entries for order {order}, dimension {dim}, got {}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor(format!(
                "non-finite entry at {:?}",
                unravel(k, order, dim)
            )));
        }
        let t = Self {
            order,
            dim,
            values,
            symmetric,
            provenance: None,
        };
        if symmetric && !t.check_symmetric(SYMMETRY_TOL) {
            return Err(Error::InvalidTensor(
                "tensor is flagged symmetric but is not invariant under index permutations".into(),
            ));
        }
        Ok(t)
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let len = checked_len(order, dim)?;
        Self::new(order, dim, vec![0.0; len], true)
    }

    /// Builds an unflagged tensor entry by entry.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        checked_len(order, dim)?;
        let values = multi_indices(order, dim).map(|idx| f(&idx)).collect();
        Self::new(order, dim, values, false)
    }

    /// Sets the symmetry flag after validating it.
    pub fn into_symmetric(mut self) -> Result<Self> {
        if !self.check_symmetric(SYMMETRY_TOL) {
            return Err(Error::InvalidTensor(
                "tensor is not invariant under index permutations".into(),
            ));
        }
        self.symmetric = true;
        Ok(self)
    }

    /// Diagonal tensor with the given diagonal.
    pub fn diagonal(order: usize, diag: &[f64]) -> Result<Self> {
        let mut t = Self::zeros(order, diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            let k = t.diagonal_position(i);
            t.values[k] = d;
        }
        t.check_finite()?;
        Ok(t)
    }

    /// The unit tensor: ones on the diagonal.
    pub fn identity(order: usize, dim: usize) -> Result<Self> {
        Self::diagonal(order, &vec![1.0; dim])
    }

    pub fn all_ones(order: usize, dim: usize) -> Result<Self> {
        let len = checked_len(order, dim)?;
        Self::new(order, dim, vec![1.0; len], true)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The symmetry flag carried as metadata.
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn without_provenance(mut self) -> Self {
        self.provenance = None;
        self
    }

    /// Number of entries in one first-index slice, `n^(m-1)`.
    pub fn row_len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let r = self.row_len();
        &self.values[i * r..(i + 1) * r]
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        check_dim(self.order, idx.len())?;
        let mut k = 0;
        for &i in idx {
            if i >= self.dim {
                return Err(Error::Index {
                    index: i,
                    dim: self.dim,
                });
            }
            k = k * self.dim + i;
        }
        Ok(k)
    }

    pub fn multi_index(&self, linear: usize) -> Vec<usize> {
        unravel(linear, self.order, self.dim)
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.values[self.linear_index(idx)?])
    }

    pub fn diagonal_position(&self, i: usize) -> usize {
        // 1 + n + ... + n^(m-1)
        (0..self.order).fold(0, |s, _| s * self.dim + 1) * i
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.values[self.diagonal_position(i)])
            .collect()
    }

    /// `A x^(m-1)`: contracts every mode but the first with `x`.
    pub fn contract_m1(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let p = kron_power(x, self.order - 1);
        Ok((0..self.dim).map(|i| dot(self.row(i), &p)).collect())
    }

    /// `A x^m = <x, A x^(m-1)>`.
    pub fn contract_full(&self, x: &[f64]) -> Result<f64> {
        let v = self.contract_m1(x)?;
        Ok(dot(x, &v))
    }

    /// `A x^(m-2)` as a row-major `n x n` matrix: contracts modes 3..m.
    pub fn contract_m2(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim, x.len())?;
        let n = self.dim;
        let p = kron_power(x, self.order - 2);
        let block = p.len();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let start = (i * n + j) * block;
                        dot(&self.values[start..start + block], &p)
                    })
                    .collect()
            })
            .collect())
    }

    /// Exact Jacobian of `x -> A x^(m-1)` for an arbitrary (not necessarily
    /// symmetric) tensor: every trailing mode contributes one term.
    pub fn jacobian_m1(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim, x.len())?;
        let n = self.dim;
        let trailing = self.order - 1;
        let mut acc = vec![vec![Accumulator::default(); n]; n];
        let mut prefix = vec![1.0; trailing + 1];
        let mut suffix = vec![1.0; trailing + 1];
        for (lin, idx) in multi_indices(self.order, n).enumerate() {
            let a = self.values[lin];
            if a == 0.0 {
                continue;
            }
            let tail = &idx[1..];
            for k in 0..trailing {
                prefix[k + 1] = prefix[k] * x[tail[k]];
            }
            for k in (0..trailing).rev() {
                suffix[k] = suffix[k + 1] * x[tail[k]];
            }
            for k in 0..trailing {
                acc[idx[0]][tail[k]].add(a * prefix[k] * suffix[k + 1]);
            }
        }
        Ok(acc
            .into_iter()
            .map(|row| row.into_iter().map(|a| a.value()).collect())
            .collect())
    }

    /// Row `i` of [`Tensor::jacobian_m1`].
    pub fn jacobian_m1_row(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        if i >= self.dim {
            return Err(Error::Index {
                index: i,
                dim: self.dim,
            });
        }
        let n = self.dim;
        let trailing = self.order - 1;
        let mut acc = vec![Accumulator::default(); n];
        let mut prefix = vec![1.0; trailing + 1];
        let mut suffix = vec![1.0; trailing + 1];
        for (t, idx) in multi_indices(trailing, n).enumerate() {
            let a = self.row(i)[t];
            if a == 0.0 {
                continue;
            }
            for k in 0..trailing {
                prefix[k + 1] = prefix[k] * x[idx[k]];
            }
            for k in (0..trailing).rev() {
                suffix[k] = suffix[k + 1] * x[idx[k]];
            }
            for k in 0..trailing {
                acc[idx[k]].add(a * prefix[k] * suffix[k + 1]);
            }
        }
        Ok(acc.into_iter().map(|a| a.value()).collect())
    }

    pub fn principal_subtensor(&self, set: &IndexSet) -> Result<Tensor> {
        if let Some(&bad) = set.as_slice().iter().find(|&&i| i >= self.dim) {
            return Err(Error::Index {
                index: bad,
                dim: self.dim,
            });
        }
        let s = set.as_slice();
        let values = multi_indices(self.order, s.len())
            .map(|idx| {
                let k = idx.iter().fold(0, |k, &j| k * self.dim + s[j]);
                self.values[k]
            })
            .collect();
        Ok(Tensor {
            order: self.order,
            dim: s.len(),
            values,
            symmetric: self.symmetric,
            provenance: None,
        })
    }

    /// The comparison tensor: `|a|` on the diagonal, `-|a|` elsewhere.
    pub fn comparison_tensor(&self) -> Tensor {
        let n = self.dim;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                if a == 0.0 {
                    0.0
                } else if is_diagonal_linear(k, self.order, n) {
                    a.abs()
                } else {
                    -a.abs()
                }
            })
            .collect();
        Tensor {
            order: self.order,
            dim: n,
            values,
            symmetric: self.symmetric,
            provenance: None,
        }
    }

    /// Averages every entry over its permutation orbit.
    pub fn symmetrize(&self) -> Tensor {
        if self.check_symmetric(0.0) {
            let mut t = self.clone().without_provenance();
            t.symmetric = true;
            return t;
        }
        let len = self.values.len();
        let canon: Vec<usize> = (0..len)
            .map(|k| canonical_linear(k, self.order, self.dim))
            .collect();
        let mut sums = vec![Accumulator::default(); len];
        let mut counts = vec![0u32; len];
        for (k, &c) in canon.iter().enumerate() {
            sums[c].add(self.values[k]);
            counts[c] += 1;
        }
        let values = canon
            .iter()
            .map(|&c| sums[c].value() / counts[c] as f64)
            .collect();
        Tensor {
            order: self.order,
            dim: self.dim,
            values,
            symmetric: true,
            provenance: None,
        }
    }

    /// Exhaustive permutation scan: every entry must match the entry at its
    /// sorted index within `tol * max(1, |a|)`.
    pub fn check_symmetric(&self, tol: f64) -> bool {
        (0..self.values.len()).all(|k| {
            let c = canonical_linear(k, self.order, self.dim);
            let (a, b) = (self.values[k], self.values[c]);
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
        })
    }

    /// Symmetry under permutations of the last `m-1` modes only.
    pub fn check_trailing_symmetric(&self, tol: f64) -> bool {
        let r = self.row_len();
        (0..self.values.len()).all(|k| {
            let (i, t) = (k / r, k % r);
            let c = i * r + canonical_linear_trailing(t, self.order - 1, self.dim);
            let (a, b) = (self.values[k], self.values[c]);
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
        })
    }

    pub fn scaled(&self, c: f64) -> Result<Tensor> {
        let t = Tensor {
            order: self.order,
            dim: self.dim,
            values: self.values.iter().map(|v| v * c).collect(),
            symmetric: self.symmetric,
            provenance: None,
        };
        t.check_finite()?;
        Ok(t)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        check_dim(self.order, other.order)?;
        check_dim(self.dim, other.dim)?;
        let t = Tensor {
            order: self.order,
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            symmetric: self.symmetric && other.symmetric,
            provenance: None,
        };
        t.check_finite()?;
        Ok(t)
    }

    /// `A + eps * I`.
    pub fn add_scaled_identity(&self, eps: f64) -> Result<Tensor> {
        let mut t = self.clone().without_provenance();
        for i in 0..self.dim {
            let k = t.diagonal_position(i);
            t.values[k] += eps;
        }
        t.check_finite()?;
        Ok(t)
    }

    /// Returns a copy with one entry replaced; clears the symmetry flag and
    /// provenance.
    pub fn with_entry(&self, idx: &[usize], value: f64) -> Result<Tensor> {
        let k = self.linear_index(idx)?;
        let mut t = self.clone().without_provenance();
        t.values[k] = value;
        t.symmetric = false;
        t.check_finite()?;
        Ok(t)
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::InvalidTensor(format!(
                "non-finite entry at {:?}",
                self.multi_index(k)
            ))),
        }
    }
}

/// Sorted, duplicate-free, nonempty selection of indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::DegenerateInput("index set is empty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "index set {indices:?} is not strictly increasing"
            )));
        }
        Ok(Self(indices))
    }

    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Maps positions of `inner` (relative to `self`) to absolute indices.
    pub fn compose(&self, inner: &IndexSet) -> Result<IndexSet> {
        inner
            .0
            .iter()
            .map(|&j| {
                self.0.get(j).copied().ok_or(Error::Index {
                    index: j,
                    dim: self.0.len(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .and_then(IndexSet::new)
    }

    /// Zero-pads a vector defined on this set to the ambient dimension `n`.
    pub fn pad(&self, y: &[f64], n: usize) -> Result<Vec<f64>> {
        check_dim(self.0.len(), y.len())?;
        let mut x = vec![0.0; n];
        for (&i, &v) in self.0.iter().zip(y) {
            if i >= n {
                return Err(Error::Index { index: i, dim: n });
            }
            x[i] = v;
        }
        Ok(x)
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// Componentwise power `x^[k]`; odd powers keep the sign.
pub fn hadamard_power(x: &[f64], k: u32) -> Vec<f64> {
    x.iter().map(|v| v.powi(k as i32)).collect()
}

/// `u ⊗ u ⊗ ... ⊗ u` (`m` factors).
pub fn outer_power(u: &[f64], m: usize) -> Result<Tensor> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("order must be >= 2, got {m}")));
    }
    if u.is_empty() {
        return Err(Error::InvalidParameter("empty vector".into()));
    }
    // Checked by `Tensor::new`; the product of a finite vector can overflow.
    Tensor::new(m, u.len(), kron_power(u, m), false).map(|mut t| {
        t.symmetric = true;
        t
    })
}

/// Indices with `|x_i| > tau_rel * ||x||_inf`.
pub fn support(x: &[f64], tau_rel: f64) -> Result<IndexSet> {
    let scale = norm_inf(x);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("support of the zero vector".into()));
    }
    IndexSet::new(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tau_rel * scale)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// The full-tuple Kronecker symbol: true iff all indices coincide.
pub fn is_diagonal_index(idx: &[usize]) -> bool {
    idx.windows(2).all(|w| w[0] == w[1])
}

/// Iterates multi-indices of an order-`m`, dimension-`n` tensor in storage
/// order.
pub fn multi_indices(order: usize, dim: usize) -> MultiIndices {
    MultiIndices {
        dim,
        next: if dim == 0 { None } else { Some(vec![0; order]) },
    }
}

pub struct MultiIndices {
    dim: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for MultiIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.dim {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

pub(crate) fn checked_len(order: usize, dim: usize) -> Result<usize> {
    u32::try_from(order)
        .ok()
        .and_then(|m| dim.checked_pow(m))
        .filter(|&len| len <= 1 << 28)
        .ok_or_else(|| {
            Error::InvalidTensor(format!("order {order}, dimension {dim} is too large"))
        })
}

/// `x ⊗ x ⊗ ... ⊗ x` flattened row-major (`k` factors, `k = 0` gives `[1]`).
pub(crate) fn kron_power(x: &[f64], k: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..k {
        let mut next = Vec::with_capacity(p.len() * x.len());
        for &a in &p {
            next.extend(x.iter().map(|&b| a * b));
        }
        p = next;
    }
    p
}

fn unravel(mut linear: usize, order: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for k in (0..order).rev() {
        idx[k] = linear % dim;
        linear /= dim;
    }
    idx
}

fn is_diagonal_linear(k: usize, order: usize, dim: usize) -> bool {
    is_diagonal_index(&unravel(k, order, dim))
}

fn canonical_linear(k: usize, order: usize, dim: usize) -> usize {
    let mut idx = unravel(k, order, dim);
    idx.sort_unstable();
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

fn canonical_linear_trailing(k: usize, modes: usize, dim: usize) -> usize {
    if modes == 0 {
        return 0;
    }
    canonical_linear(k, modes, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_tensor() -> Tensor {
        crate::examples::dnn_counterexample()
    }

    #[test]
    fn identity_contraction_is_hadamard_square() {
        let id = Tensor::identity(3, 2).unwrap();
        assert_eq!(id.contract_m1(&[2.0, 3.0]).unwrap(), vec![4.0, 9.0]);
    }

    #[test]
    fn counterexample_rows_at_y() {
        let a = example_tensor();
        let v = a.contract_m1(&[0.0, 1.0, -1.0]).unwrap();
        assert_eq!(v, vec![2.0, -0.5, -1.0]);
        assert_eq!(a.contract_full(&[0.0, 1.0, -1.0]).unwrap(), 0.5);
    }

    #[test]
    fn contract_full_small_cases() {
        let z = Tensor::zeros(3, 3).unwrap();
        assert_eq!(z.contract_full(&[1.0, -2.0, 3.0]).unwrap(), 0.0);
        let id = Tensor::identity(4, 2).unwrap();
        assert_eq!(id.contract_full(&[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn contraction_rejects_wrong_length() {
        let id = Tensor::identity(3, 2).unwrap();
        assert!(matches!(
            id.contract_m1(&[1.0]),
            Err(Error::Dimension { expected: 2, found: 1 })
        ));
        assert!(id.contract_full(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn hadamard_powers() {
        assert_eq!(hadamard_power(&[2.0, -3.0], 2), vec![4.0, 9.0]);
        assert_eq!(hadamard_power(&[2.0, -3.0], 3), vec![8.0, -27.0]);
        assert_eq!(hadamard_power(&[2.0, -3.0], 1), vec![2.0, -3.0]);
        assert_eq!(hadamard_power(&[2.0, -3.0], 0), vec![1.0, 1.0]);
    }

    #[test]
    fn principal_subtensors() {
        let a = example_tensor();
        assert_eq!(a.principal_subtensor(&IndexSet::full(3).unwrap()).unwrap(), a);
        let single = a.principal_subtensor(&IndexSet::new(vec![1]).unwrap()).unwrap();
        assert_eq!(single.values(), &[3.0]);
        let b = a.principal_subtensor(&IndexSet::new(vec![1, 2]).unwrap()).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.get(&[0, 0, 0]).unwrap(), 3.0);
        assert_eq!(b.get(&[0, 0, 1]).unwrap(), 3.0);
        assert_eq!(b.get(&[1, 0, 0]).unwrap(), 3.0);
        assert_eq!(b.get(&[0, 1, 1]).unwrap(), 2.5);
        assert_eq!(b.get(&[1, 1, 0]).unwrap(), 2.5);
        assert_eq!(b.get(&[1, 1, 1]).unwrap(), 1.0);
        assert!(b.symmetric());
        let err = a.principal_subtensor(&IndexSet::new(vec![0, 3]).unwrap());
        assert!(matches!(err, Err(Error::Index { index: 3, dim: 3 })));
    }

    #[test]
    fn comparison_tensor_cases() {
        let a = Tensor::identity(3, 2)
            .unwrap()
            .scaled(5.0)
            .unwrap()
            .add(&Tensor::all_ones(3, 2).unwrap().scaled(-1.0).unwrap())
            .unwrap();
        assert_eq!(a.get(&[0, 0, 0]).unwrap(), 4.0);
        assert_eq!(a.get(&[0, 1, 0]).unwrap(), -1.0);
        assert_eq!(a.comparison_tensor(), a);
        let b = example_tensor().comparison_tensor();
        assert_eq!(b.comparison_tensor(), b);
        assert_eq!(b.get(&[0, 0, 1]).unwrap(), -1.0);
        assert_eq!(b.get(&[0, 0, 0]).unwrap(), 100.0);
    }

    #[test]
    fn symmetrize_matrix() {
        let a = Tensor::new(2, 2, vec![0.0, 1.0, 0.0, 0.0], false).unwrap();
        let s = a.symmetrize();
        assert_eq!(s.values(), &[0.0, 0.5, 0.5, 0.0]);
        assert!(s.symmetric());
        let p = example_tensor();
        assert_eq!(p.symmetrize().values(), p.values());
    }

    #[test]
    fn outer_powers() {
        let t = outer_power(&[1.0, 0.0], 3).unwrap();
        assert_eq!(t.get(&[0, 0, 0]).unwrap(), 1.0);
        assert_eq!(t.values().iter().sum::<f64>(), 1.0);
        assert_eq!(outer_power(&[1.0, 1.0], 3).unwrap(), Tensor::all_ones(3, 2).unwrap());
        assert_eq!(outer_power(&[1.0, 2.0], 3).unwrap().get(&[1, 1, 0]).unwrap(), 4.0);
        assert!(outer_power(&[1.0], 1).is_err());
    }

    #[test]
    fn support_thresholds() {
        assert_eq!(support(&[0.0, 1.0, -1.0], DEFAULT_TAU_REL).unwrap().as_slice(), &[1, 2]);
        assert_eq!(support(&[1e-20, 1.0], DEFAULT_TAU_REL).unwrap().as_slice(), &[1]);
        assert_eq!(support(&[3.0, 3.0, 3.0], DEFAULT_TAU_REL).unwrap().as_slice(), &[0, 1, 2]);
        assert!(matches!(support(&[0.0, 0.0], DEFAULT_TAU_REL), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn construction_validation() {
        assert!(Tensor::new(1, 2, vec![0.0; 2], false).is_err());
        assert!(Tensor::new(2, 2, vec![0.0; 3], false).is_err());
        assert!(Tensor::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0], false).is_err());
        assert!(Tensor::new(2, 2, vec![0.0, 1.0, 0.0, 0.0], true).is_err());
        assert!(Tensor::new(2, 2, vec![0.0, 1.0, 1.0, 0.0], true).is_ok());
    }

    #[test]
    fn diagonal_positions() {
        let t = Tensor::diagonal(3, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.diagonal_entries(), vec![1.0, 2.0, 3.0]);
        assert_eq!(t.get(&[2, 2, 2]).unwrap(), 3.0);
        assert_eq!(Tensor::identity(4, 1).unwrap().values(), &[1.0]);
        assert!(is_diagonal_index(&[1, 1, 1]));
        assert!(!is_diagonal_index(&[1, 0, 1]));
    }

    #[test]
    fn jacobian_matches_symmetric_shortcut() {
        let a = example_tensor();
        let x = [0.3, -1.2, 0.7];
        let j = a.jacobian_m1(&x).unwrap();
        let m = a.contract_m2(&x).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert!((j[i][k] - 2.0 * m[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn index_set_validation_and_padding() {
        assert!(IndexSet::new(vec![]).is_err());
        assert!(IndexSet::new(vec![1, 1]).is_err());
        assert!(IndexSet::new(vec![2, 1]).is_err());
        let s = IndexSet::from_unsorted(vec![2, 0, 2]).unwrap();
        assert_eq!(s.as_slice(), &[0, 2]);
        assert_eq!(s.pad(&[5.0, 6.0], 3).unwrap(), vec![5.0, 0.0, 6.0]);
        let inner = IndexSet::new(vec![1]).unwrap();
        assert_eq!(s.compose(&inner).unwrap().as_slice(), &[2]);
    }
}
