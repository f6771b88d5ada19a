//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Accumulator::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `a * x = b` by LU with partial pivoting. `a` is row-major `n x n`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let x = m.lu().solve(&DVector::from_column_slice(b))?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// Numerical rank of a set of vectors via column-pivoted QR; diagonal
/// entries of R at or below `rel_tol * max_norm` count as zero.
pub fn numerical_rank(vectors: &[Vec<f64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let largest = vectors.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    let m = DMatrix::from_fn(n, vectors.len(), |i, k| vectors[k][i]);
    let r = m.col_piv_qr().r();
    let threshold = rel_tol * largest;
    (0..r.nrows().min(r.ncols()))
        .filter(|&k| r[(k, k)].abs() > threshold)
        .count()
}

/// Euclidean projection onto the unit simplex `{x >= 0, sum x = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
