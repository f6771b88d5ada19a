//! H-eigenpairs: `A x^(m-1) = lambda x^[m-1]`.
//!
//! Two tools live here. [`nqz_spectral_radius`] runs the Ng-Qi-Zhou power
//! iteration on a nonnegative tensor and returns its spectral radius together
//! with a Collatz-Wielandt bracket. [`find_h_eigenpairs`] is a multistart
//! damped Gauss-Newton search for real eigenpairs of an arbitrary tensor; it
//! makes no completeness claim.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SearchBudget;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, norm_inf};
use crate::sampling::{normalize_inf, unit_sphere};
use crate::tensor::{hadamard_power, Tensor};

/// Default all-ones perturbation, relative to the largest entry.
pub const DEFAULT_SHIFT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub residual: f64,
}

impl EigenPair {
    /// Normalizes `x` to unit max-norm (first largest entry positive), refits
    /// `lambda` by least squares and recomputes the residual.
    pub fn from_vector(a: &Tensor, x: &[f64]) -> Result<Self> {
        let x = normalize_inf(x)
            .ok_or_else(|| Error::DegenerateInput("eigenvector is zero".into()))?;
        let ax = a.contract_m1(&x)?;
        let xp = hadamard_power(&x, (a.order() - 1) as u32);
        let lambda = dot(&ax, &xp) / dot(&xp, &xp);
        let residual = eigen_residual(&ax, &xp, lambda);
        Ok(Self {
            lambda,
            x,
            residual,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadiusResult {
    pub rho: f64,
    /// Half the final bracket width plus the shift bound.
    pub uncertainty: f64,
    /// Collatz-Wielandt upper bound: `rho(B) <= upper_bound`.
    pub upper_bound: f64,
    pub perron_vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub shift_epsilon: f64,
}

/// NQZ iteration on `B + shift * J` (`J` all ones), yielding the bracket
/// `[min_i, max_i]` of `(B' x^(m-1))_i / x_i^(m-1)` at each iterate.
pub struct NqzIteration<'a> {
    tensor: &'a Tensor,
    shift: f64,
    x: Vec<f64>,
}

impl<'a> NqzIteration<'a> {
    pub fn new(tensor: &'a Tensor, shift: f64) -> Result<Self> {
        check_nonnegative(tensor)?;
        if !(shift > 0.0) {
            return Err(Error::InvalidParameter(format!("shift must be positive, got {shift}")));
        }
        Ok(Self {
            tensor,
            shift,
            x: vec![1.0; tensor.dim()],
        })
    }

    pub fn current(&self) -> &[f64] {
        &self.x
    }
}

impl Iterator for NqzIteration<'_> {
    type Item = Bracket;

    fn next(&mut self) -> Option<Bracket> {
        let m1 = (self.tensor.order() - 1) as i32;
        let mut y = self.tensor.contract_m1(&self.x).ok()?;
        let lift = self.shift * self.x.iter().sum::<f64>().powi(m1);
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for (yi, xi) in y.iter_mut().zip(&self.x) {
            *yi += lift;
            let r = *yi / xi.powi(m1);
            lower = lower.min(r);
            upper = upper.max(r);
        }
        let root = 1.0 / m1 as f64;
        let next: Vec<f64> = y.iter().map(|v| v.powf(root)).collect();
        let scale = norm_inf(&next);
        self.x = next.into_iter().map(|v| v / scale).collect();
        Some(Bracket { lower, upper })
    }
}

pub fn nqz_spectral_radius(b: &Tensor, tol: f64, max_iter: usize) -> Result<SpectralRadiusResult> {
    let scale = norm_inf(b.values());
    let shift = if scale > 0.0 { DEFAULT_SHIFT * scale } else { DEFAULT_SHIFT };
    nqz_spectral_radius_with_shift(b, shift, tol, max_iter)
}

/// The reported `rho` is the bracket midpoint minus `shift * n^(m-1)`, the
/// spectral radius of the perturbation itself.
pub fn nqz_spectral_radius_with_shift(
    b: &Tensor,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralRadiusResult> {
    let mut iter = NqzIteration::new(b, shift)?;
    let shift_bound = shift * (b.dim() as f64).powi(b.order() as i32 - 1);
    let mut last = Bracket {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    let mut perron = iter.current().to_vec();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        perron = iter.current().to_vec();
        let Some(bracket) = iter.next() else { break };
        iterations += 1;
        // Keep the tightest valid bounds; rounding can make a later bracket
        // marginally looser than an earlier one.
        last = Bracket {
            lower: last.lower.max(bracket.lower),
            upper: last.upper.min(bracket.upper),
        };
        if last.width() <= tol {
            converged = true;
            break;
        }
    }
    let mid = 0.5 * (last.lower + last.upper);
    Ok(SpectralRadiusResult {
        rho: (mid - shift_bound).max(0.0),
        uncertainty: 0.5 * last.width().max(0.0) + shift_bound,
        upper_bound: last.upper,
        perron_vector: perron,
        iterations,
        converged,
        shift_epsilon: shift,
    })
}

/// Multistart search for real H-eigenpairs. Returns the distinct pairs whose
/// residual passes [`verify_eigenpair`] at `budget.tol`, in start order.
pub fn find_h_eigenpairs(a: &Tensor, budget: &SearchBudget) -> Result<Vec<EigenPair>> {
    budget.validate()?;
    let found: Vec<Option<EigenPair>> = (0..budget.starts as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = budget.rng(k);
            let x0 = unit_sphere(&mut rng, a.dim());
            newton_eigen_search(a, &x0, budget.iters)
                .filter(|p| verify_eigenpair(a, p, budget.tol).unwrap_or(false))
        })
        .collect();
    let mut pairs: Vec<EigenPair> = Vec::new();
    for p in found.into_iter().flatten() {
        let dup = pairs.iter().any(|q| {
            (p.lambda - q.lambda).abs() <= 1e-6 * p.lambda.abs().max(1.0)
                && p.x.iter().zip(&q.x).all(|(u, v)| (u - v).abs() <= 1e-6)
        });
        if !dup {
            pairs.push(p);
        }
    }
    Ok(pairs)
}

/// `||A x^(m-1) - lambda x^[m-1]||_inf <= tol * max(1, ||A x^(m-1)||_inf)`.
pub fn verify_eigenpair(a: &Tensor, pair: &EigenPair, tol: f64) -> Result<bool> {
    check_dim(a.dim(), pair.x.len())?;
    if norm_inf(&pair.x) == 0.0 {
        return Err(Error::DegenerateInput("eigenvector is zero".into()));
    }
    let ax = a.contract_m1(&pair.x)?;
    let xp = hadamard_power(&pair.x, (a.order() - 1) as u32);
    let r = eigen_residual(&ax, &xp, pair.lambda);
    Ok(r <= tol * norm_inf(&ax).max(1.0))
}

fn eigen_residual(ax: &[f64], xp: &[f64], lambda: f64) -> f64 {
    ax.iter()
        .zip(xp)
        .fold(0.0_f64, |m, (u, v)| m.max((u - lambda * v).abs()))
}

/// Levenberg-Marquardt on `F(x, lambda) = [A x^(m-1) - lambda x^[m-1]; (|x|^2 - 1)/2]`.
fn newton_eigen_search(a: &Tensor, x0: &[f64], max_iter: usize) -> Option<EigenPair> {
    let n = a.dim();
    let m1 = (a.order() - 1) as i32;
    let residual = |x: &[f64], lambda: f64| -> Option<Vec<f64>> {
        let ax = a.contract_m1(x).ok()?;
        let mut f: Vec<f64> = ax
            .iter()
            .zip(x)
            .map(|(v, xi)| v - lambda * xi.powi(m1))
            .collect();
        f.push(0.5 * (dot(x, x) - 1.0));
        Some(f)
    };
    let mut x = x0.to_vec();
    let xp = hadamard_power(&x, m1 as u32);
    let mut lambda = dot(&a.contract_m1(&x).ok()?, &xp) / dot(&xp, &xp);
    let mut f = residual(&x, lambda)?;
    let mut mu = 1e-6;
    for _ in 0..max_iter {
        let fnorm = norm2(&f);
        if fnorm <= 1e-15 * (1.0 + lambda.abs()) {
            break;
        }
        let ja = a.jacobian_m1(&x).ok()?;
        // Full Jacobian, (n + 1) x (n + 1).
        let mut j = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            j[i][..n].copy_from_slice(&ja[i]);
            j[i][i] -= lambda * f64::from(m1) * x[i].powi(m1 - 1);
            j[i][n] = -x[i].powi(m1);
            j[n][i] = x[i];
        }
        let mut jtj = vec![vec![0.0; n + 1]; n + 1];
        let mut jtf = vec![0.0; n + 1];
        for r in 0..=n {
            for c in 0..=n {
                jtj[r][c] = (0..=n).map(|k| j[k][r] * j[k][c]).sum();
            }
            jtf[r] = -(0..=n).map(|k| j[k][r] * f[k]).sum::<f64>();
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for (r, row) in damped.iter_mut().enumerate() {
                row[r] += mu * (1.0 + jtj[r][r]);
            }
            let Some(step) = crate::linalg::solve(&damped, &jtf) else {
                mu *= 10.0;
                continue;
            };
            let xt: Vec<f64> = x.iter().zip(&step).map(|(u, d)| u + d).collect();
            let lt = lambda + step[n];
            if let Some(ft) = residual(&xt, lt) {
                if norm2(&ft) < fnorm {
                    let small = norm2(&step) <= 1e-15 * (1.0 + norm2(&xt));
                    x = xt;
                    lambda = lt;
                    f = ft;
                    mu = (mu * 0.3).max(1e-15);
                    improved = !small;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    EigenPair::from_vector(a, &x).ok()
}

fn check_nonnegative(t: &Tensor) -> Result<()> {
    match t.values().iter().position(|&v| v < 0.0) {
        None => Ok(()),
        Some(k) => Err(Error::NotNonnegative {
            index: t.multi_index(k),
            value: t.values()[k],
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_radius_is_n_to_the_m_minus_one() {
        let j = Tensor::all_ones(3, 2).unwrap();
        let r = nqz_spectral_radius(&j, 1e-12, 1000).unwrap();
        assert!(r.converged);
        assert!((r.rho - 4.0).abs() < 1e-8, "{}", r.rho);
        assert!(r.perron_vector.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn reducible_diagonal_radius() {
        let d = Tensor::diagonal(3, &[3.0, 5.0]).unwrap();
        let r = nqz_spectral_radius_with_shift(&d, 1e-8, 1e-12, 10_000).unwrap();
        assert!((r.rho - 5.0).abs() <= 1e-6, "{}", r.rho);
        assert!(r.upper_bound >= 5.0);
    }

    #[test]
    fn negative_entry_rejected() {
        let t = Tensor::diagonal(3, &[1.0, -1.0]).unwrap();
        assert!(matches!(
            nqz_spectral_radius(&t, 1e-10, 10),
            Err(Error::NotNonnegative { .. })
        ));
    }

    #[test]
    fn diagonal_eigenpairs_all_found() {
        let d = Tensor::diagonal(3, &[1.0, 2.0, 3.0]).unwrap();
        let budget = SearchBudget::default().with_starts(50);
        let pairs = find_h_eigenpairs(&d, &budget).unwrap();
        for (i, want) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            let hit = pairs.iter().any(|p| {
                (p.lambda - want).abs() < 1e-8
                    && p.x.iter().enumerate().all(|(k, &v)| {
                        let e = if k == i { 1.0 } else { 0.0 };
                        (v - e).abs() < 1e-6
                    })
            });
            assert!(hit, "missing eigenpair {i}: {pairs:?}");
        }
    }

    #[test]
    fn identity_order_four_has_only_unit_eigenvalue() {
        let id = Tensor::identity(4, 2).unwrap();
        let pairs = find_h_eigenpairs(&id, &SearchBudget::default()).unwrap();
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|p| (p.lambda - 1.0).abs() < 1e-8));
    }

    #[test]
    fn verify_identity_pairs() {
        let id = Tensor::identity(3, 2).unwrap();
        let good = EigenPair {
            lambda: 1.0,
            x: vec![1.0, 0.0],
            residual: 0.0,
        };
        let bad = EigenPair {
            lambda: 2.0,
            ..good.clone()
        };
        assert!(verify_eigenpair(&id, &good, 1e-12).unwrap());
        assert!(!verify_eigenpair(&id, &bad, 1e-12).unwrap());
        let zero = EigenPair {
            x: vec![0.0, 0.0],
            ..good
        };
        assert!(matches!(verify_eigenpair(&id, &zero, 1e-9), Err(Error::DegenerateInput(_))));
    }
}
