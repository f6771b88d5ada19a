//! The tensor complementarity problem: find `x >= 0` with
//! `F(x) = A x^(m-1) + q >= 0` and `<x, F(x)> = 0`.
//!
//! Solved through the Fischer-Burmeister reformulation with a damped
//! Newton-type method, falling back to steepest descent on the merit when the
//! Newton system is singular or not a descent direction.

use rayon::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::SearchBudget;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, norm_inf, solve};
use crate::tensor::{Tensor, SYMMETRY_TOL};

/// Distinct solutions are at least this far apart in the max-norm.
pub const DEDUP_RADIUS: f64 = 1e-6;

/// Random starts are drawn uniformly from `[0, START_BOX]^n`.
const START_BOX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TcpInstance {
    tensor: Tensor,
    q: Vec<f64>,
    trailing_symmetric: bool,
}

impl TcpInstance {
    pub fn new(tensor: Tensor, q: Vec<f64>) -> Result<Self> {
        check_dim(tensor.dim(), q.len())?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("q has non-finite entries".into()));
        }
        let trailing_symmetric = tensor.symmetric() || tensor.check_trailing_symmetric(SYMMETRY_TOL);
        Ok(Self {
            tensor,
            q,
            trailing_symmetric,
        })
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// True when `(m-1) A x^(m-2)` is the Jacobian of `F`.
    pub fn trailing_symmetric(&self) -> bool {
        self.trailing_symmetric
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TcpMethod {
    /// `q >= 0`, so `x = 0` solves the problem.
    ZeroSolution,
    FischerBurmeister,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcpSolution {
    pub x: Vec<f64>,
    /// `F(x)`.
    pub f: Vec<f64>,
    pub natural_residual: f64,
    /// `(min_i x_i, min_i F_i(x))`.
    pub feasibility: (f64, f64),
    pub complementarity_gap: f64,
    pub iterations: usize,
    pub method: TcpMethod,
}

impl TcpSolution {
    fn evaluate(inst: &TcpInstance, x: Vec<f64>, iterations: usize, method: TcpMethod) -> Result<Self> {
        let f = tcp_f(inst, &x)?;
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            natural_residual: natural_residual_of(&x, &f),
            feasibility: (min(&x), min(&f)),
            complementarity_gap: dot(&x, &f).abs(),
            x,
            f,
            iterations,
            method,
        })
    }

    /// All three complementarity conditions hold within `tol`.
    pub fn accepted(&self, tol: f64) -> bool {
        self.natural_residual <= tol
            && self.feasibility.0 >= -tol
            && self.feasibility.1 >= -tol
            && self.complementarity_gap <= tol * (1.0 + self.scale())
    }

    fn scale(&self) -> f64 {
        norm2(&self.x) * norm2(&self.f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub solutions: Vec<TcpSolution>,
    /// Per-coordinate `[min, max]` over the solutions found.
    pub bounding_box: Vec<[f64; 2]>,
    pub starts_tried: usize,
    /// Starts whose local solve did not reach an accepted solution.
    pub failed_starts: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("no solution found: best merit {best_merit} at {x:?}")]
pub struct NoSolutionFound {
    pub best_merit: f64,
    pub x: Vec<f64>,
    pub natural_residual: f64,
}

/// `F(x) = A x^(m-1) + q`.
pub fn tcp_f(inst: &TcpInstance, x: &[f64]) -> Result<Vec<f64>> {
    let mut f = inst.tensor.contract_m1(x)?;
    f.iter_mut().zip(&inst.q).for_each(|(v, q)| *v += q);
    Ok(f)
}

/// The Jacobian of `F`: `(m-1) A x^(m-2)` for tensors symmetric in their
/// trailing modes, the general exact derivative otherwise.
pub fn tcp_jacobian(inst: &TcpInstance, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    if inst.trailing_symmetric {
        let c = (inst.tensor.order() - 1) as f64;
        let mut j = inst.tensor.contract_m2(x)?;
        j.iter_mut().flatten().for_each(|v| *v *= c);
        Ok(j)
    } else {
        inst.tensor.jacobian_m1(x)
    }
}

/// Forward differences with step `1e-6 (1 + ||x||_inf)`.
pub fn finite_difference_jacobian(inst: &TcpInstance, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let h = 1e-6 * (1.0 + norm_inf(x));
    let f0 = tcp_f(inst, x)?;
    let n = x.len();
    let mut j = vec![vec![0.0; n]; n];
    let mut y = x.to_vec();
    for k in 0..n {
        y[k] = x[k] + h;
        let f1 = tcp_f(inst, &y)?;
        for i in 0..n {
            j[i][k] = (f1[i] - f0[i]) / h;
        }
        y[k] = x[k];
    }
    Ok(j)
}

fn fb(a: f64, b: f64) -> f64 {
    a.hypot(b) - a - b
}

/// `1/2 sum_i psi(x_i, F_i)^2` with `psi(a, b) = sqrt(a^2 + b^2) - a - b`.
pub fn fb_merit(inst: &TcpInstance, x: &[f64]) -> Result<f64> {
    let f = tcp_f(inst, x)?;
    Ok(0.5 * x.iter().zip(&f).map(|(&a, &b)| fb(a, b).powi(2)).sum::<f64>())
}

/// `||min(x, F(x))||_inf`.
pub fn natural_residual(inst: &TcpInstance, x: &[f64]) -> Result<f64> {
    Ok(natural_residual_of(x, &tcp_f(inst, x)?))
}

fn natural_residual_of(x: &[f64], f: &[f64]) -> f64 {
    x.iter().zip(f).fold(0.0, |m, (a, b)| m.max(a.min(*b).abs()))
}

/// Returns the first accepted solution over up to `budget.starts` restarts.
pub fn solve_tcp(inst: &TcpInstance, budget: &SearchBudget) -> std::result::Result<TcpSolution, NoSolutionFound> {
    budget.validate().map_err(|_| NoSolutionFound {
        best_merit: f64::INFINITY,
        x: Vec::new(),
        natural_residual: f64::INFINITY,
    })?;
    if let Some(s) = zero_solution(inst, budget.tol) {
        return Ok(s);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..budget.starts as u64 {
        let x0 = random_start(budget, k, inst.dim());
        let run = local_solve(inst, &x0, budget);
        match run {
            Ok(s) if s.accepted(budget.tol) => return Ok(s),
            Ok(s) => {
                let merit = fb_merit(inst, &s.x).unwrap_or(f64::INFINITY);
                if best.as_ref().is_none_or(|b| merit < b.0) {
                    best = Some((merit, s.x));
                }
            }
            Err(_) => {}
        }
    }
    let (best_merit, x) = best.unwrap_or((f64::INFINITY, vec![0.0; inst.dim()]));
    let natural_residual = natural_residual(inst, &x).unwrap_or(f64::INFINITY);
    Err(NoSolutionFound {
        best_merit,
        x,
        natural_residual,
    })
}

/// Runs one local solve per start (start `k` seeded with `seed ^ k`) and
/// collects the distinct accepted solutions in start order.
pub fn explore_solutions(inst: &TcpInstance, budget: &SearchBudget) -> Result<SolutionSet> {
    budget.validate()?;
    let mut candidates: Vec<Option<TcpSolution>> = Vec::new();
    candidates.push(zero_solution(inst, budget.tol));
    let runs: Vec<Option<TcpSolution>> = (0..budget.starts as u64)
        .into_par_iter()
        .map(|k| {
            let x0 = random_start(budget, k, inst.dim());
            local_solve(inst, &x0, budget)
                .ok()
                .filter(|s| s.accepted(budget.tol))
        })
        .collect();
    let failed_starts = runs.iter().filter(|r| r.is_none()).count();
    candidates.extend(runs);

    let mut solutions: Vec<TcpSolution> = Vec::new();
    for s in candidates.into_iter().flatten() {
        let dup = solutions.iter().any(|t| {
            s.x.iter()
                .zip(&t.x)
                .all(|(a, b)| (a - b).abs() <= DEDUP_RADIUS)
        });
        if !dup {
            solutions.push(s);
        }
    }
    let n = inst.dim();
    let bounding_box = if solutions.is_empty() {
        Vec::new()
    } else {
        (0..n)
            .map(|i| {
                solutions.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |b, s| {
                    [b[0].min(s.x[i]), b[1].max(s.x[i])]
                })
            })
            .collect()
    };
    Ok(SolutionSet {
        solutions,
        bounding_box,
        starts_tried: budget.starts,
        failed_starts,
    })
}

fn zero_solution(inst: &TcpInstance, tol: f64) -> Option<TcpSolution> {
    if inst.q.iter().all(|&v| v >= 0.0) {
        TcpSolution::evaluate(inst, vec![0.0; inst.dim()], 0, TcpMethod::ZeroSolution)
            .ok()
            .filter(|s| s.accepted(tol))
    } else {
        None
    }
}

fn random_start(budget: &SearchBudget, k: u64, n: usize) -> Vec<f64> {
    let mut rng = budget.rng(k);
    (0..n).map(|_| rng.random_range(0.0..START_BOX)).collect()
}

/// Damped Newton-type iteration on the Fischer-Burmeister merit from `x0`.
fn local_solve(inst: &TcpInstance, x0: &[f64], budget: &SearchBudget) -> Result<TcpSolution> {
    let n = inst.dim();
    let mut x = x0.to_vec();
    let mut iterations = 0;
    let done = |x: &[f64]| -> Result<Option<TcpSolution>> {
        let clamped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        for y in [clamped, x.to_vec()] {
            let s = TcpSolution::evaluate(inst, y, 0, TcpMethod::FischerBurmeister)?;
            // Stop well inside the acceptance region so the gap test also holds.
            if s.natural_residual <= 1e-3 * budget.tol && s.accepted(budget.tol) {
                return Ok(Some(s));
            }
        }
        Ok(None)
    };
    while iterations < budget.iters {
        if let Some(mut s) = done(&x)? {
            s.iterations = iterations;
            return Ok(s);
        }
        iterations += 1;
        let f = tcp_f(inst, &x)?;
        let j = tcp_jacobian(inst, &x)?;
        let mut phi = vec![0.0; n];
        let mut da = vec![0.0; n];
        let mut db = vec![0.0; n];
        for i in 0..n {
            let r = x[i].hypot(f[i]);
            phi[i] = r - x[i] - f[i];
            if r > 0.0 {
                da[i] = x[i] / r - 1.0;
                db[i] = f[i] / r - 1.0;
            } else {
                da[i] = -1.0 + std::f64::consts::FRAC_1_SQRT_2;
                db[i] = -1.0 + std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        let merit = 0.5 * dot(&phi, &phi);
        // grad = Da phi + J^T Db phi
        let grad: Vec<f64> = (0..n)
            .map(|k| da[k] * phi[k] + (0..n).map(|i| j[i][k] * db[i] * phi[i]).sum::<f64>())
            .collect();
        let h: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| db[i] * j[i][k] + if i == k { da[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        let neg_phi: Vec<f64> = phi.iter().map(|v| -v).collect();
        let newton = solve(&h, &neg_phi).filter(|d| {
            let slope = dot(&grad, d);
            slope < -1e-12 * norm2(d) * norm2(&grad)
        });
        let d = newton.unwrap_or_else(|| grad.iter().map(|g| -g).collect());
        let slope = dot(&grad, &d);
        if !(slope < 0.0) {
            break;
        }
        let mut t = 1.0;
        let mut moved = false;
        while t >= 1e-12 {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let my = fb_merit(inst, &y)?;
            if my <= merit + 1e-4 * t * slope {
                moved = y != x;
                x = y;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let mut s = TcpSolution::evaluate(inst, x, iterations, TcpMethod::FischerBurmeister)?;
    s.iterations = iterations;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_instance(q: Vec<f64>) -> TcpInstance {
        TcpInstance::new(Tensor::identity(3, 2).unwrap(), q).unwrap()
    }

    #[test]
    fn f_examples() {
        let inst = identity_instance(vec![-1.0, -1.0]);
        assert_eq!(tcp_f(&inst, &[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let a = crate::examples::dnn_counterexample();
        let inst = TcpInstance::new(a, vec![0.0; 3]).unwrap();
        assert_eq!(tcp_f(&inst, &[0.0, 1.0, -1.0]).unwrap(), vec![2.0, -0.5, -1.0]);
    }

    #[test]
    fn merit_examples() {
        let inst = identity_instance(vec![-1.0, -1.0]);
        assert_eq!(fb_merit(&inst, &[1.0, 1.0]).unwrap(), 0.0);
        let m = fb_merit(&inst, &[2.0, 2.0]).unwrap();
        assert!((m - (13f64.sqrt() - 5.0).powi(2)).abs() < 1e-12);
        let inst = identity_instance(vec![1.0, 1.0]);
        assert_eq!(fb_merit(&inst, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn identity_solution() {
        let inst = identity_instance(vec![-1.0, -1.0]);
        let s = solve_tcp(&inst, &SearchBudget::default()).unwrap();
        assert!(s.x.iter().all(|v| (v - 1.0).abs() < 1e-9), "{:?}", s.x);
        let set = explore_solutions(&inst, &SearchBudget::default().with_starts(20)).unwrap();
        assert_eq!(set.solutions.len(), 1);
    }

    #[test]
    fn nonnegative_q_gives_zero() {
        let inst = identity_instance(vec![0.5, 0.0]);
        let s = solve_tcp(&inst, &SearchBudget::default()).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.method, TcpMethod::ZeroSolution);
    }

    #[test]
    fn linear_case() {
        let inst = TcpInstance::new(Tensor::identity(2, 2).unwrap(), vec![-1.0, -2.0]).unwrap();
        let set = explore_solutions(&inst, &SearchBudget::default()).unwrap();
        assert_eq!(set.solutions.len(), 1);
        let x = &set.solutions[0].x;
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nonsymmetric_jacobian_matches_differences() {
        let a = Tensor::from_fn(3, 2, |i| (i[0] + 2 * i[1] + 3 * i[2]) as f64 - 2.0).unwrap();
        let inst = TcpInstance::new(a, vec![0.0, 0.0]).unwrap();
        assert!(!inst.trailing_symmetric());
        let x = [0.3, -0.7];
        let j = tcp_jacobian(&inst, &x).unwrap();
        let fd = finite_difference_jacobian(&inst, &x).unwrap();
        for (r, s) in j.iter().zip(&fd) {
            for (u, v) in r.iter().zip(s) {
                assert!((u - v).abs() < 1e-5);
            }
        }
    }
}
