//! Copositivity and positive semidefiniteness by search.
//!
//! Both problems are co-NP-hard, so a search can only ever refute (with a
//! re-evaluated witness) or report the property as likely.

use rayon::prelude::*;

use super::{ClassName, ClassReport, Verdict, Witness};
use crate::budget::SearchBudget;
use crate::error::Result;
use crate::linalg::{dot, norm2, project_simplex};
use crate::sampling::{
    for_each_simplex_grid_point, normalize2, sign_patterns, simplex_grid_size, unit_sphere,
};
use crate::tensor::Tensor;

/// Grid evaluations are capped at this many points.
const GRID_CAP: f64 = 1e6;

/// Minimizes `A x^m` over the unit simplex by an exhaustive grid followed by
/// projected gradient descent from the best grid points.
pub fn is_copositive(a: &Tensor, budget: &SearchBudget) -> Result<ClassReport> {
    budget.validate()?;
    let s = a.symmetrize();
    let n = a.dim();
    let mut depth = budget.grid_depth.max(1);
    while depth > 1 && simplex_grid_size(n, depth) > GRID_CAP {
        depth -= 1;
    }
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(budget.starts + 1);
    for_each_simplex_grid_point(n, depth, |p| {
        let v = s.contract_full(p).unwrap_or(f64::INFINITY);
        if best.len() < budget.starts || v < best[best.len() - 1].0 {
            let pos = best.partition_point(|(w, _)| *w <= v);
            best.insert(pos, (v, p.to_vec()));
            best.truncate(budget.starts);
        }
    });
    let descents: Vec<(f64, Vec<f64>)> = best
        .par_iter()
        .map(|(_, x0)| simplex_descent(&s, x0, budget.iters))
        .collect();
    let (min, w) = best
        .into_iter()
        .chain(descents)
        .fold((f64::INFINITY, Vec::new()), |acc, (v, x)| if v < acc.0 { (v, x) } else { acc });
    let value = a.contract_full(&w)?;
    let report = if value < -budget.tol {
        ClassReport::new(
            ClassName::Copositive,
            Verdict::Refuted,
            format!("A x^m = {value} at a point of the simplex"),
        )
        .with_witness(Witness::Vector(w))
    } else if min > budget.tol {
        ClassReport::new(
            ClassName::StrictlyCopositive,
            Verdict::Likely,
            format!("simplex minimum found {min} (grid depth {depth})"),
        )
    } else {
        ClassReport::new(
            ClassName::Copositive,
            Verdict::Likely,
            format!("simplex minimum found {min} (grid depth {depth})"),
        )
    };
    Ok(report.with_value(min.min(value)))
}

/// Minimizes `A x^m` over the unit sphere. Odd orders are refuted by the sign
/// flip `x -> -x` as soon as the form is nonzero somewhere.
pub fn is_psd(a: &Tensor, budget: &SearchBudget) -> Result<ClassReport> {
    budget.validate()?;
    let s = a.symmetrize();
    let n = a.dim();
    let mut battery: Vec<Vec<f64>> = if n <= 6 {
        sign_patterns(n).filter_map(|p| normalize2(&p)).collect()
    } else {
        let mut b = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            b.push(e);
        }
        b.extend(normalize2(&vec![1.0; n]));
        b
    };
    if a.order() % 2 == 1 {
        for k in 0..budget.starts as u64 {
            battery.push(unit_sphere(&mut budget.rng(k), n));
        }
        for x in &battery {
            let v = s.contract_full(x)?;
            if v.abs() > budget.tol {
                let w: Vec<f64> = if v < 0.0 { x.clone() } else { x.iter().map(|u| -u).collect() };
                let value = a.contract_full(&w)?;
                return Ok(ClassReport::new(
                    ClassName::Psd,
                    Verdict::Refuted,
                    format!("odd order: A x^m = {value} after flipping the sign of a probe"),
                )
                .with_witness(Witness::Vector(w))
                .with_value(value));
            }
        }
        return Ok(ClassReport::new(
            ClassName::Psd,
            Verdict::Likely,
            "odd order and the form vanished at every probe",
        )
        .with_value(0.0));
    }

    let mut scored: Vec<(f64, Vec<f64>)> = battery
        .into_iter()
        .map(|x| (s.contract_full(&x).unwrap_or(f64::INFINITY), x))
        .collect();
    scored.sort_by(|p, q| p.0.total_cmp(&q.0));
    scored.truncate(budget.starts);
    let mut starts: Vec<Vec<f64>> = scored.iter().map(|(_, x)| x.clone()).collect();
    starts.extend((0..budget.starts as u64).map(|k| unit_sphere(&mut budget.rng(k), n)));
    let descents: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|x0| sphere_descent(&s, x0, budget.iters))
        .collect();
    let (min, w) = scored
        .into_iter()
        .chain(descents)
        .fold((f64::INFINITY, Vec::new()), |acc, (v, x)| if v < acc.0 { (v, x) } else { acc });
    let value = a.contract_full(&w)?;
    let report = if value < -budget.tol {
        ClassReport::new(
            ClassName::Psd,
            Verdict::Refuted,
            format!("A x^m = {value} at a unit vector"),
        )
        .with_witness(Witness::Vector(w))
    } else if min > budget.tol {
        ClassReport::new(ClassName::Pd, Verdict::Likely, format!("sphere minimum found {min}"))
    } else {
        ClassReport::new(ClassName::Psd, Verdict::Likely, format!("sphere minimum found {min}"))
    };
    Ok(report.with_value(min.min(value)))
}

/// Projected gradient with Armijo backtracking on the simplex.
fn simplex_descent(s: &Tensor, x0: &[f64], iters: usize) -> (f64, Vec<f64>) {
    let m = s.order() as f64;
    let mut x = x0.to_vec();
    let mut fx = s.contract_full(&x).unwrap_or(f64::INFINITY);
    let mut t = 1.0;
    for _ in 0..iters {
        let g: Vec<f64> = s.contract_m1(&x).unwrap_or_default().iter().map(|v| m * v).collect();
        let mut moved = false;
        while t > 1e-16 {
            let y = project_simplex(&x.iter().zip(&g).map(|(u, d)| u - t * d).collect::<Vec<_>>());
            let fy = s.contract_full(&y).unwrap_or(f64::INFINITY);
            let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            if fy <= fx + 1e-4 * dot(&g, &diff) {
                moved = norm2(&diff) > 1e-14;
                x = y;
                fx = fy;
                t *= 2.0;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (fx, x)
}

/// Riemannian gradient descent with Armijo backtracking on the unit sphere.
fn sphere_descent(s: &Tensor, x0: &[f64], iters: usize) -> (f64, Vec<f64>) {
    let m = s.order() as f64;
    let mut x = x0.to_vec();
    let mut fx = s.contract_full(&x).unwrap_or(f64::INFINITY);
    let mut t = 1.0;
    for _ in 0..iters {
        let g: Vec<f64> = s.contract_m1(&x).unwrap_or_default().iter().map(|v| m * v).collect();
        let radial = dot(&g, &x);
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let gnorm2 = dot(&tangent, &tangent);
        if gnorm2.sqrt() <= 1e-14 {
            break;
        }
        let mut moved = false;
        while t > 1e-16 {
            let Some(y) =
                normalize2(&x.iter().zip(&tangent).map(|(u, d)| u - t * d).collect::<Vec<_>>())
            else {
                t *= 0.5;
                continue;
            };
            let fy = s.contract_full(&y).unwrap_or(f64::INFINITY);
            if fy <= fx - 1e-4 * t * gnorm2 {
                moved = true;
                x = y;
                fx = fy;
                t *= 2.0;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (fx, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_is_strictly_copositive() {
        let r = is_copositive(&Tensor::all_ones(3, 2).unwrap(), &SearchBudget::default()).unwrap();
        assert_eq!(r.class, ClassName::StrictlyCopositive);
        assert_eq!(r.verdict, Verdict::Likely);
        assert!((r.value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_identity_refuted_at_vertex() {
        let a = Tensor::identity(4, 3).unwrap().scaled(-1.0).unwrap();
        let r = is_copositive(&a, &SearchBudget::default()).unwrap();
        assert!(r.is_refuted());
        assert_eq!(r.witness, Some(Witness::Vector(vec![1.0, 0.0, 0.0])));
        assert_eq!(r.value, Some(-1.0));

        let r = is_psd(&a, &SearchBudget::default()).unwrap();
        assert!(r.is_refuted());
        assert_eq!(r.witness, Some(Witness::Vector(vec![1.0, 0.0, 0.0])));
    }

    #[test]
    fn identity_order_four_is_likely_pd() {
        let r = is_psd(&Tensor::identity(4, 3).unwrap(), &SearchBudget::default()).unwrap();
        assert_eq!(r.class, ClassName::Pd);
        assert!((r.value.unwrap() - 1.0 / 3.0).abs() < 1e-8, "{:?}", r.value);
    }

    #[test]
    fn odd_order_sign_flip() {
        let r = is_psd(&Tensor::identity(3, 2).unwrap(), &SearchBudget::default()).unwrap();
        assert!(r.is_refuted());
        let Some(Witness::Vector(w)) = r.witness else { panic!() };
        assert!(Tensor::identity(3, 2).unwrap().contract_full(&w).unwrap() < 0.0);
        let z = is_psd(&Tensor::zeros(3, 2).unwrap(), &SearchBudget::default()).unwrap();
        assert_eq!(z.verdict, Verdict::Likely);
    }
}
