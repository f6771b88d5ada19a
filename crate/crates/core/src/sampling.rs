//! Random and deterministic point sets used by the multistart searches.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::norm2;

pub fn unit_sphere<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm2(&v);
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Uniform point on the probability simplex.
pub fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn normalize2(x: &[f64]) -> Option<Vec<f64>> {
    let r = norm2(x);
    (r > 0.0 && r.is_finite()).then(|| x.iter().map(|v| v / r).collect())
}

/// Rescales to unit max-norm with the first largest-magnitude entry positive.
pub fn normalize_inf(x: &[f64]) -> Option<Vec<f64>> {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    let s = x.get(best).copied()?;
    // `+ 0.0` turns -0.0 into 0.0
    (s != 0.0 && s.is_finite()).then(|| x.iter().map(|v| v / s + 0.0).collect())
}

/// Every nonzero vector in `{-1, 0, 1}^n`, in base-3 counting order with the
/// first coordinate varying fastest.
pub fn sign_patterns(n: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = 3usize.pow(n as u32);
    (1..total).map(move |mut code| {
        (0..n)
            .map(|_| {
                let d = code % 3;
                code /= 3;
                match d {
                    0 => 0.0,
                    1 => 1.0,
                    _ => -1.0,
                }
            })
            .collect()
    })
}

/// Number of points in the simplex grid `{k / depth : sum k = depth}`.
pub fn simplex_grid_size(n: usize, depth: usize) -> f64 {
    // C(depth + n - 1, n - 1)
    (1..n).fold(1.0, |acc, k| acc * (depth + k) as f64 / k as f64)
}

/// Calls `f` on every point of the simplex grid of the given depth.
pub fn for_each_simplex_grid_point(n: usize, depth: usize, mut f: impl FnMut(&[f64])) {
    let mut counts = vec![0usize; n];
    let mut point = vec![0.0; n];
    fn rec(
        k: usize,
        left: usize,
        depth: usize,
        counts: &mut [usize],
        point: &mut [f64],
        f: &mut dyn FnMut(&[f64]),
    ) {
        let n = counts.len();
        if k == n - 1 {
            counts[k] = left;
            for (p, &c) in point.iter_mut().zip(counts.iter()) {
                *p = c as f64 / depth as f64;
            }
            f(point);
            return;
        }
        for c in (0..=left).rev() {
            counts[k] = c;
            rec(k + 1, left - c, depth, counts, point, f);
        }
    }
    if n == 0 || depth == 0 {
        return;
    }
    rec(0, depth, depth, &mut counts, &mut point, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_and_simplex_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = unit_sphere(&mut rng, 4);
            assert!((norm2(&s) - 1.0).abs() < 1e-14);
            let p = simplex(&mut rng, 3);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn grid_enumerates_every_composition() {
        let mut count = 0;
        for_each_simplex_grid_point(3, 4, |p| {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            count += 1;
        });
        assert_eq!(count, 15);
        assert_eq!(simplex_grid_size(3, 4), 15.0);
        let mut first = None;
        for_each_simplex_grid_point(2, 3, |p| {
            first.get_or_insert_with(|| p.to_vec());
        });
        assert_eq!(first.unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn sign_pattern_count_and_order() {
        let all: Vec<_> = sign_patterns(3).collect();
        assert_eq!(all.len(), 26);
        assert_eq!(all[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(all[1], vec![-1.0, 0.0, 0.0]);
        assert_eq!(all[2], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn inf_normalization_fixes_sign() {
        assert_eq!(normalize_inf(&[0.0, -2.0, 2.0]).unwrap(), vec![0.0, 1.0, -1.0]);
        assert!(normalize_inf(&[0.0, 0.0]).is_none());
    }
}
