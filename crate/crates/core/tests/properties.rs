use proptest::prelude::*;

use ptensor::pcheck::{phi_p, phi_p0};
use ptensor::spectral::{nqz_spectral_radius, NqzIteration};
use ptensor::tcp::{fb_merit, natural_residual, tcp_f, TcpInstance};
use ptensor::{IndexSet, Tensor};

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4, 1usize..=4)
}

fn tensor_with(lo: f64, hi: f64) -> impl Strategy<Value = Tensor> {
    shape().prop_flat_map(move |(m, n)| {
        prop::collection::vec(lo..hi, n.pow(m as u32))
            .prop_map(move |v| Tensor::new(m, n, v, false).unwrap())
    })
}

fn tensor_and_vector() -> impl Strategy<Value = (Tensor, Vec<f64>)> {
    tensor_with(-1.0, 1.0).prop_flat_map(|t| {
        let n = t.dim();
        (Just(t), prop::collection::vec(-1.0..1.0f64, n))
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_is_homogeneous((a, x) in tensor_and_vector(), t in -2.0..2.0f64) {
        let m = a.order() as i32;
        let y: Vec<f64> = x.iter().map(|v| t * v).collect();
        let ax = a.contract_m1(&x).unwrap();
        let ay = a.contract_m1(&y).unwrap();
        let scale: f64 = ax.iter().fold(0.0_f64, |s, v| s.max(v.abs())) * t.abs().powi(m - 1);
        for (u, v) in ay.iter().zip(&ax) {
            prop_assert!((u - t.powi(m - 1) * v).abs() <= 1e-10 * scale.max(1e-12));
        }
    }

    #[test]
    fn full_contraction_is_inner_product((a, x) in tensor_and_vector()) {
        let ax = a.contract_m1(&x).unwrap();
        let inner: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        prop_assert!((inner - a.contract_full(&x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn functional_is_homogeneous((a, x) in tensor_and_vector(), t in 0.1..2.0f64, neg in any::<bool>()) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let t = if neg { -t } else { t };
        let e = 2 * (a.order() as i32 - 1);
        let y: Vec<f64> = x.iter().map(|v| t * v).collect();
        let p = phi_p(&a, &x).unwrap();
        let q = phi_p(&a, &y).unwrap();
        prop_assert!((q - t.powi(e) * p).abs() <= 1e-10 * (t.powi(e) * p).abs().max(1e-12));
        let p0 = phi_p0(&a, &x, 1e-7).unwrap();
        let q0 = phi_p0(&a, &y, 1e-7).unwrap();
        prop_assert!((q0 - t.powi(e) * p0).abs() <= 1e-10 * (t.powi(e) * p0).abs().max(1e-12));
    }

    #[test]
    fn subtensors_compose(a in tensor_with(-1.0, 1.0), outer_mask in any::<u8>(), inner_mask in any::<u8>()) {
        let n = a.dim();
        let outer: Vec<usize> = (0..n).filter(|i| outer_mask >> i & 1 == 1).collect();
        prop_assume!(!outer.is_empty());
        let inner: Vec<usize> = (0..outer.len()).filter(|i| inner_mask >> i & 1 == 1).collect();
        prop_assume!(!inner.is_empty());
        let s = IndexSet::new(outer).unwrap();
        let t = IndexSet::new(inner).unwrap();
        let twice = a.principal_subtensor(&s).unwrap().principal_subtensor(&t).unwrap();
        let once = a.principal_subtensor(&s.compose(&t).unwrap()).unwrap();
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn comparison_is_canonical(a in tensor_with(-1.0, 1.0)) {
        let c = a.comparison_tensor();
        let cc = c.comparison_tensor();
        prop_assert_eq!(cc.values(), c.values());
        for (k, &v) in c.values().iter().enumerate() {
            let idx = c.multi_index(k);
            if idx.iter().all(|&i| i == idx[0]) {
                prop_assert!(v >= 0.0);
            } else {
                prop_assert!(v <= 0.0);
            }
        }
    }

    #[test]
    fn symmetrize_is_a_projection(a in tensor_with(-1.0, 1.0)) {
        let s = a.symmetrize();
        let ss = s.symmetrize();
        for (u, v) in s.values().iter().zip(ss.values()) {
            prop_assert!((u - v).abs() <= 1e-15);
        }
        prop_assert!(s.check_symmetric(0.0));
    }

    #[test]
    fn nqz_brackets_nest(a in tensor_with(0.0, 1.0)) {
        let mut it = NqzIteration::new(&a, 1e-8).unwrap();
        let mut prev = it.next().unwrap();
        for b in it.take(200) {
            prop_assert!(b.lower >= prev.lower - 1e-12 * prev.lower.abs().max(1.0));
            prop_assert!(b.upper <= prev.upper + 1e-12 * prev.upper.abs().max(1.0));
            prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
            prev = b;
        }
    }

    #[test]
    fn nqz_scales(a in tensor_with(0.0, 1.0), c in 0.01..100.0f64) {
        let r = nqz_spectral_radius(&a, 1e-13, 20_000).unwrap();
        let rc = nqz_spectral_radius(&a.scaled(c).unwrap(), 1e-13, 20_000).unwrap();
        prop_assume!(r.converged && rc.converged && r.rho > 1e-3);
        prop_assert!(rel_close(rc.rho, c * r.rho, 1e-8), "{} vs {}", rc.rho, c * r.rho);
        prop_assert!(r.upper_bound >= r.rho);
    }

    #[test]
    fn tcp_map_minus_offset_is_homogeneous((a, x) in tensor_and_vector(), t in 0.01..3.0f64) {
        let n = a.dim();
        let m = a.order() as i32;
        let q: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
        let inst = TcpInstance::new(a, q).unwrap();
        let f0 = tcp_f(&inst, &vec![0.0; n]).unwrap();
        let g = |y: &[f64]| -> Vec<f64> {
            tcp_f(&inst, y).unwrap().iter().zip(&f0).map(|(u, v)| u - v).collect()
        };
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        for (u, v) in g(&tx).iter().zip(g(&x)) {
            prop_assert!((u - t.powi(m - 1) * v).abs() <= 1e-10 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn merit_and_residual_vanish_together((a, x) in tensor_and_vector(), q in prop::collection::vec(-1.0..1.0f64, 4)) {
        let n = a.dim();
        let inst = TcpInstance::new(a, q[..n].to_vec()).unwrap();
        let merit = fb_merit(&inst, &x).unwrap();
        let res = natural_residual(&inst, &x).unwrap();
        prop_assert!(merit >= 0.0);
        prop_assert_eq!(merit <= 1e-18, res <= 1e-9);
    }
}
