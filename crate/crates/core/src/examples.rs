//! Fixed tensors used by the reproduction command and the test suites.

use crate::tensor::Tensor;

/// Order 3, dimension 3, symmetric, entrywise nonnegative. Its H-eigenvalues
/// are all positive, yet at `y = (0, 1, -1)` we get `A y^2 = (2, -0.5, -1)`,
/// so it is neither P nor P0.
pub fn dnn_counterexample() -> Tensor {
    let entries: [([usize; 3], f64); 10] = [
        ([0, 0, 0], 100.0),
        ([1, 1, 1], 3.0),
        ([2, 2, 2], 1.0),
        ([0, 0, 1], 1.0),
        ([0, 0, 2], 1.0),
        ([0, 1, 1], 1.0),
        ([0, 2, 2], 1.0),
        ([1, 1, 2], 3.0),
        ([1, 2, 2], 2.5),
        ([0, 1, 2], 0.0),
    ];
    let mut sorted = |idx: &[usize]| {
        let mut k = idx.to_vec();
        k.sort_unstable();
        entries
            .iter()
            .find(|(e, _)| e[..] == k[..])
            .map_or(0.0, |(_, v)| *v)
    };
    Tensor::from_fn(3, 3, &mut sorted)
        .and_then(Tensor::into_symmetric)
        .expect("fixed tensor is valid")
}

/// `y = (0, 1, -1)`, the vector exhibiting the failure of the P0 condition.
pub fn dnn_witness() -> Vec<f64> {
    vec![0.0, 1.0, -1.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_at_witness() {
        let a = dnn_counterexample();
        let y = dnn_witness();
        assert_eq!(a.contract_m1(&y).unwrap(), vec![2.0, -0.5, -1.0]);
        assert_eq!(a.contract_full(&y).unwrap(), 0.5);
        assert!(a.check_symmetric(0.0));
    }
}
