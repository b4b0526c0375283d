//! Low-weight vectors in subspaces and bases with private coordinates.

use super::{BitVector, Subspace};
use crate::{Error, Result};

/// Number of `v ∈ V` with `|v| ≤ k`, by exhaustive enumeration.
///
/// Never exceeds `Σ_{i≤k} C(dim V, i)`: after elimination every nonzero
/// combination of `j` basis rows has a one in each of its `j` pivot columns.
pub fn count_small_support(space: &Subspace, k: usize) -> Result<u64> {
    if k > space.ambient_dim() {
        return Err(Error::Precondition(format!(
            "support bound {k} exceeds ambient dimension {}",
            space.ambient_dim()
        )));
    }
    Ok(space.enumerate()?.filter(|v| v.weight() <= k).count() as u64)
}

/// `Σ_{i=0}^{k} C(d, i)`.
pub fn binomial_prefix_sum(d: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for i in 0..=k.min(d) {
        total += c;
        c = c * (d - i) as u128 / (i + 1) as u128;
    }
    total
}

/// A basis vector together with its private coordinate set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateBasisVector {
    pub vector: BitVector,
    /// Coordinates where this vector is 1 and every other basis vector is 0.
    pub private: Vec<usize>,
}

/// Builds a basis `v_1..v_d` of `space` whose private sets satisfy
/// `|I_i| ≥ min_weight / 2^{d-1}`, provided every nonzero element has weight
/// at least `min_weight`.
///
/// The basis is grown one vector at a time. A new vector is first flipped by
/// the existing `v_i` wherever it covers more than half of `I_i`, then each old
/// `v_i` is replaced by `v_i + v` if that keeps more of the new vector's support
/// clear.
pub fn private_coordinate_basis(space: &Subspace, min_weight: usize) -> Result<Vec<PrivateBasisVector>> {
    if let Some(w) = space.enumerate()?.find(|v| !v.is_zero() && v.weight() < min_weight) {
        return Err(Error::Precondition(format!(
            "vector {w} of weight {} is below the minimum weight {min_weight}",
            w.weight()
        )));
    }

    let mut basis: Vec<BitVector> = Vec::new();
    for next in space.basis() {
        let mut v = next.clone();
        if basis.is_empty() {
            basis.push(v);
            continue;
        }
        let private = private_sets(&basis);
        for (vi, ii) in basis.iter().zip(&private) {
            let covered = ii.iter().filter(|&&k| v.get(k)).count();
            if 2 * covered > ii.len() {
                v.xor_assign(vi);
            }
        }
        // keep a large part of supp(v) clear of every old vector
        let mut clear: Vec<usize> = v.ones_iter().collect();
        for vi in &mut basis {
            let (ones, zeros): (Vec<usize>, Vec<usize>) = clear.iter().partition(|&&k| vi.get(k));
            if zeros.len() >= ones.len() {
                clear = zeros;
            } else {
                vi.xor_assign(&v);
                clear = ones;
            }
        }
        basis.push(v);
    }

    let private = private_sets(&basis);
    let d = basis.len();
    let out: Vec<_> = basis
        .into_iter()
        .zip(private)
        .map(|(vector, private)| PrivateBasisVector { vector, private })
        .collect();

    if d > 0 {
        let needed = min_weight.div_ceil(1 << (d - 1));
        if let Some(bad) = out.iter().find(|b| b.private.len() < needed) {
            return Err(Error::Internal(format!(
                "private set of {} has size {} < {needed}",
                bad.vector,
                bad.private.len()
            )));
        }
    }
    Ok(out)
}

/// `I_i = {k : v_i(k) = 1, v_j(k) = 0 for j ≠ i}` for each basis vector.
pub fn private_sets(basis: &[BitVector]) -> Vec<Vec<usize>> {
    (0..basis.len())
        .map(|i| {
            basis[i]
                .ones_iter()
                .filter(|&k| basis.iter().enumerate().all(|(j, w)| j == i || !w.get(k)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rref;

    fn bv(s: &str) -> BitVector {
        BitVector::from_binary_str(s).unwrap()
    }

    #[test]
    fn small_support_examples() {
        let n = 7;
        let s = Subspace::coordinate(n, 0..4);
        assert_eq!(count_small_support(&s, 1).unwrap(), 5);
        assert_eq!(count_small_support(&Subspace::zero(n), 3).unwrap(), 1);
        assert!(count_small_support(&s, 8).is_err());
        assert_eq!(binomial_prefix_sum(8, 3), 93);
    }

    #[test]
    fn private_basis_examples() {
        let s = Subspace::coordinate(2, 0..2);
        let b = private_coordinate_basis(&s, 1).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].private, vec![0]);
        assert_eq!(b[1].private, vec![1]);

        let s = rref(4, &[bv("1100"), bv("0110")]).unwrap();
        let b = private_coordinate_basis(&s, 2).unwrap();
        assert_eq!(b.len(), 2);
        let vectors: Vec<_> = b.iter().map(|x| x.vector.clone()).collect();
        assert_eq!(rref(4, &vectors).unwrap(), s);
        for (i, x) in b.iter().enumerate() {
            assert!(!x.private.is_empty());
            for &k in &x.private {
                assert!(x.vector.get(k));
                assert!(b.iter().enumerate().all(|(j, y)| j == i || !y.vector.get(k)));
            }
        }

        assert!(private_coordinate_basis(&Subspace::zero(4), 3).unwrap().is_empty());
    }

    #[test]
    fn private_basis_reports_light_vectors() {
        let s = rref(4, &[bv("1000"), bv("0111")]).unwrap();
        let err = private_coordinate_basis(&s, 2).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("1000")));
    }
}
