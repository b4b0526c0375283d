//! Tensor spaces `F₂^{n₁}⊗…⊗F₂^{n_d}`, simple sets, l-systems and degeneracy.

mod array;
mod degenerate;
mod lsystem;
mod shape;
mod simple;

pub use array::{contract, outer_product, rank1, Tensor};
pub use degenerate::{
    degenerate_decide, degenerate_decide_with_limit, degenerate_search_size, matrix_rank, verify_degenerate,
    Degeneracy,
};
pub use lsystem::{lsystem_intersect, Children, LSystem};
pub use shape::{axis_subsets, AxisSplit, TensorShape};
pub use simple::SimpleSet;

use std::collections::BTreeMap;

use crate::gf2::Subspace;
use crate::walsh::GroupMultiset;
use crate::Result;

/// The multiset `ℬ = {u₁⊗…⊗u_d}` over all factor tuples, as multiplicities of
/// flattened indices. With `nonzero_only` every factor ranges over nonzero
/// vectors only.
pub fn rank_one_multiset(shape: &TensorShape, nonzero_only: bool) -> Result<GroupMultiset> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let start = u64::from(nonzero_only);
    let mut tuple: Vec<u64> = vec![start; shape.d()];
    loop {
        let factors: Vec<_> = tuple
            .iter()
            .zip(shape.dims())
            .map(|(&u, &n)| crate::gf2::BitVector::from_index(n, u))
            .collect();
        *counts.entry(outer_product(&factors).to_index()).or_default() += 1;
        // odometer, last factor fastest
        let mut pos = shape.d();
        loop {
            if pos == 0 {
                return GroupMultiset::from_counts(shape.total() as u32, counts);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < 1u64 << shape.dims()[pos] {
                break;
            }
            tuple[pos] = start;
        }
    }
}

/// The `H_I` family with `H_I` full for every nonempty `I`, i.e. the whole space.
pub fn full_spaces(shape: &TensorShape) -> BTreeMap<Vec<usize>, Subspace> {
    shape
        .nonempty_axis_subsets()
        .into_iter()
        .map(|axes| {
            let n = shape.axes_total(&axes);
            (axes, Subspace::full(n))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_multiset_sizes() {
        let s = TensorShape::new(vec![2, 3]).unwrap();
        let all = rank_one_multiset(&s, false).unwrap();
        assert_eq!(all.total(), 4 * 8);
        // zero arises from 4 + 8 - 1 tuples
        assert_eq!(all.multiplicity(0), 11);
        let nz = rank_one_multiset(&s, true).unwrap();
        assert_eq!(nz.total(), 3 * 7);
        assert_eq!(nz.multiplicity(0), 0);
        assert_eq!(nz.distinct(), 21);
    }
}
