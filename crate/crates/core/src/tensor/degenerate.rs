use std::collections::BTreeMap;

use serde::Serialize;

use super::{axis_subsets, Tensor};
use crate::budget::DEFAULT_SEARCH_LIMIT;
use crate::gf2::{subspaces_of_dim, BitVector, PackedBasis, Subspace};
use crate::Result;

/// Outcome of a k-degeneracy decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Degeneracy {
    /// `r ∈ Σ_I H_I ⊗ F₂^{I^c}` over nonempty `I ⊆ {0,…,d−2}` with these `H_I`.
    Degenerate {
        #[serde(serialize_with = "serialize_spaces")]
        spaces: BTreeMap<Vec<usize>, Subspace>,
    },
    NotDegenerate,
    /// The search would exceed the budget; no answer is given.
    Undecided { needed: u128, limit: u128 },
}

impl Degeneracy {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Degeneracy::Degenerate { .. })
    }
}

fn serialize_spaces<S: serde::Serializer>(
    spaces: &BTreeMap<Vec<usize>, Subspace>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        axes: &'a [usize],
        rows: &'a Subspace,
    }
    s.collect_seq(spaces.iter().map(|(axes, rows)| Entry { axes, rows }))
}

/// Number of candidate collections the decider would enumerate.
pub fn degenerate_search_size(shape: &super::TensorShape, k: usize) -> u128 {
    let d = shape.d();
    if d < 2 {
        return 1;
    }
    axis_subsets(d - 1)
        .iter()
        .map(|axes| {
            let n = shape.axes_total(axes);
            crate::gf2::gaussian_binomial(n, k.min(n))
        })
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Decides whether `r` is k-degenerate through the one-sided form: some
/// `H_I ⊆ F₂^I` of dimension at most `k`, one per nonempty `I ⊆ {0,…,d−2}`,
/// with `r ∈ Σ_I H_I ⊗ F₂^{I^c}`.
///
/// Enlarging an `H_I` only enlarges the sum, so only dimension exactly
/// `min(k, dim F₂^I)` is enumerated.
pub fn degenerate_decide(r: &Tensor, k: usize) -> Result<Degeneracy> {
    degenerate_decide_with_limit(r, k, DEFAULT_SEARCH_LIMIT as u128)
}

pub fn degenerate_decide_with_limit(r: &Tensor, k: usize, limit: u128) -> Result<Degeneracy> {
    let shape = r.shape();
    if r.is_zero() {
        return Ok(Degeneracy::Degenerate {
            spaces: BTreeMap::new(),
        });
    }
    if shape.d() < 2 {
        return Ok(Degeneracy::NotDegenerate);
    }
    let needed = degenerate_search_size(shape, k);
    if needed > limit {
        return Ok(Degeneracy::Undecided { needed, limit });
    }

    let subsets = axis_subsets(shape.d() - 1);
    // for each I, each candidate H_I paired with the packed span of H_I ⊗ F₂^{I^c}
    let mut options: Vec<Vec<(Subspace, Vec<u64>)>> = Vec::new();
    for axes in &subsets {
        let split = shape.split(axes)?;
        let n = split.inner_total();
        let mut opts = Vec::new();
        for h in subspaces_of_dim(n, k.min(n)) {
            let mut gens = Vec::new();
            for b in h.basis() {
                for j in 0..split.outer_total() {
                    gens.push(Tensor::embed(shape, &split, b, j).to_index());
                }
            }
            opts.push((h, gens));
        }
        options.push(opts);
    }

    let target = r.to_index();
    let mut choice = vec![0usize; options.len()];
    loop {
        let basis = PackedBasis::spanned_by(
            choice
                .iter()
                .zip(&options)
                .flat_map(|(&c, opts)| opts[c].1.iter().copied()),
        );
        if basis.contains(target) {
            let spaces = subsets
                .iter()
                .zip(&choice)
                .zip(&options)
                .map(|((axes, &c), opts)| (axes.clone(), opts[c].0.clone()))
                .collect();
            return Ok(Degeneracy::Degenerate { spaces });
        }
        // odometer over the choices, last subset fastest
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(Degeneracy::NotDegenerate);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < options[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Checks a claimed witness: every `H_I` has dimension at most `k` and `r`
/// lies in `Σ_I H_I ⊗ F₂^{I^c}`.
pub fn verify_degenerate(r: &Tensor, k: usize, spaces: &BTreeMap<Vec<usize>, Subspace>) -> Result<bool> {
    let shape = r.shape();
    let mut basis = PackedBasis::new();
    for (axes, h) in spaces {
        if axes.is_empty() || axes.contains(&(shape.d() - 1)) || h.dim() > k {
            return Ok(false);
        }
        let split = shape.split(axes)?;
        for b in h.basis() {
            for j in 0..split.outer_total() {
                basis.insert(Tensor::embed(shape, &split, b, j).to_index());
            }
        }
    }
    Ok(basis.contains(r.to_index()))
}

/// Rank over F₂ of the matrix view of a 2-axis tensor.
pub fn matrix_rank(r: &Tensor) -> usize {
    let dims = r.shape().dims();
    assert_eq!(dims.len(), 2, "matrix_rank needs a 2-axis tensor");
    let rows: Vec<BitVector> = (0..dims[0])
        .map(|i| BitVector::from_bits(&(0..dims[1]).map(|j| r.get(&[i, j])).collect::<Vec<_>>()))
        .collect();
    crate::gf2::rref(dims[1], &rows).map(|s| s.dim()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::TensorShape;

    #[test]
    fn zero_is_zero_degenerate() {
        let s = TensorShape::new(vec![2, 2, 2]).unwrap();
        assert!(degenerate_decide(&Tensor::zeros(&s), 0).unwrap().is_degenerate());
    }

    #[test]
    fn matrices_follow_rank() {
        let s = TensorShape::new(vec![3, 3]).unwrap();
        for x in (0..512u64).step_by(7) {
            let r = Tensor::from_index(&s, x);
            let rank = matrix_rank(&r);
            for k in 0..=2 {
                let d = degenerate_decide(&r, k).unwrap();
                assert_eq!(d.is_degenerate(), rank <= k, "x={x} k={k}");
                if let Degeneracy::Degenerate { spaces } = d {
                    assert!(verify_degenerate(&r, k, &spaces).unwrap());
                }
            }
        }
    }

    #[test]
    fn reports_undecided_over_budget() {
        let s = TensorShape::new(vec![2, 2, 2]).unwrap();
        let r = Tensor::from_index(&s, 0b1000_0001);
        let out = degenerate_decide_with_limit(&r, 1, 10).unwrap();
        assert!(matches!(out, Degeneracy::Undecided { needed: 135, limit: 10 }));
    }
}
