use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gf2::BitVector;
use crate::rational::{ratio, Rational};
use crate::tensor::TensorShape;
use crate::walsh::{mask, GroupMultiset, GroupSet};
use crate::{Error, Result};

/// Largest total exponent `Σ nᵢ` for which factor tuples are enumerated.
pub const MAX_TUPLE_EXPONENT: usize = 24;

/// `u₁⊗…⊗u_d` as a flattened index, last axis fastest.
pub fn outer_index(dims: &[usize], factors: &[u64]) -> u64 {
    match dims {
        [] => 1,
        [_] => factors[0],
        [_, rest @ ..] => {
            let tail = outer_index(rest, &factors[1..]);
            if tail == 0 {
                return 0;
            }
            let block: usize = rest.iter().product();
            let mut x = 0u64;
            let mut u = factors[0];
            while u != 0 {
                let i = u.trailing_zeros() as usize;
                x |= tail << (i * block);
                u &= u - 1;
            }
            x
        }
    }
}

/// `r·u` for a flattened matrix `r` of shape `(n₁, n₂)`: the XOR of the rows
/// selected by `u`.
pub fn matrix_apply(r: u64, n2: usize, u: u64) -> u64 {
    let m = mask(n2 as u32);
    let mut out = 0;
    let mut u = u;
    while u != 0 {
        let i = u.trailing_zeros() as usize;
        out ^= (r >> (i * n2)) & m;
        u &= u - 1;
    }
    out
}

/// Rank over F₂ of a flattened `(n₁, n₂)` matrix.
pub fn matrix_rank_index(r: u64, n1: usize, n2: usize) -> usize {
    let m = mask(n2 as u32);
    crate::gf2::PackedBasis::spanned_by((0..n1).map(|i| (r >> (i * n2)) & m)).dim()
}

/// A subset of the factor tuples `(u₁,…,u_d)` that index the rank-1 multiset
/// `ℬ`. Working with tuples keeps fibres well defined even where several
/// tuples give the zero tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneSubset {
    shape: TensorShape,
    tuples: BTreeSet<Vec<u64>>,
}

fn tuple_exponent(shape: &TensorShape) -> Result<usize> {
    let e: usize = shape.dims().iter().sum();
    if e > MAX_TUPLE_EXPONENT {
        return Err(Error::budget("factor tuples", 1u128 << e.min(127), 1u128 << MAX_TUPLE_EXPONENT));
    }
    Ok(e)
}

fn tuple_from_index(dims: &[usize], mut x: u64) -> Vec<u64> {
    let mut t = vec![0; dims.len()];
    for (i, &n) in dims.iter().enumerate().rev() {
        t[i] = x & mask(n as u32);
        x >>= n;
    }
    t
}

impl RankOneSubset {
    pub fn new(shape: &TensorShape, tuples: impl IntoIterator<Item = Vec<u64>>) -> Result<Self> {
        tuple_exponent(shape)?;
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != shape.d() {
                return Err(Error::ShapeMismatch(format!("tuple of length {} for order {}", t.len(), shape.d())));
            }
            if let Some((&u, &n)) = t.iter().zip(shape.dims()).find(|(&u, &n)| u & !mask(n as u32) != 0) {
                return Err(Error::Precondition(format!("factor {u:#x} outside F₂^{n}")));
            }
            set.insert(t);
        }
        Ok(RankOneSubset {
            shape: shape.clone(),
            tuples: set,
        })
    }

    /// Tuples satisfying `keep`.
    pub fn from_predicate(shape: &TensorShape, keep: impl Fn(&[u64]) -> bool) -> Result<Self> {
        let e = tuple_exponent(shape)?;
        let tuples = (0..1u64 << e)
            .map(|x| tuple_from_index(shape.dims(), x))
            .filter(|t| keep(t));
        RankOneSubset::new(shape, tuples)
    }

    pub fn full(shape: &TensorShape) -> Result<Self> {
        Self::from_predicate(shape, |_| true)
    }

    /// Exactly `⌈δ·|ℬ|⌉` tuples drawn uniformly without replacement.
    pub fn random(shape: &TensorShape, delta: &Rational, seed: u64) -> Result<Self> {
        let e = tuple_exponent(shape)?;
        if delta <= &crate::rational::zero() || delta > &crate::rational::one() {
            return Err(Error::Precondition(format!("density {delta} outside (0,1]")));
        }
        let total = 1usize << e;
        let want = (delta * Rational::from_integer(BigInt::from(total))).ceil().to_integer();
        let want = usize::try_from(want).map_err(|_| Error::Overflow("tuple count"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = rand::seq::index::sample(&mut rng, total, want);
        RankOneSubset::new(shape, picked.iter().map(|x| tuple_from_index(shape.dims(), x as u64)))
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.tuples.iter()
    }

    pub fn contains(&self, t: &[u64]) -> bool {
        self.tuples.contains(t)
    }

    /// `|ℬ′| / |ℬ|`.
    pub fn density(&self) -> Rational {
        let e: usize = self.shape.dims().iter().sum();
        ratio(self.tuples.len(), BigInt::from(1) << e)
    }

    pub fn has_density(&self, delta: &Rational) -> bool {
        &self.density() >= delta
    }

    /// `{(u₂,…,u_d) : (u,u₂,…,u_d) ∈ ℬ′}` on the tail shape.
    pub fn fiber(&self, u: u64) -> Result<RankOneSubset> {
        if self.shape.d() < 2 {
            return Err(Error::ShapeMismatch("fibres need at least two axes".into()));
        }
        let tail = self.shape.tail(1);
        let tuples = self
            .tuples
            .range(vec![u]..)
            .take_while(|t| t[0] == u)
            .map(|t| t[1..].to_vec())
            .collect();
        Ok(RankOneSubset { shape: tail, tuples })
    }

    pub fn fiber_size(&self, u: u64) -> usize {
        self.tuples.range(vec![u]..).take_while(|t| t[0] == u).count()
    }

    /// First factors `u` whose fibre has density at least `threshold`.
    pub fn dense_first_factors(&self, threshold: &Rational) -> Result<Vec<u64>> {
        if self.shape.d() < 2 {
            return Err(Error::ShapeMismatch("fibres need at least two axes".into()));
        }
        let tail_e: usize = self.shape.dims()[1..].iter().sum();
        let need = threshold * Rational::from_integer(BigInt::from(1) << tail_e);
        Ok((0..1u64 << self.shape.dims()[0])
            .filter(|&u| Rational::from_integer(BigInt::from(self.fiber_size(u))) >= need)
            .collect())
    }

    /// For one axis: the vectors themselves.
    pub fn as_vector_set(&self) -> Result<GroupSet> {
        if self.shape.d() != 1 {
            return Err(Error::ShapeMismatch("a vector set needs exactly one axis".into()));
        }
        GroupSet::from_elements(self.shape.dims()[0] as u32, self.tuples.iter().map(|t| t[0]))
    }

    pub fn tensor_index(&self, t: &[u64]) -> u64 {
        outer_index(self.shape.dims(), t)
    }

    /// The multiset of tensors `u₁⊗…⊗u_d`.
    pub fn to_multiset(&self) -> Result<GroupMultiset> {
        GroupMultiset::from_elements(self.shape.total() as u32, self.tuples.iter().map(|t| self.tensor_index(t)))
    }
}

impl Serialize for RankOneSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            shape: &'a TensorShape,
            size: usize,
            #[serde(serialize_with = "crate::rational::serialize")]
            density: Rational,
        }
        Repr {
            shape: &self.shape,
            size: self.tuples.len(),
            density: self.density(),
        }
        .serialize(s)
    }
}

/// Rank-1 tensor of the given factor indices, as a [`crate::tensor::Tensor`].
pub fn tuple_tensor(shape: &TensorShape, t: &[u64]) -> Result<crate::tensor::Tensor> {
    let factors: Vec<BitVector> = t.iter().zip(shape.dims()).map(|(&u, &n)| BitVector::from_index(n, u)).collect();
    crate::tensor::rank1(shape, &factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::tensor::rank_one_multiset;

    #[test]
    fn outer_index_matches_rank1() {
        let shape = TensorShape::new(vec![2, 3, 2]).unwrap();
        for x in 0..(1u64 << 7) {
            let t = tuple_from_index(shape.dims(), x);
            assert_eq!(outer_index(shape.dims(), &t), tuple_tensor(&shape, &t).unwrap().to_index());
        }
    }

    #[test]
    fn full_subset_is_the_rank_one_multiset() {
        let shape = TensorShape::new(vec![2, 3]).unwrap();
        let f = RankOneSubset::full(&shape).unwrap();
        assert_eq!(f.to_multiset().unwrap(), rank_one_multiset(&shape, false).unwrap());
        assert_eq!(f.density(), ratio(1, 1));
        assert_eq!(f.fiber(0).unwrap().len(), 8);
    }

    #[test]
    fn random_subset_has_requested_density() {
        let shape = TensorShape::new(vec![4, 4]).unwrap();
        let b = RankOneSubset::random(&shape, &ratio(1, 2), 7).unwrap();
        assert_eq!(b.len(), 128);
        assert_eq!(b, RankOneSubset::random(&shape, &ratio(1, 2), 7).unwrap());
        let total: usize = (0..16).map(|u| b.fiber_size(u)).sum();
        assert_eq!(total, 128);
    }

    #[test]
    fn matrix_helpers() {
        // rows: e0, e1, e0+e1 on a 3×2 matrix
        let r = 0b11_10_01;
        assert_eq!(matrix_apply(r, 2, 0b011), 0b11);
        assert_eq!(matrix_apply(r, 2, 0b111), 0);
        assert_eq!(matrix_rank_index(r, 3, 2), 2);
    }
}
