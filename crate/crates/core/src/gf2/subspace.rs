use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::BitVector;
use crate::budget::DEFAULT_ENUMERATION_LIMIT;
use crate::{Error, Result};

/// A linear subspace of F₂ⁿ held in reduced row-echelon form.
///
/// Each row's pivot is its lowest set coordinate, pivots strictly increase and
/// every other row is zero in each pivot column. The representation is unique,
/// so two `Subspace` values are equal as sets iff they compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

/// Canonical span of `vectors` inside F₂^`ambient_dim`.
pub fn rref(ambient_dim: usize, vectors: &[BitVector]) -> Result<Subspace> {
    let mut s = Subspace::zero(ambient_dim);
    for v in vectors {
        s.insert(v.clone())?;
    }
    Ok(s)
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: (0..ambient_dim).map(|i| BitVector::unit(ambient_dim, i)).collect(),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// Span of the coordinate vectors `e_i` for `i` in `coords`.
    pub fn coordinate(ambient_dim: usize, coords: impl IntoIterator<Item = usize>) -> Self {
        let vs: Vec<_> = coords.into_iter().map(|i| BitVector::unit(ambient_dim, i)).collect();
        rref(ambient_dim, &vs).expect("unit vectors share the ambient length")
    }

    /// Span of packed vectors (ambient dimension at most 64).
    pub fn from_indices(ambient_dim: usize, vectors: &[u64]) -> Self {
        let vs: Vec<_> = vectors.iter().map(|&x| BitVector::from_index(ambient_dim, x)).collect();
        rref(ambient_dim, &vs).expect("same ambient length")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.basis.len()
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Basis rows packed into words (ambient dimension at most 64).
    pub fn basis_indices(&self) -> Vec<u64> {
        self.basis.iter().map(BitVector::to_index).collect()
    }

    fn check_len(&self, v: &BitVector) -> Result<()> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Reduces `v` against the basis; the result is zero in every pivot column.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.ambient_dim && self.reduce(v).is_zero()
    }

    /// Adds `v` to the span. Returns whether the dimension grew.
    pub fn insert(&mut self, v: BitVector) -> Result<bool> {
        self.check_len(&v)?;
        let v = self.reduce(&v);
        let Some(p) = v.first_one() else {
            return Ok(false);
        };
        for row in &mut self.basis {
            if row.get(p) {
                row.xor_assign(&v);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, v);
        Ok(true)
    }

    /// `{x : x·v = 0 for all v ∈ self}`.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim;
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let vectors: Vec<BitVector> = (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = BitVector::unit(n, f);
                for (row, &p) in self.basis.iter().zip(&self.pivots) {
                    if row.get(f) {
                        x.set(p, true);
                    }
                }
                x
            })
            .collect();
        rref(n, &vectors).expect("complement vectors share the ambient length")
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        let mut out = self.clone();
        for v in &other.basis {
            out.insert(v.clone())?;
        }
        Ok(out)
    }

    /// Exact intersection, computed as `(V^⊥ + W^⊥)^⊥`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        let dual = self.orthogonal_complement().sum(&other.orthogonal_complement())?;
        Ok(dual.orthogonal_complement())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis.iter().all(|v| other.contains(v))
    }

    /// Drops the last RREF rows (highest pivots) until the codimension reaches
    /// `codim`. Returns `self` unchanged when it is already at least that small.
    pub fn trim_to_codim(&self, codim: usize) -> Subspace {
        let keep = self.ambient_dim.saturating_sub(codim).min(self.dim());
        Subspace {
            ambient_dim: self.ambient_dim,
            basis: self.basis[..keep].to_vec(),
            pivots: self.pivots[..keep].to_vec(),
        }
    }

    /// Number of elements, `2^dim`, if it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        1u64.checked_shl(self.dim() as u32)
    }

    fn check_enumeration(&self, limit: u64) -> Result<()> {
        match self.size() {
            Some(s) if s <= limit => Ok(()),
            _ => Err(Error::budget("subspace enumeration", 1u128 << self.dim().min(127), limit)),
        }
    }

    /// Every element exactly once, in Gray-code order over the basis
    /// coefficients, under the default enumeration budget.
    pub fn enumerate(&self) -> Result<GrayCodeIter<'_>> {
        self.enumerate_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn enumerate_with_limit(&self, limit: u64) -> Result<GrayCodeIter<'_>> {
        self.check_enumeration(limit)?;
        Ok(GrayCodeIter::new(BitVector::zeros(self.ambient_dim), &self.basis))
    }

    /// Packed Gray-code enumeration for ambient dimension at most 64.
    pub fn enumerate_indices(&self) -> Result<Vec<u64>> {
        self.enumerate_indices_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn enumerate_indices_with_limit(&self, limit: u64) -> Result<Vec<u64>> {
        self.check_enumeration(limit)?;
        assert!(self.ambient_dim <= 64, "packed enumeration needs ambient dim <= 64");
        Ok(gray_code_span(0, &self.basis_indices()))
    }
}

/// Elements `rep + Σ c_i b_i` in Gray-code order over `c`.
pub(crate) fn gray_code_span(rep: u64, basis: &[u64]) -> Vec<u64> {
    let count = 1usize << basis.len();
    let mut out = Vec::with_capacity(count);
    let mut cur = rep;
    out.push(cur);
    for i in 1..count {
        cur ^= basis[i.trailing_zeros() as usize];
        out.push(cur);
    }
    out
}

pub struct GrayCodeIter<'a> {
    current: BitVector,
    basis: &'a [BitVector],
    step: u64,
    total: u64,
}

impl<'a> GrayCodeIter<'a> {
    fn new(start: BitVector, basis: &'a [BitVector]) -> Self {
        GrayCodeIter {
            current: start,
            basis,
            step: 0,
            total: 1u64 << basis.len(),
        }
    }
}

impl Iterator for GrayCodeIter<'_> {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        if self.step >= self.total {
            return None;
        }
        if self.step > 0 {
            let j = self.step.trailing_zeros() as usize;
            self.current.xor_assign(&self.basis[j]);
        }
        self.step += 1;
        Some(self.current.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.step) as usize;
        (left, Some(left))
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.basis.len()))?;
        for row in &self.basis {
            seq.serialize_element(&row.to_hex())?;
        }
        seq.end()
    }
}

/// A translate `rep + space` with `rep` reduced to zero on the pivot columns.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coset {
    rep: BitVector,
    space: Subspace,
}

impl Coset {
    pub fn new(rep: &BitVector, space: Subspace) -> Result<Self> {
        space.check_len(rep)?;
        Ok(Coset {
            rep: space.reduce(rep),
            space,
        })
    }

    pub fn rep(&self) -> &BitVector {
        &self.rep
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.rep.len() && self.space.reduce(v) == self.rep
    }

    pub fn enumerate(&self) -> Result<GrayCodeIter<'_>> {
        self.space.check_enumeration(DEFAULT_ENUMERATION_LIMIT)?;
        Ok(GrayCodeIter::new(self.rep.clone(), &self.space.basis))
    }

    pub fn enumerate_indices(&self) -> Result<Vec<u64>> {
        self.space.check_enumeration(DEFAULT_ENUMERATION_LIMIT)?;
        Ok(gray_code_span(self.rep.to_index(), &self.space.basis_indices()))
    }
}

/// Gaussian binomial coefficient: the number of `k`-dimensional subspaces of F₂ⁿ.
pub fn gaussian_binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul((1u128 << (n - i)) - 1);
        den = den.saturating_mul((1u128 << (i + 1)) - 1);
    }
    num / den
}

/// All `k`-dimensional subspaces of F₂ⁿ (n ≤ 64), in canonical RREF order:
/// pivot sets lexicographically, then free entries as a binary counter.
pub fn subspaces_of_dim(n: usize, k: usize) -> impl Iterator<Item = Subspace> {
    assert!(n <= 64, "subspace listing needs n <= 64");
    combinations(n, k).flat_map(move |pivots| {
        // free slots: (row, column) with column > pivot[row] and not a pivot
        let is_pivot = |c: usize| pivots.contains(&c);
        let slots: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| ((p + 1)..n).filter(|&c| !is_pivot(c)).map(move |c| (r, c)))
            .collect();
        let free = slots.len();
        (0u64..(1u64 << free)).map(move |mask| {
            let mut rows: Vec<u64> = pivots.iter().map(|&p| 1u64 << p).collect();
            for (s, &(r, c)) in slots.iter().enumerate() {
                if mask >> s & 1 == 1 {
                    rows[r] |= 1u64 << c;
                }
            }
            Subspace {
                ambient_dim: n,
                basis: rows.iter().map(|&x| BitVector::from_index(n, x)).collect(),
                pivots: pivots.clone(),
            }
        })
    })
}

/// All subspaces of F₂ⁿ, dimension by dimension.
pub fn all_subspaces(n: usize) -> impl Iterator<Item = Subspace> {
    (0..=n).flat_map(move |k| subspaces_of_dim(n, k))
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// Fast packed basis for ambient dimension at most 64, kept fully reduced.
#[derive(Clone, Debug, Default)]
pub struct PackedBasis {
    rows: Vec<(u64, u64)>,
}

impl PackedBasis {
    pub fn new() -> Self {
        PackedBasis::default()
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        let mut b = PackedBasis::new();
        for v in s.basis() {
            b.insert(v.to_index());
        }
        b
    }

    pub fn spanned_by(vectors: impl IntoIterator<Item = u64>) -> Self {
        let mut b = PackedBasis::new();
        for v in vectors {
            b.insert(v);
        }
        b
    }

    #[inline]
    pub fn reduce(&self, mut v: u64) -> u64 {
        for &(pivot, row) in &self.rows {
            if v & pivot != 0 {
                v ^= row;
            }
        }
        v
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    pub fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let pivot = v & v.wrapping_neg();
        for (_, row) in &mut self.rows {
            if *row & pivot != 0 {
                *row ^= v;
            }
        }
        self.rows.push((pivot, v));
        true
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().map(|&(_, r)| r)
    }

    pub fn to_subspace(&self, ambient_dim: usize) -> Subspace {
        let rows: Vec<u64> = self.rows().collect();
        Subspace::from_indices(ambient_dim, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        BitVector::from_binary_str(s).unwrap()
    }

    #[test]
    fn rref_examples() {
        let s = rref(3, &[bv("110"), bv("011")]).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.basis(), &[bv("101"), bv("011")]);
        assert_eq!(s.pivots(), &[0, 1]);

        assert_eq!(rref(3, &[]).unwrap().dim(), 0);
        assert_eq!(rref(3, &[bv("111"), bv("110"), bv("001")]).unwrap().dim(), 2);
    }

    #[test]
    fn rref_rejects_mixed_lengths() {
        let err = rref(3, &[bv("110"), bv("0110")]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 4 }));
    }

    #[test]
    fn complement_examples() {
        let v = rref(3, &[bv("100")]).unwrap();
        assert_eq!(v.orthogonal_complement(), rref(3, &[bv("010"), bv("001")]).unwrap());
        assert_eq!(Subspace::full(5).orthogonal_complement(), Subspace::zero(5));
        assert_eq!(Subspace::zero(5).orthogonal_complement(), Subspace::full(5));
    }

    #[test]
    fn intersect_examples() {
        let a = rref(3, &[bv("100"), bv("010")]).unwrap();
        let b = rref(3, &[bv("010"), bv("001")]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), rref(3, &[bv("010")]).unwrap());
        assert_eq!(a.intersect(&a).unwrap(), a);
        assert!(a.intersect(&Subspace::full(4)).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let z: Vec<_> = Subspace::zero(3).enumerate().unwrap().collect();
        assert_eq!(z, vec![BitVector::zeros(3)]);

        let mut all: Vec<_> = Subspace::full(2).enumerate().unwrap().map(|v| v.to_index()).collect();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);

        let coset = Coset::new(&bv("100"), rref(3, &[bv("010")]).unwrap()).unwrap();
        let elems: Vec<_> = coset.enumerate().unwrap().collect();
        assert_eq!(elems, vec![bv("100"), bv("110")]);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let s = Subspace::full(30);
        assert!(matches!(s.enumerate_with_limit(1 << 20), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn coset_rep_is_canonical() {
        let space = rref(3, &[bv("110")]).unwrap();
        let a = Coset::new(&bv("100"), space.clone()).unwrap();
        let b = Coset::new(&bv("010"), space).unwrap();
        assert_eq!(a, b);
        assert!(!a.rep().get(0));
    }

    #[test]
    fn trimming_drops_highest_pivots() {
        let s = Subspace::full(4);
        let t = s.trim_to_codim(2);
        assert_eq!(t.pivots(), &[0, 1]);
        assert_eq!(s.trim_to_codim(0), s);
    }

    #[test]
    fn subspace_listing_matches_gaussian_binomials() {
        for n in 0..=5 {
            for k in 0..=n {
                let list: Vec<_> = subspaces_of_dim(n, k).collect();
                assert_eq!(list.len() as u128, gaussian_binomial(n, k), "n={n} k={k}");
                let mut dedup = list.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), list.len());
                for s in &list {
                    // listed values are already canonical
                    assert_eq!(&rref(n, s.basis()).unwrap(), s);
                }
            }
        }
        assert_eq!(all_subspaces(4).count(), 1 + 15 + 35 + 15 + 1);
    }

    #[test]
    fn packed_basis_agrees_with_subspace() {
        let s = Subspace::from_indices(6, &[0b000011, 0b001100, 0b001111]);
        let p = PackedBasis::from_subspace(&s);
        for x in 0u64..64 {
            assert_eq!(p.contains(x), s.contains(&BitVector::from_index(6, x)));
        }
        assert_eq!(p.to_subspace(6), s);
    }
}
