use std::collections::BTreeMap;

use serde::Serialize;

use crate::budget::MAX_GROUP_EXPONENT;
use crate::gf2::{BitVector, Coset, Subspace};
use crate::rational::{ratio, Rational};
use crate::{Error, Result};

/// Elements of `F₂ⁿ` are `u64` indices, coordinate `i` at bit `i`.
pub(crate) fn check_exponent(n: u32) -> Result<()> {
    if n > 64 {
        return Err(Error::budget("group exponent", n as u128, 64u128));
    }
    Ok(())
}

pub(crate) fn check_dense_exponent(n: u32) -> Result<()> {
    if n > MAX_GROUP_EXPONENT {
        return Err(Error::budget("dense group exponent", n as u128, MAX_GROUP_EXPONENT as u128));
    }
    Ok(())
}

pub(crate) fn mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// Bitmap over all `2ⁿ` elements.
    Dense(Vec<u64>),
    /// Sorted, without duplicates.
    List(Vec<u64>),
}

/// A subset of `F₂ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSet {
    n: u32,
    repr: Repr,
    size: u64,
}

impl GroupSet {
    pub fn empty(n: u32) -> Result<Self> {
        check_exponent(n)?;
        Ok(GroupSet {
            n,
            repr: Repr::List(Vec::new()),
            size: 0,
        })
    }

    /// All of `F₂ⁿ`, stored densely.
    pub fn full(n: u32) -> Result<Self> {
        Self::from_predicate(n, |_| true)
    }

    /// Dense set `{x : keep(x)}`.
    pub fn from_predicate(n: u32, mut keep: impl FnMut(u64) -> bool) -> Result<Self> {
        check_dense_exponent(n)?;
        let total = 1usize << n;
        let mut bits = vec![0u64; total.div_ceil(64)];
        let mut size = 0;
        for x in 0..total as u64 {
            if keep(x) {
                bits[(x >> 6) as usize] |= 1 << (x & 63);
                size += 1;
            }
        }
        Ok(GroupSet {
            n,
            repr: Repr::Dense(bits),
            size,
        })
    }

    /// List-backed set; duplicates are merged.
    pub fn from_elements(n: u32, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        check_exponent(n)?;
        let m = mask(n);
        let mut v: Vec<u64> = Vec::new();
        for x in elements {
            if x & !m != 0 {
                return Err(Error::Precondition(format!("element {x:#x} outside F₂^{n}")));
            }
            v.push(x);
        }
        v.sort_unstable();
        v.dedup();
        let size = v.len() as u64;
        Ok(GroupSet {
            n,
            repr: Repr::List(v),
            size,
        })
    }

    pub fn from_subspace(space: &Subspace) -> Result<Self> {
        Self::from_elements(space.ambient_dim() as u32, space.enumerate_indices()?)
    }

    pub fn from_coset(coset: &Coset) -> Result<Self> {
        Self::from_elements(coset.space().ambient_dim() as u32, coset.enumerate_indices()?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// `α = |A| / 2ⁿ`.
    pub fn density(&self) -> Rational {
        ratio(self.size, num_bigint::BigInt::from(1) << self.n)
    }

    pub fn contains(&self, x: u64) -> bool {
        if x & !mask(self.n) != 0 {
            return false;
        }
        match &self.repr {
            Repr::Dense(bits) => bits[(x >> 6) as usize] >> (x & 63) & 1 == 1,
            Repr::List(v) => v.binary_search(&x).is_ok(),
        }
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.repr {
            Repr::List(v) => Box::new(v.iter().copied()),
            Repr::Dense(bits) => Box::new(bits.iter().enumerate().flat_map(|(w, &word)| {
                let mut word = word;
                std::iter::from_fn(move || {
                    if word == 0 {
                        return None;
                    }
                    let b = word.trailing_zeros() as u64;
                    word &= word - 1;
                    Some(((w as u64) << 6) | b)
                })
            })),
        }
    }

    pub fn elements(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// Dense copy (requires `n ≤ 24`).
    pub fn to_dense(&self) -> Result<GroupSet> {
        if self.is_dense() {
            return Ok(self.clone());
        }
        check_dense_exponent(self.n)?;
        let mut bits = vec![0u64; (1usize << self.n).div_ceil(64)];
        for x in self.iter() {
            bits[(x >> 6) as usize] |= 1 << (x & 63);
        }
        Ok(GroupSet {
            n: self.n,
            repr: Repr::Dense(bits),
            size: self.size,
        })
    }

    /// The indicator function `1_A` as an array of length `2ⁿ`.
    pub fn indicator(&self) -> Result<Vec<i64>> {
        check_dense_exponent(self.n)?;
        let mut f = vec![0i64; 1usize << self.n];
        for x in self.iter() {
            f[x as usize] = 1;
        }
        Ok(f)
    }

    /// `A + t`.
    pub fn translate(&self, t: u64) -> Result<GroupSet> {
        GroupSet::from_elements(self.n, self.iter().map(|x| x ^ t))
    }

    pub fn union(&self, other: &GroupSet) -> Result<GroupSet> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n as usize,
                found: other.n as usize,
            });
        }
        GroupSet::from_elements(self.n, self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &GroupSet) -> Result<GroupSet> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n as usize,
                found: other.n as usize,
            });
        }
        GroupSet::from_elements(self.n, self.iter().filter(|&x| other.contains(x)))
    }

    pub fn to_bitvectors(&self) -> Vec<BitVector> {
        self.iter().map(|x| BitVector::from_index(self.n as usize, x)).collect()
    }
}

impl Serialize for GroupSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: u32,
            size: u64,
            elements: Vec<String>,
        }
        Repr {
            n: self.n,
            size: self.size,
            elements: self.iter().map(|x| BitVector::from_index(self.n as usize, x).to_hex()).collect(),
        }
        .serialize(s)
    }
}

/// A multiset on `F₂ⁿ`: distinct elements with multiplicities `≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMultiset {
    n: u32,
    /// Sorted by element.
    entries: Vec<(u64, u64)>,
    total: u64,
}

impl GroupMultiset {
    /// Zero multiplicities are dropped; the result must be nonempty.
    pub fn from_counts(n: u32, counts: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        check_exponent(n)?;
        let m = mask(n);
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (x, c) in counts {
            if x & !m != 0 {
                return Err(Error::Precondition(format!("element {x:#x} outside F₂^{n}")));
            }
            if c > 0 {
                let slot = merged.entry(x).or_default();
                *slot = slot.checked_add(c).ok_or(Error::Overflow("multiset multiplicity"))?;
            }
        }
        let entries: Vec<(u64, u64)> = merged.into_iter().collect();
        let mut total = 0u64;
        for &(_, c) in &entries {
            total = total.checked_add(c).ok_or(Error::Overflow("multiset total"))?;
        }
        if total == 0 {
            return Err(Error::Empty("multiset"));
        }
        Ok(GroupMultiset { n, entries, total })
    }

    /// Each listed element counted as often as it occurs.
    pub fn from_elements(n: u32, elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::from_counts(n, elements.into_iter().map(|x| (x, 1)))
    }

    pub fn from_set(set: &GroupSet) -> Result<Self> {
        Self::from_counts(set.n(), set.iter().map(|x| (x, 1)))
    }

    /// The standard basis `{e₁,…,e_n}`.
    pub fn standard_basis(n: u32) -> Result<Self> {
        Self::from_elements(n, (0..n).map(|i| 1u64 << i))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `Σ` multiplicities.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn multiplicity(&self, x: u64) -> u64 {
        self.entries
            .binary_search_by_key(&x, |&(e, _)| e)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Multiplicities as a dense array of length `2ⁿ`.
    pub fn counts(&self) -> Result<Vec<i64>> {
        check_dense_exponent(self.n)?;
        let mut f = vec![0i64; 1usize << self.n];
        for &(x, c) in &self.entries {
            f[x as usize] = i64::try_from(c).map_err(|_| Error::Overflow("multiplicity"))?;
        }
        Ok(f)
    }

    /// Keeps the entries whose element satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Result<GroupMultiset> {
        GroupMultiset::from_counts(self.n, self.entries.iter().copied().filter(|&(x, _)| keep(x)))
    }

    /// Every multiplicity multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<GroupMultiset> {
        let mut out = Vec::with_capacity(self.entries.len());
        for &(x, c) in &self.entries {
            out.push((x, c.checked_mul(factor).ok_or(Error::Overflow("multiplicity"))?));
        }
        GroupMultiset::from_counts(self.n, out)
    }

    /// The support as a set.
    pub fn support(&self) -> Result<GroupSet> {
        GroupSet::from_elements(self.n, self.entries.iter().map(|&(x, _)| x))
    }
}

impl Serialize for GroupMultiset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            element: String,
            multiplicity: u64,
        }
        #[derive(Serialize)]
        struct Repr {
            n: u32,
            total: u64,
            entries: Vec<Entry>,
        }
        Repr {
            n: self.n,
            total: self.total,
            entries: self
                .entries
                .iter()
                .map(|&(x, c)| Entry {
                    element: BitVector::from_index(self.n as usize, x).to_hex(),
                    multiplicity: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_list_agree() {
        let a = GroupSet::from_predicate(6, |x| x.count_ones() == 3).unwrap();
        let b = GroupSet::from_elements(6, (0..64).filter(|x: &u64| x.count_ones() == 3)).unwrap();
        assert_eq!(a.size(), 20);
        assert_eq!(a.elements(), b.elements());
        assert_eq!(a.to_dense().unwrap(), b.to_dense().unwrap());
        for x in 0..64 {
            assert_eq!(a.contains(x), b.contains(x));
        }
        assert_eq!(a.density(), ratio(20, 64));
    }

    #[test]
    fn multiset_merges_and_rejects_empty() {
        let m = GroupMultiset::from_counts(3, [(1, 2), (1, 3), (4, 0), (2, 1)]).unwrap();
        assert_eq!(m.total(), 6);
        assert_eq!(m.entries(), &[(1, 5), (2, 1)]);
        assert_eq!(m.multiplicity(4), 0);
        assert!(GroupMultiset::from_counts(3, [(1, 0)]).is_err());
        assert!(GroupMultiset::from_counts(3, [(8, 1)]).is_err());
    }

    #[test]
    fn dense_sets_are_budgeted() {
        assert!(GroupSet::full(25).is_err());
        assert!(GroupSet::from_elements(64, [u64::MAX]).is_ok());
    }
}
