use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::walsh::{check_exponent, mask, GroupMultiset, GroupSet};
use crate::{Error, Result};

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// `C(n, k)` for the `n ≤ 64` range where it fits.
fn binomial_u128(n: u32, k: u32) -> u128 {
    binomial(n as u64, k as u64).to_u128().expect("C(n,k) < 2^64 for n ≤ 64")
}

fn random_support<R: Rng + ?Sized>(rng: &mut R, n: u32, w: u32) -> u64 {
    rand::seq::index::sample(rng, n as usize, w as usize)
        .iter()
        .fold(0u64, |x, i| x | 1 << i)
}

/// Vectors of `F₂ⁿ` with weight in `lo..=hi`; membership and sizes work for
/// any `n`, elements and sampling need `n ≤ 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LayerSet {
    pub n: u32,
    pub lo: u32,
    pub hi: u32,
}

impl LayerSet {
    pub fn new(n: u32, lo: u32, hi: u32) -> Result<Self> {
        if lo > hi || hi > n {
            return Err(Error::Precondition(format!("weights {lo}..={hi} invalid for n = {n}")));
        }
        Ok(LayerSet { n, lo, hi })
    }

    /// `{|v| ≤ n/2 − c·n^{3/4}}`.
    pub fn scaled(n: u32, c: f64) -> Result<Self> {
        let nf = n as f64;
        let bound = nf / 2.0 - c * nf.powf(0.75);
        if bound.is_nan() || bound < 0.0 {
            return Err(Error::Precondition(format!("n/2 − {c}·n^(3/4) < 0 at n = {n}")));
        }
        LayerSet::new(n, 0, bound.floor() as u32)
    }

    pub fn weights(&self) -> std::ops::RangeInclusive<u32> {
        self.lo..=self.hi
    }

    /// `Σ_{w=lo}^{hi} C(n,w)`.
    pub fn size(&self) -> BigUint {
        self.weights().map(|w| binomial(self.n as u64, w as u64)).sum()
    }

    pub fn contains_weight(&self, w: u32) -> bool {
        self.weights().contains(&w)
    }

    pub fn contains(&self, x: u64) -> bool {
        x & !mask(self.n) == 0 && self.contains_weight(x.count_ones())
    }

    pub fn to_group_set(&self) -> Result<GroupSet> {
        GroupSet::from_predicate(self.n, |x| self.contains_weight(x.count_ones()))
    }

    /// A uniform element: a weight drawn with probability `C(n,w)/size`, then
    /// a uniform support of that weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        Ok(self.sampler()?.sample(rng))
    }

    /// Precomputes the weight distribution for repeated sampling.
    pub fn sampler(&self) -> Result<LayerSampler> {
        check_exponent(self.n)?;
        let mut acc = 0u128;
        let cumulative = self
            .weights()
            .map(|w| {
                acc += binomial_u128(self.n, w);
                (w, acc)
            })
            .collect();
        Ok(LayerSampler { n: self.n, cumulative })
    }
}

/// Uniform sampler over a [`LayerSet`]; `cumulative` holds running sizes.
#[derive(Clone, Debug)]
pub struct LayerSampler {
    n: u32,
    cumulative: Vec<(u32, u128)>,
}

impl LayerSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = self.cumulative.last().expect("lo <= hi").1;
        let t = rng.random_range(0..total);
        let i = self.cumulative.partition_point(|&(_, c)| c <= t);
        random_support(rng, self.n, self.cumulative[i].0)
    }
}

/// The slice `{|v| = w}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SliceSet {
    pub n: u32,
    pub w: u32,
}

impl SliceSet {
    pub fn new(n: u32, w: u32) -> Result<Self> {
        if w > n {
            return Err(Error::Precondition(format!("weight {w} exceeds n = {n}")));
        }
        Ok(SliceSet { n, w })
    }

    /// Weight `round(√n)`.
    pub fn root(n: u32) -> Result<Self> {
        SliceSet::new(n, (n as f64).sqrt().round() as u32)
    }

    pub fn size(&self) -> BigUint {
        binomial(self.n as u64, self.w as u64)
    }

    pub fn contains(&self, x: u64) -> bool {
        x & !mask(self.n) == 0 && x.count_ones() == self.w
    }

    pub fn as_layers(&self) -> LayerSet {
        LayerSet {
            n: self.n,
            lo: self.w,
            hi: self.w,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        check_exponent(self.n)?;
        Ok(random_support(rng, self.n, self.w))
    }

    /// All elements in increasing order, refused beyond `limit`.
    pub fn elements(&self, limit: u64) -> Result<Vec<u64>> {
        check_exponent(self.n)?;
        let size = self.size();
        if size > BigUint::from(limit) {
            return Err(Error::budget("slice elements", size.to_u128().unwrap_or(u128::MAX), limit));
        }
        if self.w == 0 {
            return Ok(vec![0]);
        }
        let mut out = Vec::with_capacity(size.to_usize().unwrap_or(0));
        let last = mask(self.n) & !mask(self.n - self.w);
        let mut x = mask(self.w);
        loop {
            out.push(x);
            if x == last {
                break;
            }
            // Gosper's hack: next integer with the same popcount.
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
        Ok(out)
    }

    pub fn to_multiset(&self, limit: u64) -> Result<GroupMultiset> {
        GroupMultiset::from_elements(self.n, self.elements(limit)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::sample_stream;
    use proptest::prelude::*;

    fn pascal(n: usize) -> Vec<Vec<BigUint>> {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::from(1u32)]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![BigUint::from(1u32); i + 1];
            for k in 1..i {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn sizes_match_pascal() {
        let p = pascal(120);
        for n in [0u32, 1, 7, 36, 64, 100, 120] {
            for lo in 0..=n.min(12) {
                for hi in [lo, n / 2, n] {
                    if hi < lo {
                        continue;
                    }
                    let l = LayerSet::new(n, lo, hi).unwrap();
                    let want: BigUint = (lo..=hi).map(|w| p[n as usize][w as usize].clone()).sum();
                    assert_eq!(l.size(), want);
                }
            }
        }
    }

    #[test]
    fn slice_elements_are_the_slice() {
        let s = SliceSet::new(10, 3).unwrap();
        let e = s.elements(1000).unwrap();
        assert_eq!(e.len(), 120);
        assert!(e.windows(2).all(|p| p[0] < p[1]));
        assert!(e.iter().all(|&x| s.contains(x)));
        assert_eq!(SliceSet::new(64, 64).unwrap().elements(10).unwrap(), vec![u64::MAX]);
        assert!(SliceSet::new(64, 8).unwrap().elements(1000).is_err());
    }

    #[test]
    fn scaled_layers() {
        assert_eq!(LayerSet::scaled(64, 0.1).unwrap().hi, 29);
        assert_eq!(SliceSet::root(49).unwrap().w, 7);
        assert!(LayerSet::scaled(16, 10.0).is_err());
    }

    #[test]
    fn layer_sampling_is_uniform_over_weights() {
        // n = 6, weights 0..=2: sizes 1, 6, 15 out of 22.
        let l = LayerSet::new(6, 0, 2).unwrap();
        let mut counts = [0u32; 3];
        for i in 0..22_000 {
            let x = l.sample(&mut sample_stream(3, i)).unwrap();
            assert!(l.contains(x));
            counts[x.count_ones() as usize] += 1;
        }
        assert!((counts[2] as f64 / 22_000.0 - 15.0 / 22.0).abs() < 0.015);
        assert!((counts[0] as f64 / 22_000.0 - 1.0 / 22.0).abs() < 0.006);
    }

    proptest! {
        #[test]
        fn large_n_sampling_stays_in_range(n in 1u32..=64, a in 0u32..=64, b in 0u32..=64, seed: u64) {
            let (lo, hi) = (a.min(b).min(n), a.max(b).min(n));
            let l = LayerSet::new(n, lo, hi).unwrap();
            let x = l.sample(&mut sample_stream(seed, 0)).unwrap();
            prop_assert!(l.contains(x));
        }
    }
}
