use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{binomial, LayerSet, SliceSet};
use crate::closure::sample_stream;
use crate::hamming::RadiusKind;
use crate::rational::{ratio, Rational};
use crate::{Error, Result};

/// `|u+w| ≤ |u|` by the definition.
pub fn weight_nonincreasing(u: u64, w: u64) -> bool {
    (u ^ w).count_ones() <= u.count_ones()
}

/// `|u+w| ≤ |u|` rewritten as `u·w ≥ |w|/2` with the dot product over ℤ.
pub fn integer_dot_condition(u: u64, w: u64) -> bool {
    2 * (u & w).count_ones() >= w.count_ones()
}

/// A subset `B′` of a slice: the whole slice (handled per weight, any `n`)
/// or an explicit list (`n ≤ 64`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SliceSubset {
    Full(SliceSet),
    Explicit { n: u32, w: u32, elements: Vec<u64> },
}

impl SliceSubset {
    pub fn explicit(n: u32, w: u32, mut elements: Vec<u64>) -> Result<Self> {
        let slice = SliceSet::new(n, w)?;
        if let Some(&x) = elements.iter().find(|&&x| !slice.contains(x)) {
            return Err(Error::Precondition(format!("{x:#x} is not in the weight-{w} slice of F₂^{n}")));
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(SliceSubset::Explicit { n, w, elements })
    }

    pub fn n(&self) -> u32 {
        match self {
            SliceSubset::Full(s) => s.n,
            SliceSubset::Explicit { n, .. } => *n,
        }
    }

    pub fn size(&self) -> BigUint {
        match self {
            SliceSubset::Full(s) => s.size(),
            SliceSubset::Explicit { elements, .. } => BigUint::from(elements.len()),
        }
    }

    /// `#{w ∈ B′ : |u+w| ≤ |u|}`.
    pub fn good_count(&self, u: u64) -> BigUint {
        match self {
            SliceSubset::Full(s) => slice_good_count(s.n, s.w, u.count_ones()),
            SliceSubset::Explicit { elements, .. } => {
                BigUint::from(elements.iter().filter(|&&w| integer_dot_condition(u, w)).count())
            }
        }
    }

    /// At least a third of `B′` does not increase the weight of `u`.
    pub fn is_compatible(&self, u: u64) -> bool {
        self.good_count(u) * 3u32 >= self.size()
    }
}

/// For `|u| = a`: `Σ_{2j ≥ w} C(a,j)·C(n−a, w−j)`, counting `w`-subsets that
/// meet the support of `u` in at least half their points.
pub fn slice_good_count(n: u32, w: u32, a: u32) -> BigUint {
    (w.div_ceil(2)..=w.min(a))
        .map(|j| binomial(a as u64, j as u64) * binomial((n - a) as u64, (w - j) as u64))
        .sum()
}

/// Whether points of weight `a` are compatible with the full slice.
pub fn slice_compatible_weight(s: &SliceSet, a: u32) -> bool {
    slice_good_count(s.n, s.w, a) * 3u32 >= s.size()
}

/// Exact fraction of `A′` compatible with the full slice, by weight classes.
pub fn compatibility_exact(a: &LayerSet, b: &SliceSet) -> Result<Rational> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n as usize,
            found: b.n as usize,
        });
    }
    let good: BigUint = a
        .weights()
        .filter(|&x| slice_compatible_weight(b, x))
        .map(|x| binomial(a.n as u64, x as u64))
        .sum();
    Ok(ratio(BigInt::from(good), BigInt::from(a.size())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityEstimate {
    pub n: u32,
    pub estimate: f64,
    pub hits: u64,
    pub samples: u64,
    pub radius: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

/// Monte Carlo fraction of `u ∈ A′` that are `B′`-compatible; each sampled
/// `u` is judged exactly.
pub fn compatibility_fraction(
    a: &LayerSet,
    b: &SliceSubset,
    u_samples: u64,
    seed: u64,
    confidence: f64,
    radius_kind: RadiusKind,
) -> Result<CompatibilityEstimate> {
    if a.n != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n as usize,
            found: b.n() as usize,
        });
    }
    if b.size().is_zero() {
        return Err(Error::Empty("B′"));
    }
    if u_samples == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    // Full slices depend only on |u|; tabulate once.
    let by_weight: Option<Vec<bool>> = match b {
        SliceSubset::Full(s) => Some((0..=a.n).map(|x| slice_compatible_weight(s, x)).collect()),
        SliceSubset::Explicit { .. } => None,
    };
    let sampler = a.sampler()?;
    let hits: u64 = (0..u_samples)
        .into_par_iter()
        .map(|i| {
            let u = sampler.sample(&mut sample_stream(seed, i));
            let ok = match &by_weight {
                Some(t) => t[u.count_ones() as usize],
                None => b.is_compatible(u),
            };
            u64::from(ok)
        })
        .sum();
    let estimate = hits as f64 / u_samples as f64;
    let radius = radius_kind.radius(u_samples, confidence)?;
    Ok(CompatibilityEstimate {
        n: a.n,
        estimate,
        hits,
        samples: u_samples,
        radius,
        ci_lo: (estimate - radius).max(0.0),
        ci_hi: (estimate + radius).min(1.0),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn trivial_points() {
        let b = SliceSubset::Full(SliceSet::new(16, 4).unwrap());
        assert!(!b.is_compatible(0));
        assert!(b.is_compatible(0xffff));
        let e = SliceSubset::explicit(16, 4, vec![0b1111, 0b1111_0000]).unwrap();
        assert!(!e.is_compatible(0));
        assert!(e.is_compatible(0xffff));
        assert!(SliceSubset::explicit(16, 4, vec![0b111]).is_err());
    }

    #[test]
    fn full_slice_count_matches_scan() {
        let s = SliceSet::new(12, 4).unwrap();
        let elements = s.elements(1 << 12).unwrap();
        let explicit = SliceSubset::explicit(12, 4, elements).unwrap();
        let full = SliceSubset::Full(s);
        for u in 0..(1u64 << 12) {
            assert_eq!(full.good_count(u), explicit.good_count(u));
        }
    }

    #[test]
    fn sampled_fraction_brackets_exact() {
        let a = LayerSet::scaled(36, 0.1).unwrap();
        let s = SliceSet::root(36).unwrap();
        let exact = to_f64(&compatibility_exact(&a, &s).unwrap());
        let est = compatibility_fraction(&a, &SliceSubset::Full(s), 20_000, 9, 0.999, RadiusKind::Hoeffding).unwrap();
        assert!(est.ci_lo <= exact && exact <= est.ci_hi, "{exact} vs {est:?}");
    }

    #[test]
    fn explicit_and_full_routes_agree_on_small_slice() {
        let a = LayerSet::new(10, 0, 5).unwrap();
        let s = SliceSet::new(10, 3).unwrap();
        let e = SliceSubset::explicit(10, 3, s.elements(1000).unwrap()).unwrap();
        let f = SliceSubset::Full(s);
        let x = compatibility_fraction(&a, &e, 2000, 1, 0.99, RadiusKind::Hoeffding).unwrap();
        let y = compatibility_fraction(&a, &f, 2000, 1, 0.99, RadiusKind::Hoeffding).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn integer_dot_reformulation_on_random_pairs() {
        for n in [1u32, 7, 16, 33, 64] {
            let mut rng = sample_stream(n as u64, 0);
            let m = crate::walsh::mask(n);
            for _ in 0..10_000 {
                let (u, w) = (rng.random::<u64>() & m, rng.random::<u64>() & m);
                assert_eq!(weight_nonincreasing(u, w), integer_dot_condition(u, w));
            }
        }
    }

    proptest! {
        #[test]
        fn reformulation_holds(u: u64, w: u64) {
            prop_assert_eq!(weight_nonincreasing(u, w), integer_dot_condition(u, w));
        }
    }
}
