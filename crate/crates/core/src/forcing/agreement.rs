use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::gf2::{PackedBasis, Subspace};
use crate::rational::Rational;
use crate::tensor::{Tensor, TensorShape};
use crate::walsh::{GroupMultiset, Spectrum};
use crate::{Error, Result};

/// Default largest `Σ nᵢ` for a full agreement profile.
pub const PROFILE_EXPONENT_LIMIT: u32 = 20;

/// `counts[r] = #{q ∈ Q : r·q = 0}` with multiplicity, for every `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementProfile {
    shape: TensorShape,
    total: u64,
    counts: Vec<u64>,
}

pub fn agreement_profile(q: &GroupMultiset, shape: &TensorShape) -> Result<AgreementProfile> {
    agreement_profile_with_limit(q, shape, PROFILE_EXPONENT_LIMIT)
}

/// One transform of the multiplicities: `counts[r] = (|Q| + Σ_q mult(q)(−1)^{r·q}) / 2`.
pub fn agreement_profile_with_limit(q: &GroupMultiset, shape: &TensorShape, max_exponent: u32) -> Result<AgreementProfile> {
    let n = shape.total() as u32;
    if q.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n as usize,
            found: q.n() as usize,
        });
    }
    if n > max_exponent {
        return Err(Error::budget("agreement profile exponent", n, max_exponent));
    }
    let spec = Spectrum::of_multiset(q)?;
    let total = q.total();
    let counts = spec
        .coeffs()
        .iter()
        .map(|&c| {
            let twice = total as i128 + c as i128;
            debug_assert!(twice >= 0 && twice % 2 == 0);
            (twice / 2) as u64
        })
        .collect();
    let p = AgreementProfile {
        shape: shape.clone(),
        total,
        counts,
    };
    if p.counts[0] != total {
        return Err(Error::Internal(format!("agreement of 0 is {} not {total}", p.counts[0])));
    }
    Ok(p)
}

/// Direct double loop, kept as an independent route.
pub fn agreement_naive(q: &GroupMultiset, r: u64) -> u64 {
    q.entries()
        .iter()
        .filter(|&&(x, _)| (x & r).count_ones().is_multiple_of(2))
        .map(|&(_, m)| m)
        .sum()
}

/// `count ≥ α·total` exactly.
pub(crate) fn meets(count: u64, total: u64, alpha: &Rational) -> bool {
    BigInt::from(count) * alpha.denom() >= BigInt::from(total) * alpha.numer()
}

impl AgreementProfile {
    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    /// `|Q|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, r: u64) -> u64 {
        self.counts[r as usize]
    }

    /// `{r : counts[r] ≥ α|Q|}` in increasing order.
    pub fn agreement_set(&self, alpha: &Rational) -> Vec<u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| meets(c, self.total, alpha))
            .map(|(r, _)| r as u64)
            .collect()
    }

    /// `(agreement count, number of r)` pairs, increasing.
    pub fn histogram(&self) -> Vec<(u64, u64)> {
        let mut h: BTreeMap<u64, u64> = BTreeMap::new();
        for &c in &self.counts {
            *h.entry(c).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// RFC 4180 rows `agreement,arrays`.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("agreement,arrays\r\n");
        for (c, k) in self.histogram() {
            s.push_str(&format!("{c},{k}\r\n"));
        }
        s
    }
}

/// `Σ_I V_I ⊗ F₂^{I^c}` as a subspace of the flattened space.
pub fn blowup_sum(shape: &TensorShape, spaces: &BTreeMap<Vec<usize>, Subspace>) -> Result<Subspace> {
    let mut basis = Vec::new();
    for (axes, v) in spaces {
        if axes.is_empty() {
            return Err(Error::ShapeMismatch("the empty axis set carries no space".into()));
        }
        let split = shape.split(axes)?;
        if v.ambient_dim() != split.inner_total() {
            return Err(Error::DimensionMismatch {
                expected: split.inner_total(),
                found: v.ambient_dim(),
            });
        }
        for b in v.basis() {
            for j in 0..split.outer_total() {
                basis.push(Tensor::embed(shape, &split, b, j).into_data());
            }
        }
    }
    crate::gf2::rref(shape.total(), &basis)
}

/// Evidence that the `α`-agreement set of `Q` lies in `Σ_I V_I ⊗ F₂^{I^c}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcingCertificate {
    pub q_total: u64,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub alpha: Rational,
    #[serde(serialize_with = "serialize_spaces")]
    pub spaces: BTreeMap<Vec<usize>, Subspace>,
    /// Largest `dim V_I`.
    pub k: usize,
    pub agreement_size: u64,
    pub verified: bool,
    /// An agreeing array outside the sum, when not verified.
    #[serde(serialize_with = "serialize_opt_hex")]
    pub counterexample: Option<u64>,
}

pub(crate) fn serialize_spaces<S: serde::Serializer>(
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

fn serialize_opt_hex<S: serde::Serializer>(v: &Option<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&format!("{x:x}")),
        None => s.serialize_none(),
    }
}

/// Checks every `r` with `counts[r] ≥ α|Q|` against the orthogonal
/// description of the sum: `r` is in it iff `r·c = 0` for each constraint `c`.
pub fn check_forcing(
    profile: &AgreementProfile,
    alpha: &Rational,
    spaces: &BTreeMap<Vec<usize>, Subspace>,
) -> Result<ForcingCertificate> {
    let sum = blowup_sum(&profile.shape, spaces)?;
    let constraints: Vec<u64> = sum.orthogonal_complement().basis_indices();
    let set = profile.agreement_set(alpha);
    let counterexample = set
        .iter()
        .copied()
        .find(|&r| constraints.iter().any(|&c| (r & c).count_ones() % 2 == 1));
    Ok(ForcingCertificate {
        q_total: profile.total,
        alpha: alpha.clone(),
        spaces: spaces.clone(),
        k: spaces.values().map(Subspace::dim).max().unwrap_or(0),
        agreement_size: set.len() as u64,
        verified: counterexample.is_none(),
        counterexample,
    })
}

/// Re-derives a certificate from scratch with a different membership route
/// (a packed basis of the sum) and reports whether it agrees.
pub fn reverify(profile: &AgreementProfile, cert: &ForcingCertificate) -> Result<bool> {
    let sum = blowup_sum(&profile.shape, &cert.spaces)?;
    let basis = PackedBasis::from_subspace(&sum);
    let set = profile.agreement_set(&cert.alpha);
    let first_out = set.iter().copied().find(|&r| !basis.contains(r));
    Ok(first_out == cert.counterexample && set.len() as u64 == cert.agreement_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::sample_stream;
    use crate::rational::ratio;
    use crate::tensor::full_spaces;
    use rand::Rng;

    fn shape(d: &[usize]) -> TensorShape {
        TensorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn zero_multiset_agrees_everywhere() {
        let s = shape(&[3, 3]);
        let q = GroupMultiset::from_counts(9, [(0, 5)]).unwrap();
        let p = agreement_profile(&q, &s).unwrap();
        assert!(p.counts().iter().all(|&c| c == 5));
        let proper = BTreeMap::from([(vec![0], Subspace::zero(3))]);
        assert!(!check_forcing(&p, &ratio(1, 2), &proper).unwrap().verified);
        assert!(check_forcing(&p, &ratio(1, 2), &full_spaces(&s)).unwrap().verified);
    }

    #[test]
    fn subspace_profile_is_two_valued() {
        let s = shape(&[6]);
        let u = Subspace::from_indices(6, &[0b000011, 0b001100, 0b110001]);
        let q = GroupMultiset::from_elements(6, u.enumerate_indices().unwrap()).unwrap();
        let p = agreement_profile(&q, &s).unwrap();
        let perp = u.orthogonal_complement();
        for r in 0..64 {
            let want = if perp.contains(&crate::gf2::BitVector::from_index(6, r)) { 8 } else { 4 };
            assert_eq!(p.count(r), want);
        }
        let cert = check_forcing(&p, &ratio(3, 4), &BTreeMap::from([(vec![0], perp.clone())])).unwrap();
        assert!(cert.verified);
        assert_eq!(cert.agreement_size, 8);
        assert!(reverify(&p, &cert).unwrap());
    }

    #[test]
    fn transform_matches_double_loop() {
        let s = shape(&[3, 3]);
        let mut rng = sample_stream(11, 0);
        for _ in 0..20 {
            let q = GroupMultiset::from_counts(9, (0..30).map(|_| (rng.random_range(0..512), rng.random_range(1..4)))).unwrap();
            let p = agreement_profile(&q, &s).unwrap();
            for r in 0..512 {
                assert_eq!(p.count(r), agreement_naive(&q, r));
            }
            let spaces = BTreeMap::from([(vec![1], Subspace::from_indices(3, &[0b101]))]);
            let cert = check_forcing(&p, &ratio(2, 3), &spaces).unwrap();
            assert!(reverify(&p, &cert).unwrap());
        }
    }

    #[test]
    fn profile_is_budgeted() {
        let s = shape(&[3, 7]);
        let q = GroupMultiset::from_elements(21, [1]).unwrap();
        assert!(matches!(agreement_profile(&q, &s), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn histogram_counts_every_array() {
        let s = shape(&[2, 2]);
        let q = GroupMultiset::from_elements(4, [1, 2, 6]).unwrap();
        let p = agreement_profile(&q, &s).unwrap();
        assert_eq!(p.histogram().iter().map(|&(_, k)| k).sum::<u64>(), 16);
        assert!(p.histogram_csv().starts_with("agreement,arrays\r\n"));
    }
}
