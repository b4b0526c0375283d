use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::ClosednessReport;
use crate::rational::{ratio, Rational};
use crate::walsh::{ExactSum, GroupMultiset, GroupSet, Spectrum};
use crate::{Error, Result};

/// Largest `|A|·distinct(B)` counted pair by pair.
pub const PAIR_BUDGET: u128 = 1 << 36;

fn same_group(a: &GroupSet, b: &GroupMultiset) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n() as usize,
            found: b.n() as usize,
        });
    }
    Ok(())
}

/// Counts `(a, b)` with `a+b ∈ A`, each `b` weighted by its multiplicity.
pub fn closedness_exact(a: &GroupSet, b: &GroupMultiset) -> Result<ClosednessReport> {
    same_group(a, b)?;
    if a.is_empty() {
        return Err(Error::Empty("set A"));
    }
    let work = a.size() as u128 * b.distinct() as u128;
    if work > PAIR_BUDGET {
        return Err(Error::budget("closedness pairs", work, PAIR_BUDGET));
    }
    let elements = a.elements();
    let pair_count: u128 = b
        .entries()
        .par_iter()
        .map(|&(g, mult)| {
            let hits = elements.iter().filter(|&&x| a.contains(x ^ g)).count() as u128;
            hits * mult as u128
        })
        .sum();
    let eta = ratio(BigInt::from(pair_count), BigInt::from(a.size()) * BigInt::from(b.total()));
    Ok(ClosednessReport::Exact {
        eta,
        pair_count: BigInt::from(pair_count),
        a_size: a.size(),
        b_total: b.total(),
    })
}

/// `‖1_A * μ_B‖₂² = Σ_r 1̂_A(r)² μ̂_B(r)²` (expectation norms), which never
/// exceeds the density of `A`.
pub fn mixed_energy(a: &GroupSet, b: &GroupMultiset) -> Result<Rational> {
    same_group(a, b)?;
    if a.is_empty() {
        return Err(Error::Empty("set A"));
    }
    let sa = Spectrum::of_set(a)?;
    let sb = Spectrum::of_multiset(b)?;
    let mut acc = ExactSum::default();
    for (&ca, &cb) in sa.coeffs().iter().zip(sb.coeffs()) {
        let (ca, cb) = (ca as i128, cb as i128);
        acc.add_product(&[ca, ca, cb, cb]);
    }
    let total = BigInt::from(b.total());
    let energy = Rational::new(acc.value(), (BigInt::from(1) << (2 * a.n())) * &total * &total);
    if energy > a.density() {
        return Err(Error::Internal(format!(
            "mixed energy {energy} exceeds the density {}",
            a.density()
        )));
    }
    Ok(energy)
}

/// Deficits `#{a ∈ A : a+b ∉ A} / |A|` for `b₁`, `b₂` and `b₁+b₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleReport {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub deficit1: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub deficit2: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub deficit_sum: Rational,
}

fn deficit(a: &GroupSet, b: u64) -> Rational {
    let bad = a.iter().filter(|&x| !a.contains(x ^ b)).count();
    ratio(bad as u64, a.size())
}

/// Measures the three deficits and checks `deficit(b₁+b₂) ≤ deficit(b₁) + deficit(b₂)`.
pub fn triangle_compose(a: &GroupSet, b1: u64, b2: u64) -> Result<TriangleReport> {
    if a.is_empty() {
        return Err(Error::Empty("set A"));
    }
    let report = TriangleReport {
        deficit1: deficit(a, b1),
        deficit2: deficit(a, b2),
        deficit_sum: deficit(a, b1 ^ b2),
    };
    if report.deficit_sum > &report.deficit1 + &report.deficit2 {
        return Err(Error::Internal(format!(
            "deficit {} exceeds {} + {}",
            report.deficit_sum, report.deficit1, report.deficit2
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::middle_layers;
    use crate::walsh::spectral_closedness;

    #[test]
    fn whole_group_is_closed() {
        let g = GroupSet::full(5).unwrap();
        let b = GroupMultiset::from_counts(5, [(1, 3), (9, 1)]).unwrap();
        let r = closedness_exact(&g, &b).unwrap();
        assert_eq!(r.exact_eta().unwrap(), &ratio(1, 1));
        assert_eq!(mixed_energy(&g, &b).unwrap(), ratio(1, 1));
    }

    #[test]
    fn middle_layers_at_seven() {
        let a = middle_layers(7).unwrap();
        let b = GroupMultiset::standard_basis(7).unwrap();
        let r = closedness_exact(&a, &b).unwrap();
        assert_eq!(r.exact_eta().unwrap(), &ratio(4, 7));
        assert_eq!(spectral_closedness(&a, &b).unwrap(), ratio(4, 7));
    }

    #[test]
    fn coset_energy_equals_density() {
        let w = crate::gf2::Subspace::coordinate(6, [0, 2, 3]);
        let coset = crate::gf2::Coset::new(&crate::gf2::BitVector::from_index(6, 0b100010), w).unwrap();
        let a = GroupSet::from_coset(&coset).unwrap();
        let b = GroupMultiset::from_elements(6, [0b1, 0b100, 0b1101]).unwrap();
        assert_eq!(mixed_energy(&a, &b).unwrap(), a.density());
    }

    #[test]
    fn triangle_trivial_cases() {
        let w = crate::gf2::Subspace::coordinate(5, [0, 1]);
        let a = GroupSet::from_subspace(&w).unwrap();
        let r = triangle_compose(&a, 0b01, 0b10).unwrap();
        assert_eq!(r.deficit_sum, ratio(0, 1));
        let odd = GroupSet::from_elements(5, [0, 3, 7, 12, 30]).unwrap();
        let r = triangle_compose(&odd, 0b101, 0).unwrap();
        assert_eq!(r.deficit_sum, r.deficit1);
    }
}
