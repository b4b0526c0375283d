use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::binomial;
use crate::rational::{ratio, Rational};
use crate::walsh::{mu_hat, GroupMultiset};
use crate::{Error, Result};

/// `K_w(x; n) = Σ_j (−1)^j C(x,j) C(n−x, w−j)`: the character sum of the
/// weight-`w` slice at any point of weight `x`.
pub fn krawtchouk(n: u32, w: u32, x: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=w.min(x) {
        let t = BigInt::from(binomial(x as u64, j as u64) * binomial((n - x) as u64, (w - j) as u64));
        if j % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// `μ̂_B(u)` for the full weight-`w` slice `B` and `|u| = u_weight`.
pub fn slice_mu_hat(n: u32, w: u32, u_weight: u32) -> Result<Rational> {
    if w > n || u_weight > n {
        return Err(Error::Precondition(format!(
            "weights w = {w}, |u| = {u_weight} must not exceed n = {n}"
        )));
    }
    Ok(ratio(krawtchouk(n, w, u_weight), BigInt::from(binomial(n as u64, w as u64))))
}

/// Points `u` with `μ̂_{B′}(u) ≥ threshold`, from the exact transform.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Concentration {
    pub count: u64,
    pub elements: Vec<u64>,
}

fn at_least(num: &BigInt, den: &BigInt, threshold: &Rational) -> bool {
    // den > 0 and threshold has a positive denominator
    num * threshold.denom() >= threshold.numer() * den
}

pub fn fourier_concentration(b: &GroupMultiset, threshold: &Rational) -> Result<Concentration> {
    let mh = mu_hat(b)?;
    let total = BigInt::from(mh.total());
    let elements: Vec<u64> = mh
        .numerators()
        .iter()
        .enumerate()
        .filter(|&(_, &c)| at_least(&BigInt::from(c), &total, threshold))
        .map(|(r, _)| r as u64)
        .collect();
    Ok(Concentration {
        count: elements.len() as u64,
        elements,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceSpectrumRow {
    pub u_weight: u32,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub mu_hat: Rational,
    #[serde(serialize_with = "crate::hamming::serialize_biguint")]
    pub multiplicity: BigUint,
    pub above: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceConcentration {
    pub n: u32,
    pub w: u32,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub threshold: Rational,
    #[serde(serialize_with = "crate::hamming::serialize_biguint")]
    pub count: BigUint,
    pub rows: Vec<SliceSpectrumRow>,
}

impl SliceConcentration {
    /// RFC 4180 rows `u_weight,mu_hat_num,mu_hat_den,multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u_weight,mu_hat_num,mu_hat_den,multiplicity\r\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\r\n",
                r.u_weight,
                r.mu_hat.numer(),
                r.mu_hat.denom(),
                r.multiplicity
            ));
        }
        s
    }
}

/// The count for a full slice, any `n`: every dual weight is evaluated once
/// and weighted by `C(n, u_weight)`.
pub fn slice_concentration(n: u32, w: u32, threshold: &Rational) -> Result<SliceConcentration> {
    let rows: Vec<SliceSpectrumRow> = (0..=n)
        .into_par_iter()
        .map(|x| -> Result<SliceSpectrumRow> {
            let mu = slice_mu_hat(n, w, x)?;
            Ok(SliceSpectrumRow {
                u_weight: x,
                above: &mu >= threshold,
                mu_hat: mu,
                multiplicity: binomial(n as u64, x as u64),
            })
        })
        .collect::<Result<_>>()?;
    let count = rows.iter().filter(|r| r.above).map(|r| r.multiplicity.clone()).sum();
    Ok(SliceConcentration {
        n,
        w,
        threshold: threshold.clone(),
        count,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamming::SliceSet;
    use crate::rational::{int, parse};

    #[test]
    fn small_closed_forms() {
        for n in 1..20u32 {
            for x in 0..=n {
                assert_eq!(slice_mu_hat(n, 0, x).unwrap(), int(1));
                assert_eq!(slice_mu_hat(n, 1, x).unwrap(), ratio(n as i64 - 2 * x as i64, n as i64));
            }
            assert_eq!(slice_mu_hat(n, 3.min(n), 0).unwrap(), int(1));
        }
        assert!(slice_mu_hat(4, 5, 0).is_err());
    }

    #[test]
    fn matches_transform_at_ten() {
        let n = 10;
        let b = SliceSet::new(n, 3).unwrap().to_multiset(1 << 10).unwrap();
        let mh = mu_hat(&b).unwrap();
        for r in 0..(1u64 << n) {
            assert_eq!(mh.get(r), slice_mu_hat(n, 3, r.count_ones()).unwrap());
        }
    }

    #[test]
    fn point_mass_concentrates_everywhere() {
        let b = GroupMultiset::from_elements(6, [0]).unwrap();
        assert_eq!(fourier_concentration(&b, &int(1)).unwrap().count, 64);
        let sc = slice_concentration(6, 0, &int(1)).unwrap();
        assert_eq!(sc.count, BigUint::from(64u32));
    }

    #[test]
    fn slice_route_matches_dense_route() {
        let t = parse("0.5").unwrap();
        for w in 0..=8 {
            let b = SliceSet::new(8, w).unwrap().to_multiset(256).unwrap();
            let dense = fourier_concentration(&b, &t).unwrap();
            let sweep = slice_concentration(8, w, &t).unwrap();
            assert_eq!(BigUint::from(dense.count), sweep.count);
        }
    }
}
