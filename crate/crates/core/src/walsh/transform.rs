use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{PrimInt, Signed, Zero};
use rayon::prelude::*;

use super::group::check_dense_exponent;
use crate::{Error, Result};

static WHT_CALLS: AtomicU64 = AtomicU64::new(0);
static PARSEVAL_CHECKS: AtomicU64 = AtomicU64::new(0);

/// Number of transforms performed by this process.
pub fn wht_invocations() -> u64 {
    WHT_CALLS.load(Ordering::SeqCst)
}

/// Number of transforms whose Parseval check passed.
pub fn parseval_checks_passed() -> u64 {
    PARSEVAL_CHECKS.load(Ordering::SeqCst)
}

/// Integer types the transform runs on.
pub trait WhtInt: PrimInt + Signed + Send + Sync + Into<BigInt> + std::fmt::Debug {}
impl WhtInt for i64 {}
impl WhtInt for i128 {}

fn exponent_of(len: usize) -> Result<u32> {
    if !len.is_power_of_two() {
        return Err(Error::ShapeMismatch(format!("length {len} is not a power of two")));
    }
    let n = len.trailing_zeros();
    check_dense_exponent(n)?;
    Ok(n)
}

/// `coeffs[r] = Σ_x f(x)(−1)^{r·x}`, by the in-place butterfly.
///
/// Fails with an overflow error when `Σ|f|` does not fit the integer type,
/// which bounds every intermediate value. Integer Parseval
/// `Σ coeffs² = 2ⁿ Σ f²` is asserted on every call.
pub fn wht<T: WhtInt>(f: &[T]) -> Result<Vec<T>> {
    let n = exponent_of(f.len())?;
    let l1: BigInt = f.iter().map(|&v| Into::<BigInt>::into(v).abs()).sum();
    let max: BigInt = T::max_value().into();
    if l1 > max {
        return Err(Error::Overflow("transform input l1 norm exceeds the integer width"));
    }
    let mut data = f.to_vec();
    butterfly(&mut data);
    WHT_CALLS.fetch_add(1, Ordering::SeqCst);
    assert!(
        parseval_holds(n, f, &data),
        "integer Parseval identity violated by a transform of length {}",
        f.len()
    );
    PARSEVAL_CHECKS.fetch_add(1, Ordering::SeqCst);
    Ok(data)
}

fn butterfly<T: WhtInt>(data: &mut [T]) {
    let len = data.len();
    let mut h = 1;
    while h < len {
        let min_chunks = (4096 / (2 * h)).max(1);
        data.par_chunks_mut(2 * h).with_min_len(min_chunks).for_each(|chunk| {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        });
        h *= 2;
    }
}

/// Whether `Σ coeffs² = 2ⁿ Σ f²`, in checked `i128` with a `BigInt` fallback.
pub fn parseval_holds<T: WhtInt>(n: u32, f: &[T], coeffs: &[T]) -> bool {
    if f.len() != coeffs.len() {
        return false;
    }
    let lhs = sum_squares(coeffs);
    let rhs = sum_squares(f) << n;
    lhs == rhs
}

fn sum_squares<T: WhtInt>(v: &[T]) -> BigInt {
    let exact = v
        .par_chunks(1 << 12)
        .map(|chunk| {
            let mut acc: i128 = 0;
            let mut spill = BigInt::zero();
            for &x in chunk {
                let b: BigInt = x.into();
                match i128::try_from(&b).ok().and_then(|y| y.checked_mul(y)) {
                    Some(sq) => match acc.checked_add(sq) {
                        Some(s) => acc = s,
                        None => {
                            spill += BigInt::from(acc) + BigInt::from(sq);
                            acc = 0;
                        }
                    },
                    None => spill += &b * &b,
                }
            }
            spill + BigInt::from(acc)
        })
        .reduce(BigInt::zero, |a, b| a + b);
    exact
}

/// `Σ_x f(x)(−1)^{r·x}` for one `r`, by direct summation.
pub fn character_sum(f: &[i64], r: u64) -> i64 {
    f.iter()
        .enumerate()
        .map(|(x, &v)| if (r & x as u64).count_ones().is_multiple_of(2) { v } else { -v })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_at_zero_is_flat() {
        let mut f = vec![0i64; 16];
        f[0] = 1;
        assert_eq!(wht(&f).unwrap(), vec![1; 16]);
    }

    #[test]
    fn subspace_indicator() {
        // W = span{e0, e1} in F₂⁴; W⊥ = span{e2, e3}
        let w = [0u64, 1, 2, 3];
        let mut f = vec![0i64; 16];
        for &x in &w {
            f[x as usize] = 1;
        }
        let c = wht(&f).unwrap();
        for (r, &v) in c.iter().enumerate() {
            assert_eq!(v, if r & 0b11 == 0 { 4 } else { 0 });
        }
    }

    #[test]
    fn rejects_bad_lengths_and_overflow() {
        assert!(wht(&[1i64, 2, 3]).is_err());
        assert!(matches!(wht(&[i64::MAX, 1]), Err(Error::Overflow(_))));
    }

    #[test]
    fn counters_advance() {
        let before = wht_invocations();
        wht(&[1i64, 0]).unwrap();
        assert!(wht_invocations() > before);
        assert!(parseval_checks_passed() > 0);
    }

    #[test]
    fn corrupted_spectrum_fails_parseval() {
        let f = vec![1i64, 0, 1, 1];
        let mut c = wht(&f).unwrap();
        assert!(parseval_holds(2, &f, &c));
        c[1] += 2;
        assert!(!parseval_holds(2, &f, &c));
    }

    proptest! {
        #[test]
        fn matches_naive_and_inverts(n in 0u32..=10, seed in any::<u64>()) {
            let len = 1usize << n;
            let f: Vec<i64> = (0..len as u64)
                .map(|x| ((x.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ seed) >> 59) as i64 - 16)
                .collect();
            let c = wht(&f).unwrap();
            for r in 0..len as u64 {
                prop_assert_eq!(c[r as usize], character_sum(&f, r));
            }
            let back = wht(&c).unwrap();
            for x in 0..len {
                prop_assert_eq!(back[x], f[x] << n);
            }
        }

        #[test]
        fn i128_agrees_with_i64(n in 0u32..=8, seed in any::<u64>()) {
            let len = 1usize << n;
            let f: Vec<i64> = (0..len as u64).map(|x| ((x ^ seed).count_ones() % 3) as i64).collect();
            let wide: Vec<i128> = f.iter().map(|&v| v as i128).collect();
            let a = wht(&f).unwrap();
            let b = wht(&wide).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(&x, &y)| x as i128 == y));
        }
    }
}
