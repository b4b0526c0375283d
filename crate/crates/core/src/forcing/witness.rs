use crate::walsh::{check_dense_exponent, GroupSet};
use crate::Result;

const NONE: u64 = u64::MAX;

/// One representation `x = a + b` with `a, b ∈ S` for every `x ∈ S+S`.
///
/// Used as the two halves of a meet-in-the-middle search for 4-sums.
#[derive(Clone, Debug)]
pub struct PairTable {
    first: Vec<u64>,
}

impl PairTable {
    pub fn new(s: &GroupSet) -> Result<Self> {
        check_dense_exponent(s.n())?;
        let elements = s.elements();
        let first = (0..1u64 << s.n())
            .map(|x| elements.iter().copied().find(|&a| s.contains(a ^ x)).unwrap_or(NONE))
            .collect();
        Ok(PairTable { first })
    }

    pub fn pair(&self, x: u64) -> Option<(u64, u64)> {
        match self.first.get(x as usize) {
            Some(&a) if a != NONE => Some((a, a ^ x)),
            _ => None,
        }
    }

    /// `target = a + b + c + d` with all four in `S`, the first split in
    /// increasing order of `a + b`.
    pub fn four_sum(&self, target: u64) -> Option<[u64; 4]> {
        (0..self.first.len() as u64).find_map(|y| {
            let (a, b) = self.pair(y)?;
            let (c, d) = self.pair(target ^ y)?;
            Some([a, b, c, d])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_sums_cover_the_sumset() {
        let s = GroupSet::from_elements(5, [1, 2, 4, 8, 16, 3]).unwrap();
        let t = PairTable::new(&s).unwrap();
        for x in 0..32u64 {
            let brute = s.iter().any(|a| s.iter().any(|b| s.iter().any(|c| s.contains(x ^ a ^ b ^ c))));
            match t.four_sum(x) {
                Some(w) => {
                    assert!(w.iter().all(|&e| s.contains(e)));
                    assert_eq!(w.iter().fold(0, |acc, e| acc ^ e), x);
                }
                None => assert!(!brute, "{x} is a 4-sum"),
            }
        }
        assert!(t.pair(0).is_some());
    }
}
