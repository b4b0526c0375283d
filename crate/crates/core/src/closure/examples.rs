use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gf2::BitVector;
use crate::walsh::{mask, GroupSet};
use crate::{Error, Result};

/// Vectors of `F₂ⁿ` whose weight is one of `weights`.
pub fn layers(n: u32, weights: &[u32]) -> Result<GroupSet> {
    GroupSet::from_predicate(n, |x| weights.contains(&x.count_ones()))
}

/// The two middle layers `{|v| = (n±1)/2}` for odd `n`.
pub fn middle_layers(n: u32) -> Result<GroupSet> {
    if n.is_multiple_of(2) {
        return Err(Error::Precondition(format!("middle layers need odd n, got {n}")));
    }
    layers(n, &[(n - 1) / 2, n.div_ceil(2)])
}

/// `{|v| ≤ w}`.
pub fn at_most_weight(n: u32, w: u32) -> Result<GroupSet> {
    GroupSet::from_predicate(n, |x| x.count_ones() <= w)
}

/// Vectors supported on the first `m` coordinates with weight in `weights`.
pub fn layer_prefix_set(n: u32, m: u32, weights: &[u32]) -> Result<GroupSet> {
    if m > n {
        return Err(Error::Precondition(format!("prefix length {m} exceeds n = {n}")));
    }
    let outside = mask(n) & !mask(m);
    GroupSet::from_predicate(n, |x| x & outside == 0 && weights.contains(&x.count_ones()))
}

/// A union of cosets `t_i + V_i`, each `V_i` spanned by its own group of
/// coordinate vectors, the groups pairwise disjoint.
#[derive(Clone, Debug, Serialize)]
pub struct TranslateFixture {
    pub n: u32,
    pub groups: Vec<Vec<usize>>,
    #[serde(serialize_with = "hex_list")]
    pub translates: Vec<u64>,
    /// Draws rejected before the cosets came out separated.
    pub attempts: u32,
    pub set: GroupSet,
}

fn hex_list<S: serde::Serializer>(v: &[u64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&format!("{x:#x}"))?;
    }
    seq.end()
}

fn group_mask(g: &[usize]) -> u64 {
    g.iter().fold(0, |m, &j| m | 1 << j)
}

/// True when no two cosets meet and no basis step from one coset lands in
/// another, so that each step leaves `A` unless it moves inside its own group.
pub fn cosets_separated(n: u32, groups: &[Vec<usize>], translates: &[u64]) -> bool {
    let masks: Vec<u64> = groups.iter().map(|g| group_mask(g)).collect();
    for i in 0..groups.len() {
        for k in 0..groups.len() {
            if i == k {
                continue;
            }
            // t_i + V_i + s meets t_k + V_k iff t_i + t_k + s ∈ V_i + V_k.
            let free = !(masks[i] | masks[k]);
            let diff = translates[i] ^ translates[k];
            if i < k && diff & free == 0 {
                return false;
            }
            if (0..n).any(|j| (diff ^ 1 << j) & free == 0) {
                return false;
            }
        }
    }
    true
}

const FIXTURE_ATTEMPTS: u32 = 10_000;

/// `count` cosets of spans of `⌊n/3⌋` coordinate vectors, with groups drawn
/// as disjoint random blocks and translates redrawn until the cosets are
/// separated.
pub fn random_translate_union(n: u32, count: usize, seed: u64) -> Result<TranslateFixture> {
    let size = (n / 3) as usize;
    if size == 0 || count == 0 || count * size > n as usize {
        return Err(Error::Precondition(format!(
            "{count} disjoint groups of {size} coordinates do not fit in n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<usize> = (0..n as usize).collect();
    coords.shuffle(&mut rng);
    let groups: Vec<Vec<usize>> = coords
        .chunks(size)
        .take(count)
        .map(|c| {
            let mut g = c.to_vec();
            g.sort_unstable();
            g
        })
        .collect();
    for attempts in 1..=FIXTURE_ATTEMPTS {
        // Translates are reduced modulo their own group so each is canonical.
        let translates: Vec<u64> = groups
            .iter()
            .map(|g| rng.random::<u64>() & mask(n) & !group_mask(g))
            .collect();
        if cosets_separated(n, &groups, &translates) {
            let mut elements = Vec::new();
            for (g, &t) in groups.iter().zip(&translates) {
                let m = group_mask(g);
                // Enumerate the submasks of m.
                let mut s = m;
                loop {
                    elements.push(t ^ s);
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & m;
                }
            }
            let set = GroupSet::from_elements(n, elements)?;
            debug_assert_eq!(set.size(), (count as u64) << size);
            return Ok(TranslateFixture {
                n,
                groups,
                translates,
                attempts,
                set,
            });
        }
    }
    Err(Error::budget("separated translate draws", FIXTURE_ATTEMPTS, FIXTURE_ATTEMPTS))
}

impl TranslateFixture {
    pub fn translate_vectors(&self) -> Vec<BitVector> {
        self.translates.iter().map(|&t| BitVector::from_index(self.n as usize, t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closedness_exact;
    use crate::rational::ratio;
    use crate::walsh::GroupMultiset;

    #[test]
    fn layer_sizes() {
        assert_eq!(middle_layers(7).unwrap().size(), 70);
        assert_eq!(at_most_weight(6, 2).unwrap().size(), 22);
        assert_eq!(layer_prefix_set(10, 4, &[2]).unwrap().size(), 6);
        assert!(middle_layers(8).is_err());
    }

    #[test]
    fn translate_fixture_is_one_third_closed() {
        let b = GroupMultiset::standard_basis(12).unwrap();
        for seed in 0..5 {
            let f = random_translate_union(12, 3, seed).unwrap();
            assert_eq!(f.set.size(), 3 * 16);
            let eta = closedness_exact(&f.set, &b).unwrap();
            assert_eq!(eta.exact_eta().unwrap(), &ratio(1, 3));
        }
    }

    #[test]
    fn overlapping_translates_are_rejected() {
        let groups = vec![vec![0, 1], vec![2, 3]];
        assert!(!cosets_separated(6, &groups, &[0, 0]));
        assert!(!cosets_separated(6, &groups, &[0, 0b010000]));
        assert!(cosets_separated(6, &groups, &[0, 0b110000]));
    }
}
