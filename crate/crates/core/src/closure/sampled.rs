use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use super::ClosednessReport;
use crate::hamming::RadiusKind;
use crate::walsh::GroupMultiset;
use crate::{Error, Result};

/// The random stream for sample `index`: the same bits whatever thread draws it.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws elements of a multiset with probability proportional to multiplicity.
#[derive(Clone, Debug)]
pub struct MultisetSampler {
    elements: Vec<u64>,
    alias: WeightedAliasIndex<u64>,
}

impl MultisetSampler {
    pub fn new(b: &GroupMultiset) -> Result<Self> {
        let elements = b.entries().iter().map(|&(x, _)| x).collect();
        let weights = b.entries().iter().map(|&(_, c)| c).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::Internal(format!("alias table: {e}")))?;
        Ok(MultisetSampler { elements, alias })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.elements[self.alias.sample(rng)]
    }
}

/// Monte Carlo estimate of the closedness of `A` under `B`.
///
/// Sample `i` draws `a` from `a_sampler` and `b` from `B` using stream `i` of
/// the seeded generator, so the result does not depend on the worker count.
pub fn closedness_sampled<M, S>(
    member: M,
    a_sampler: S,
    b: &GroupMultiset,
    samples: u64,
    seed: u64,
    confidence: f64,
    radius_kind: RadiusKind,
) -> Result<ClosednessReport>
where
    M: Fn(u64) -> bool + Sync,
    S: Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
{
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    let sampler = MultisetSampler::new(b)?;
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = sample_stream(seed, i);
            let a = a_sampler(&mut rng)?;
            if !member(a) {
                return Err(Error::Internal(format!("sampler produced {a:#x}, which is not in A")));
            }
            let g = sampler.sample(&mut rng);
            Ok(u64::from(member(a ^ g)))
        })
        .try_reduce(|| 0, |x, y| Ok(x + y))?;
    Ok(ClosednessReport::Sampled {
        estimate: hits as f64 / samples as f64,
        hits,
        radius: radius_kind.radius(samples, confidence)?,
        radius_kind,
        confidence,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{closedness_exact, middle_layers};
    use crate::rational::to_f64;

    fn uniform_from(elements: Vec<u64>) -> impl Fn(&mut ChaCha8Rng) -> Result<u64> + Sync {
        move |rng| Ok(elements[rng.random_range(0..elements.len())])
    }

    #[test]
    fn whole_group_always_hits() {
        let b = GroupMultiset::from_elements(8, [1, 2, 4]).unwrap();
        let r = closedness_sampled(|_| true, |rng: &mut ChaCha8Rng| Ok(rng.random_range(0..256)), &b, 1000, 7, 0.99, RadiusKind::Hoeffding).unwrap();
        assert_eq!(r.value(), 1.0);
    }

    #[test]
    fn middle_layers_within_radius_and_deterministic() {
        let a = middle_layers(7).unwrap();
        let b = GroupMultiset::standard_basis(7).unwrap();
        let exact = to_f64(closedness_exact(&a, &b).unwrap().exact_eta().unwrap());
        let elems = a.elements();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                closedness_sampled(|x| a.contains(x), uniform_from(elems.clone()), &b, 100_000, 42, 0.99, RadiusKind::Hoeffding).unwrap()
            })
        };
        let r1 = run(1);
        let r4 = run(4);
        assert_eq!(r1, r4);
        if let ClosednessReport::Sampled { estimate, radius, .. } = r1 {
            assert!((estimate - exact).abs() <= radius, "{estimate} vs {exact} ± {radius}");
        } else {
            panic!("expected a sampled report");
        }
    }

    #[test]
    fn alias_sampler_follows_multiplicities() {
        let b = GroupMultiset::from_counts(3, [(1, 1), (2, 3)]).unwrap();
        let s = MultisetSampler::new(&b).unwrap();
        let mut rng = sample_stream(5, 0);
        let twos = (0..40_000).filter(|_| s.sample(&mut rng) == 2).count();
        assert!((twos as f64 / 40_000.0 - 0.75).abs() < 0.02);
    }
}
