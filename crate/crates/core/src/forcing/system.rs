use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::Serialize;

use super::agreement::{agreement_naive, meets};
use super::rank_one::{outer_index, RankOneSubset};
use super::structure::{dense_fibres, four_decomposition, verify_terms, WitnessSummary};
use super::witness::PairTable;
use crate::gf2::{rref, BitVector, Subspace};
use crate::rational::{ratio, Rational};
use crate::tensor::{
    contract, degenerate_decide, lsystem_intersect, rank1, verify_degenerate, Children, Degeneracy, LSystem, SimpleSet,
    Tensor,
};
use crate::walsh::{bogolyubov, GroupMultiset, GroupSet};
use crate::{Error, Result};

/// One level of the recursive construction, kept so that witnesses can be
/// rebuilt along the same decompositions.
#[derive(Clone, Debug)]
struct Node {
    set: RankOneSubset,
    system: LSystem,
    /// `d = 1`: pair table of the vector set.
    table: Option<PairTable>,
    decompositions: BTreeMap<u64, [u64; 4]>,
    subs: BTreeMap<u64, Node>,
}

impl Node {
    fn build(b: &RankOneSubset, delta: &Rational) -> Result<Node> {
        if !b.has_density(delta) {
            return Err(Error::Precondition(format!(
                "ℬ′ has density {} below δ = {delta}",
                b.density()
            )));
        }
        let shape = b.shape().clone();
        if shape.d() == 1 {
            let set = b.as_vector_set()?;
            let w = bogolyubov(&set)?.subspace;
            let codim = w.codim();
            return Ok(Node {
                set: b.clone(),
                system: LSystem::new(&shape, w, Children::Uniform(Vec::new()), codim)?,
                table: Some(PairTable::new(&set)?),
                decompositions: BTreeMap::new(),
                subs: BTreeMap::new(),
            });
        }
        let n1 = shape.dims()[0];
        let t = dense_fibres(b, delta)?;
        let t_set = GroupSet::from_elements(n1 as u32, t.iter().copied())?;
        let u = bogolyubov(&t_set)?.subspace;
        let half = delta / ratio(2, 1);

        let mut subs: BTreeMap<u64, Node> = BTreeMap::new();
        let mut decompositions = BTreeMap::new();
        let mut children = BTreeMap::new();
        let mut bound = u.codim();
        for x in u.enumerate_indices()? {
            let dec = four_decomposition(&t, |y| t_set.contains(y), x)?;
            for &ti in &dec {
                if let Entry::Vacant(e) = subs.entry(ti) {
                    e.insert(Node::build(&b.fiber(ti)?, &half)?);
                }
            }
            let mut q = subs[&dec[0]].system.clone();
            for ti in &dec[1..] {
                q = lsystem_intersect(&q, &subs[ti].system)?;
            }
            bound = bound.max(q.bound());
            let head = BitVector::from_index(n1, x);
            children.insert(vec![head.clone()], q.root().clone());
            if let Children::Explicit(map) = q.to_explicit()?.children() {
                for (p, s) in map {
                    let mut key = vec![head.clone()];
                    key.extend(p.iter().cloned());
                    children.insert(key, s.clone());
                }
            }
            decompositions.insert(x, dec);
        }
        Ok(Node {
            set: b.clone(),
            system: LSystem::new(&shape, u, Children::Explicit(children), bound)?,
            table: None,
            decompositions,
            subs,
        })
    }

    /// `4^d` tuples of this level's set summing to `u₁⊗…⊗u_d`.
    fn witness(&self, tuple: &[u64]) -> Option<Vec<Vec<u64>>> {
        if let Some(table) = &self.table {
            return Some(table.four_sum(tuple[0])?.iter().map(|&a| vec![a]).collect());
        }
        let mut out = Vec::new();
        for &ti in self.decompositions.get(&tuple[0])? {
            for tail in self.subs.get(&ti)?.witness(&tuple[1..])? {
                let mut t = Vec::with_capacity(tuple.len());
                t.push(ti);
                t.extend(tail);
                out.push(t);
            }
        }
        Some(out)
    }
}

/// An l-system whose elements all lie in `4^d ℬ′`, with the check record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemResult {
    pub system: LSystem,
    /// Largest codimension actually stored.
    pub max_codim: usize,
    pub witness: WitnessSummary,
}

/// Recursive construction: dense first factors `T`, a system for each fibre
/// used, Bogolyubov on `T`, and four-fold intersections below each `u ∈ U`.
/// Every element is then checked against `ℬ′` with an explicit witness.
pub fn find_system(b: &RankOneSubset, delta: &Rational) -> Result<SystemResult> {
    let node = Node::build(b, delta)?;
    let shape = b.shape().clone();
    let d = shape.d();
    let mut witness = WitnessSummary {
        terms: 1 << (2 * d),
        ..Default::default()
    };
    for prefix in node.system.prefixes(d)? {
        let tuple: Vec<u64> = prefix.iter().map(BitVector::to_index).collect();
        witness.checked += 1;
        match node.witness(&tuple) {
            Some(terms) => {
                if !verify_terms(&node.set, &terms, outer_index(shape.dims(), &tuple)) {
                    return Err(Error::Internal(format!("system witness for {tuple:x?} does not check")));
                }
                witness.verified += 1;
            }
            None => witness.unverified.push(format!("{tuple:x?}")),
        }
    }
    Ok(SystemResult {
        max_codim: node.system.max_codim()?,
        system: node.system,
        witness,
    })
}

/// `Q ∩ T` for a subspace-form simple set `T`: below each prefix
/// `(u₁,…,u_{j−1})` the subspace `U_{u₁…}` is cut by
/// `((⊗_{i∈I∖{j}} uᵢ) ⊗ v) ∈ H_I` for every `I` with largest axis `j`.
pub fn system_in_simple(q: &LSystem, t: &SimpleSet) -> Result<LSystem> {
    let shape = q.shape().clone();
    if t.shape() != &shape {
        return Err(Error::ShapeMismatch("system and simple set differ in shape".into()));
    }
    if !t.translate().is_zero() {
        return Err(Error::Precondition("the simple set must have zero translate".into()));
    }
    let d = shape.d();
    // (I, basis of H_I^⊥) grouped by largest axis
    let mut by_level: Vec<Vec<(Vec<usize>, Vec<BitVector>)>> = vec![Vec::new(); d];
    for (axes, h) in t.spaces() {
        let dual = h.orthogonal_complement();
        if dual.dim() > 0 {
            by_level[*axes.last().expect("nonempty axes")].push((axes.clone(), dual.basis().to_vec()));
        }
    }
    let cut = |prefix: &[BitVector], s: Subspace| -> Result<Subspace> {
        let j = prefix.len();
        let mut cons = s.orthogonal_complement().basis().to_vec();
        for (axes, dual) in &by_level[j] {
            let head = &axes[..axes.len() - 1];
            for c in dual {
                if head.is_empty() {
                    cons.push(c.clone());
                } else {
                    let ct = Tensor::from_data(&shape.restrict(axes), c.clone())?;
                    let factors: Vec<BitVector> = head.iter().map(|&i| prefix[i].clone()).collect();
                    let st = rank1(&shape.restrict(head), &factors)?;
                    cons.push(contract(&ct, &st)?.into_data());
                }
            }
        }
        Ok(rref(shape.dims()[j], &cons)?.orthogonal_complement())
    };
    let root = cut(&[], q.root().clone())?;
    let mut map = BTreeMap::new();
    let mut layer: Vec<Vec<BitVector>> = vec![Vec::new()];
    let mut current: BTreeMap<Vec<BitVector>, Subspace> = BTreeMap::from([(Vec::new(), root.clone())]);
    for _ in 1..d {
        let mut next_layer = Vec::new();
        let mut next = BTreeMap::new();
        for p in &layer {
            for u in current[p].enumerate()? {
                let mut np = p.clone();
                np.push(u);
                let s = cut(&np, q.child(&np)?)?;
                next.insert(np.clone(), s.clone());
                map.insert(np.clone(), s);
                next_layer.push(np);
            }
        }
        layer = next_layer;
        current = next;
    }
    let bound = q.bound() + (1 << (d - 1)) * t.k();
    LSystem::new(&shape, root, Children::Explicit(map), bound)
}

/// Each input written as a center plus a checked degenerate remainder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    pub center: usize,
    pub remainder: Degeneracy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegeneracyCluster {
    pub k: usize,
    pub centers: Vec<Tensor>,
    pub assignments: Vec<ClusterAssignment>,
}

fn decide(r: &Tensor, k: usize) -> Result<Degeneracy> {
    match degenerate_decide(r, k)? {
        Degeneracy::Undecided { needed, limit } => Err(Error::budget("degeneracy search", needed, limit)),
        other => Ok(other),
    }
}

/// Greedy maximal subset of `rs` with pairwise non-`k`-degenerate
/// differences; every `r` is then a center plus a `k`-degenerate remainder.
pub fn degeneracy_cluster(q: &GroupMultiset, rs: &[Tensor], k: usize) -> Result<DegeneracyCluster> {
    let quarter = ratio(3, 4);
    for (i, r) in rs.iter().enumerate() {
        if r.shape().total() as u32 != q.n() {
            return Err(Error::DimensionMismatch {
                expected: q.n() as usize,
                found: r.shape().total(),
            });
        }
        let c = agreement_naive(q, r.to_index());
        if !meets(c, q.total(), &quarter) {
            return Err(Error::Precondition(format!("r[{i}] agrees with {c} of {} elements of Q, below 3/4", q.total())));
        }
    }
    let mut centers: Vec<Tensor> = Vec::new();
    for r in rs {
        let mut separate = true;
        for c in &centers {
            if decide(&r.add(c)?, k)?.is_degenerate() {
                separate = false;
                break;
            }
        }
        if separate {
            centers.push(r.clone());
        }
    }
    let mut assignments = Vec::with_capacity(rs.len());
    for r in rs {
        let mut found = None;
        for (ci, c) in centers.iter().enumerate() {
            let diff = r.add(c)?;
            if let Degeneracy::Degenerate { spaces } = decide(&diff, k)? {
                if !verify_degenerate(&diff, k, &spaces)? {
                    return Err(Error::Internal("degeneracy witness does not check".into()));
                }
                found = Some(ClusterAssignment {
                    center: ci,
                    remainder: Degeneracy::Degenerate { spaces },
                });
                break;
            }
        }
        assignments.push(found.ok_or_else(|| Error::Internal("greedy clustering left an input uncovered".into()))?);
    }
    Ok(DegeneracyCluster { k, centers, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::tensor::rank_one_multiset;

    fn shape(d: &[usize]) -> crate::tensor::TensorShape {
        crate::tensor::TensorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn full_set_gives_full_system() {
        for dims in [&[4][..], &[3, 3], &[2, 2, 2]] {
            let s = shape(dims);
            let r = find_system(&RankOneSubset::full(&s).unwrap(), &ratio(1, 1)).unwrap();
            assert_eq!(r.max_codim, 0);
            assert!(r.witness.all_verified());
            assert_eq!(r.system.size().unwrap(), 1u128 << dims.iter().sum::<usize>());
        }
    }

    #[test]
    fn one_axis_is_bogolyubov() {
        let s = shape(&[6]);
        let b = RankOneSubset::random(&s, &ratio(1, 2), 4).unwrap();
        let r = find_system(&b, &ratio(1, 2)).unwrap();
        assert_eq!(r.system.root(), &bogolyubov(&b.as_vector_set().unwrap()).unwrap().subspace);
        assert!(r.witness.all_verified());
    }

    #[test]
    fn random_matrix_systems_verify() {
        let s = shape(&[4, 4]);
        for seed in 0..3 {
            let b = RankOneSubset::random(&s, &ratio(1, 2), seed).unwrap();
            let r = find_system(&b, &ratio(1, 2)).unwrap();
            assert!(r.max_codim <= r.system.bound());
            assert!(r.witness.all_verified(), "{seed}: {:?}", r.witness);
            assert_eq!(r.witness.terms, 16);
        }
    }

    #[test]
    fn three_axis_system_verifies() {
        let s = shape(&[2, 2, 2]);
        let b = RankOneSubset::random(&s, &ratio(3, 4), 1).unwrap();
        let r = find_system(&b, &ratio(3, 4)).unwrap();
        assert!(r.witness.all_verified());
        assert_eq!(r.witness.terms, 64);
    }

    fn members(q: &LSystem) -> Vec<Tensor> {
        q.elements().unwrap()
    }

    #[test]
    fn full_simple_set_keeps_the_system() {
        let s = shape(&[3, 3]);
        let q = LSystem::full(&s).unwrap();
        let t = SimpleSet::linear(&s, BTreeMap::new()).unwrap();
        let out = system_in_simple(&q, &t).unwrap();
        assert_eq!(members(&out), members(&q));
    }

    #[test]
    fn single_top_constraint_is_respected() {
        let s = shape(&[3, 3]);
        let q = LSystem::full(&s).unwrap();
        let h = Subspace::from_indices(9, &[0b100_010_001]).orthogonal_complement();
        assert_eq!(h.codim(), 1);
        let t = SimpleSet::linear(&s, BTreeMap::from([(vec![0, 1], h)])).unwrap();
        let out = system_in_simple(&q, &t).unwrap();
        assert!(out.max_codim().unwrap() <= out.bound());
        for x in members(&out) {
            assert!(t.member(&x).unwrap());
        }
        // u = 0 keeps all 8 v, each nonzero u keeps the 4 with u·v = 0
        assert_eq!(out.size().unwrap(), 36);
    }

    #[test]
    fn random_system_in_random_simple_set() {
        use crate::closure::sample_stream;
        use rand::Rng;
        let s = shape(&[3, 3]);
        for seed in 0..5 {
            let mut rng = sample_stream(seed, 0);
            let root = Subspace::from_indices(3, &[rng.random_range(1..8), rng.random_range(1..8)]);
            let root = root.trim_to_codim(1);
            let mut children = BTreeMap::new();
            for u in root.enumerate().unwrap() {
                let w = Subspace::from_indices(3, &[rng.random_range(1..8)]).orthogonal_complement();
                children.insert(vec![u], w);
            }
            let q = LSystem::new(&s, root, Children::Explicit(children), 1).unwrap();
            let mut spaces = BTreeMap::new();
            for axes in s.nonempty_axis_subsets() {
                let n = s.axes_total(&axes);
                let c = rng.random_range(1..1u64 << n);
                spaces.insert(axes, Subspace::from_indices(n, &[c]).orthogonal_complement());
            }
            let t = SimpleSet::linear(&s, spaces).unwrap();
            let out = system_in_simple(&q, &t).unwrap();
            let mut qe: Vec<u64> = members(&q).iter().map(Tensor::to_index).collect();
            qe.sort_unstable();
            for x in members(&out) {
                assert!(t.member(&x).unwrap());
                assert!(qe.binary_search(&x.to_index()).is_ok());
            }
            assert!(out.max_codim().unwrap() <= out.bound());
        }
    }

    #[test]
    fn clusters_of_trivial_inputs() {
        let s = shape(&[2, 2, 2]);
        let q = GroupMultiset::from_counts(8, [(0, 4)]).unwrap();
        let r = Tensor::from_index(&s, 0b1011_0110);
        let c = degeneracy_cluster(&q, &[r.clone(), r.clone(), r.clone()], 1).unwrap();
        assert_eq!(c.centers.len(), 1);
        let e = Tensor::from_index(&s, outer_index(&[2, 2, 2], &[1, 3, 2]));
        let c = degeneracy_cluster(&q, &[Tensor::zeros(&s), e], 1).unwrap();
        assert_eq!(c.centers.len(), 1);
    }

    #[test]
    fn random_cluster_decomposes_every_input() {
        use crate::closure::sample_stream;
        use rand::Rng;
        let s = shape(&[2, 2, 2]);
        let q = rank_one_multiset(&s, false).unwrap();
        let profile = super::super::agreement_profile(&q, &s).unwrap();
        let agreeing = profile.agreement_set(&ratio(3, 4));
        let mut rng = sample_stream(5, 0);
        let rs: Vec<Tensor> = (0..12)
            .map(|_| Tensor::from_index(&s, agreeing[rng.random_range(0..agreeing.len())]))
            .collect();
        let c = degeneracy_cluster(&q, &rs, 1).unwrap();
        for (r, a) in rs.iter().zip(&c.assignments) {
            let diff = r.add(&c.centers[a.center]).unwrap();
            let Degeneracy::Degenerate { spaces } = &a.remainder else { panic!() };
            assert!(verify_degenerate(&diff, 1, spaces).unwrap());
        }
        let bad = Tensor::from_index(&s, 0xff);
        assert!(degeneracy_cluster(&q, &[bad], 1).is_err() || profile.count(0xff) * 4 >= q.total() * 3);
    }
}
