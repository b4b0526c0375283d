use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::agreement::meets;
use super::rank_one::{matrix_apply, matrix_rank_index, outer_index, RankOneSubset};
use super::witness::PairTable;
use crate::budget::DEFAULT_SEARCH_LIMIT;
use crate::gf2::{BitVector, Subspace};
use crate::rational::{ratio, Rational};
use crate::tensor::{Tensor, TensorShape};
use crate::walsh::{bogolyubov, GroupMultiset, GroupSet};
use crate::{Error, Result};

fn serialize_subspace_map<S: serde::Serializer>(m: &BTreeMap<u64, Subspace>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        u: String,
        space: &'a Subspace,
    }
    s.collect_seq(m.iter().map(|(u, space)| Entry { u: format!("{u:x}"), space }))
}

fn serialize_decompositions<S: serde::Serializer>(m: &BTreeMap<u64, [u64; 4]>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|(u, t)| (format!("{u:x}"), t.map(|x| format!("{x:x}")))))
}

fn serialize_hex<S: serde::Serializer>(v: &[u64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| format!("{x:x}")))
}

/// Outcome of the sumset-witness checks over a family of targets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WitnessSummary {
    /// Number of summands allowed per target.
    pub terms: usize,
    pub checked: u64,
    pub verified: u64,
    /// Targets with no witness found within budget; never a disproof.
    pub unverified: Vec<String>,
}

impl WitnessSummary {
    pub fn all_verified(&self) -> bool {
        self.unverified.is_empty() && self.verified == self.checked
    }
}

/// `U`, a subspace `V_u` for each `u ∈ U`, and the data behind them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixStructure {
    pub shape: TensorShape,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub delta: Rational,
    /// `T = {u : |ℬ′_u| ≥ (δ/2)·2^{n₂}}`.
    #[serde(serialize_with = "serialize_hex")]
    pub t: Vec<u64>,
    pub u: Subspace,
    /// `u = t₁+t₂+t₃+t₄` with every `tᵢ ∈ T`.
    #[serde(serialize_with = "serialize_decompositions")]
    pub decompositions: BTreeMap<u64, [u64; 4]>,
    /// Bogolyubov subspace `W_t ⊆ 4ℬ′_t` for each `t` used.
    #[serde(serialize_with = "serialize_subspace_map")]
    pub w: BTreeMap<u64, Subspace>,
    /// `V_u = ⋂ W_{tᵢ}`, trimmed to the common codimension.
    #[serde(serialize_with = "serialize_subspace_map")]
    pub v: BTreeMap<u64, Subspace>,
    /// Common codimension of the `V_u`.
    pub v_codim: usize,
    /// `max(codim U, v_codim)`.
    pub k: usize,
    pub witness: WitnessSummary,
}

/// Lexicographically first `(t₁,t₂,t₃)` from sorted `t` with `t₄ = u+t₁+t₂+t₃ ∈ t`.
pub(crate) fn four_decomposition(t: &[u64], in_t: impl Fn(u64) -> bool, u: u64) -> Result<[u64; 4]> {
    let mut visited = 0u64;
    for &a in t {
        for &b in t {
            for &c in t {
                visited += 1;
                if visited > DEFAULT_SEARCH_LIMIT {
                    return Err(Error::budget("four-term decomposition", visited, DEFAULT_SEARCH_LIMIT));
                }
                let d = u ^ a ^ b ^ c;
                if in_t(d) {
                    return Ok([a, b, c, d]);
                }
            }
        }
    }
    Err(Error::Internal(format!("{u:#x} lies in the Bogolyubov subspace of T but is not a 4-sum")))
}

fn check_density(b: &RankOneSubset, delta: &Rational) -> Result<()> {
    if !b.has_density(delta) {
        return Err(Error::Precondition(format!(
            "ℬ′ has density {} below δ = {delta}",
            b.density()
        )));
    }
    Ok(())
}

/// The rows of `T` and the check that `T` is as large as averaging promises.
pub(crate) fn dense_fibres(b: &RankOneSubset, delta: &Rational) -> Result<Vec<u64>> {
    let half = delta / ratio(2, 1);
    let t = b.dense_first_factors(&half)?;
    let n1 = b.shape().dims()[0];
    if Rational::from_integer(BigInt::from(t.len())) < &half * Rational::from_integer(BigInt::from(1) << n1) {
        return Err(Error::Internal(format!("|T| = {} is below (δ/2)·2^{n1}", t.len())));
    }
    if t.is_empty() {
        return Err(Error::Empty("T"));
    }
    Ok(t)
}

/// Builds `U` and the `V_u` for a dense set of rank-1 matrices, then checks
/// that `u⊗v ∈ 16ℬ′` for every `u ∈ U`, `v ∈ V_u` with explicit witnesses.
pub fn find_structure_matrix(b: &RankOneSubset, delta: &Rational) -> Result<MatrixStructure> {
    let shape = b.shape().clone();
    if shape.d() != 2 {
        return Err(Error::ShapeMismatch(format!("expected a matrix shape, got {:?}", shape.dims())));
    }
    check_density(b, delta)?;
    let (n1, n2) = (shape.dims()[0], shape.dims()[1]);
    let t = dense_fibres(b, delta)?;
    let t_set = GroupSet::from_elements(n1 as u32, t.iter().copied())?;
    let u = bogolyubov(&t_set)?.subspace;

    let mut decompositions = BTreeMap::new();
    let mut w: BTreeMap<u64, Subspace> = BTreeMap::new();
    let mut fibres: BTreeMap<u64, GroupSet> = BTreeMap::new();
    let mut raw: BTreeMap<u64, Subspace> = BTreeMap::new();
    for x in u.enumerate_indices()? {
        let dec = four_decomposition(&t, |y| t_set.contains(y), x)?;
        let mut v = Subspace::full(n2);
        for &ti in &dec {
            if let Entry::Vacant(e) = w.entry(ti) {
                let fib = b.fiber(ti)?.as_vector_set()?;
                e.insert(bogolyubov(&fib)?.subspace);
                fibres.insert(ti, fib);
            }
            v = v.intersect(&w[&ti])?;
        }
        decompositions.insert(x, dec);
        raw.insert(x, v);
    }
    let v_codim = raw.values().map(Subspace::codim).max().unwrap_or(0);
    let v: BTreeMap<u64, Subspace> = raw.iter().map(|(&x, s)| (x, s.trim_to_codim(v_codim))).collect();

    let tables: BTreeMap<u64, PairTable> = fibres
        .iter()
        .map(|(&ti, f)| Ok((ti, PairTable::new(f)?)))
        .collect::<Result<_>>()?;
    let mut witness = WitnessSummary {
        terms: 16,
        ..Default::default()
    };
    for (&x, vx) in &v {
        for y in vx.enumerate_indices()? {
            witness.checked += 1;
            match matrix_witness(&decompositions[&x], &tables, y) {
                Some(terms) => {
                    if !verify_terms(b, &terms, outer_index(&[n1, n2], &[x, y])) {
                        return Err(Error::Internal(format!("16-term witness for {x:x}⊗{y:x} does not check")));
                    }
                    witness.verified += 1;
                }
                None => witness.unverified.push(format!("{x:x}⊗{y:x}")),
            }
        }
    }
    Ok(MatrixStructure {
        shape,
        delta: delta.clone(),
        t,
        k: u.codim().max(v_codim),
        u,
        decompositions,
        w,
        v,
        v_codim,
        witness,
    })
}

/// `u⊗v = Σᵢ tᵢ⊗v` with `v = b_{i1}+…+b_{i4}`, every `b_{ij} ∈ ℬ′_{tᵢ}`.
fn matrix_witness(dec: &[u64; 4], tables: &BTreeMap<u64, PairTable>, v: u64) -> Option<Vec<Vec<u64>>> {
    let mut terms = Vec::with_capacity(16);
    for &ti in dec {
        for bj in tables.get(&ti)?.four_sum(v)? {
            terms.push(vec![ti, bj]);
        }
    }
    Some(terms)
}

/// Every term is a tuple of `ℬ′` and the tensors sum to `target`.
pub(crate) fn verify_terms(b: &RankOneSubset, terms: &[Vec<u64>], target: u64) -> bool {
    terms.iter().all(|t| b.contains(t)) && terms.iter().fold(0u64, |acc, t| acc ^ b.tensor_index(t)) == target
}

fn check_family(u: &Subspace, v: &BTreeMap<u64, Subspace>) -> Result<(Vec<u64>, usize)> {
    let us = u.enumerate_indices()?;
    let mut codim = None;
    for x in &us {
        let s = v
            .get(x)
            .ok_or_else(|| Error::Precondition(format!("no V_u stored for u = {x:#x}")))?;
        match codim {
            None => codim = Some(s.codim()),
            Some(c) if c != s.codim() => {
                return Err(Error::Precondition(format!(
                    "V_u codimensions differ: {c} and {} at u = {x:#x}",
                    s.codim()
                )))
            }
            _ => {}
        }
    }
    Ok((us, codim.unwrap_or(0)))
}

/// `Q = ⋃_{u∈U} u⊗V_u`, size `|U|·|V_u|`.
pub fn build_q_matrix(shape: &TensorShape, u: &Subspace, v: &BTreeMap<u64, Subspace>) -> Result<GroupMultiset> {
    if shape.d() != 2 {
        return Err(Error::ShapeMismatch(format!("expected a matrix shape, got {:?}", shape.dims())));
    }
    let (us, _) = check_family(u, v)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for x in us {
        for y in v[&x].enumerate_indices()? {
            *counts.entry(outer_index(shape.dims(), &[x, y])).or_default() += 1;
        }
    }
    GroupMultiset::from_counts(shape.total() as u32, counts)
}

/// A pair `i ≠ j` whose difference kills many `u ∈ U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallRankPair {
    pub i: usize,
    pub j: usize,
    /// `#{u ∈ U : r_i u ∈ V_u^⊥}` for each index.
    pub hits: Vec<u64>,
    /// `{u ∈ U : (r_i − r_j)u = 0}`.
    #[serde(serialize_with = "serialize_hex")]
    pub kernel: Vec<u64>,
    /// `|U| / (4m²)`, the guaranteed kernel size.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub kernel_bound: Rational,
    pub rank: usize,
    /// `n₁ − ⌈log₂ |kernel|⌉`, implied by the kernel alone.
    pub rank_bound: usize,
}

fn in_perp(s: &Subspace, x: u64) -> bool {
    s.basis().iter().all(|b| (b.to_index() & x).count_ones().is_multiple_of(2))
}

/// Pigeonhole over the contractions `r_i u`: the pair with the most
/// collisions over `U` (first in index order on ties).
pub fn smallrank_pair(
    shape: &TensorShape,
    u: &Subspace,
    v: &BTreeMap<u64, Subspace>,
    rs: &[Tensor],
    k: usize,
) -> Result<SmallRankPair> {
    let q = build_q_matrix(shape, u, v)?;
    let (us, codim) = check_family(u, v)?;
    if codim > k || u.codim() > k {
        return Err(Error::Precondition(format!("codimensions exceed k = {k}")));
    }
    let m = rs.len();
    if (m as u128) < 1u128 << (k + 3) {
        return Err(Error::Precondition(format!("need at least 2^(k+3) = {} arrays, got {m}", 1u64 << (k + 3))));
    }
    let quarter = ratio(3, 4);
    let idx: Vec<u64> = rs.iter().map(Tensor::to_index).collect();
    for (i, r) in rs.iter().enumerate() {
        if r.shape() != shape {
            return Err(Error::ShapeMismatch(format!("r[{i}] has shape {:?}", r.shape().dims())));
        }
        let c = super::agreement::agreement_naive(&q, idx[i]);
        if !meets(c, q.total(), &quarter) {
            return Err(Error::Precondition(format!("r[{i}] agrees with {c} of {} elements of Q, below 3/4", q.total())));
        }
    }
    let n2 = shape.dims()[1];
    let images: Vec<Vec<u64>> = idx.iter().map(|&r| us.iter().map(|&x| matrix_apply(r, n2, x)).collect()).collect();
    let hits = (0..m)
        .map(|i| us.iter().zip(&images[i]).filter(|&(x, &img)| in_perp(&v[x], img)).count() as u64)
        .collect();
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 0..m {
        for j in i + 1..m {
            let c = images[i].iter().zip(&images[j]).filter(|(a, b)| a == b).count();
            if best.is_none_or(|(_, _, bc)| c > bc) {
                best = Some((i, j, c));
            }
        }
    }
    let (i, j, _) = best.expect("m ≥ 8");
    let kernel: Vec<u64> = us
        .iter()
        .zip(images[i].iter().zip(&images[j]))
        .filter(|(_, (a, b))| a == b)
        .map(|(&x, _)| x)
        .collect();
    let kernel_bound = ratio(us.len(), 4 * m * m);
    if Rational::from_integer(BigInt::from(kernel.len())) < kernel_bound {
        return Err(Error::Internal(format!(
            "best pair shares {} contractions, below |U|/4m² = {kernel_bound}",
            kernel.len()
        )));
    }
    let n1 = shape.dims()[0];
    let rank = matrix_rank_index(idx[i] ^ idx[j], n1, n2);
    let log = (usize::BITS - (kernel.len() - 1).leading_zeros()) as usize;
    let rank_bound = n1 - log.min(n1);
    if rank > rank_bound {
        return Err(Error::Internal(format!("rank {rank} exceeds the kernel bound {rank_bound}")));
    }
    Ok(SmallRankPair {
        i,
        j,
        hits,
        kernel,
        kernel_bound,
        rank,
        rank_bound,
    })
}

/// `W₁ = U^⊥` and `W₂ = span(X)` with `X` the vectors lying in `V_u^⊥` for
/// at least `|U|/(10·2^l)` of the `u ∈ U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedWitness {
    pub w1: Subspace,
    pub w2: Subspace,
    #[serde(serialize_with = "serialize_hex")]
    pub x: Vec<u64>,
    pub l: usize,
    /// Common codimension of the `V_u`.
    pub k: usize,
    /// `10·2^{k+l}`.
    pub x_bound: u64,
}

pub fn reduced_witness(u: &Subspace, v: &BTreeMap<u64, Subspace>, l: usize) -> Result<ReducedWitness> {
    let (us, k) = check_family(u, v)?;
    let n2 = v.values().next().map(Subspace::ambient_dim).unwrap_or(0);
    let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
    for x in &us {
        for y in v[x].orthogonal_complement().enumerate_indices()? {
            *tally.entry(y).or_default() += 1;
        }
    }
    let threshold = ratio(us.len(), 10u64 << l);
    let x: Vec<u64> = tally
        .into_iter()
        .filter(|&(_, c)| Rational::from_integer(BigInt::from(c)) >= threshold)
        .map(|(y, _)| y)
        .collect();
    let x_bound = 10u64 << (k + l);
    if x.len() as u64 > x_bound {
        return Err(Error::Internal(format!("|X| = {} exceeds 10·2^(k+l) = {x_bound}", x.len())));
    }
    let w2 = Subspace::from_indices(n2, &x);
    Ok(ReducedWitness {
        w1: u.orthogonal_complement(),
        w2,
        x,
        l,
        k,
        x_bound,
    })
}

/// Scan of every matrix of rank at most `l` agreeing with at least `7/8` of `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedCheck {
    pub candidates: u64,
    #[serde(serialize_with = "serialize_hex")]
    pub violations: Vec<u64>,
}

pub fn check_reduced(profile: &super::AgreementProfile, rw: &ReducedWitness) -> Result<ReducedCheck> {
    let shape = profile.shape();
    let (n1, n2) = (shape.dims()[0], shape.dims()[1]);
    let spaces = BTreeMap::from([(vec![0], rw.w1.clone()), (vec![1], rw.w2.clone())]);
    let sum = crate::gf2::PackedBasis::from_subspace(&super::blowup_sum(shape, &spaces)?);
    let mut out = ReducedCheck {
        candidates: 0,
        violations: Vec::new(),
    };
    let alpha = ratio(7, 8);
    for r in profile.agreement_set(&alpha) {
        if matrix_rank_index(r, n1, n2) <= rw.l {
            out.candidates += 1;
            if !sum.contains(r) {
                out.violations.push(r);
            }
        }
    }
    Ok(out)
}

/// `U` and the `V_u` as an l-system with explicit children.
pub fn structure_lsystem(s: &MatrixStructure) -> Result<crate::tensor::LSystem> {
    let n1 = s.shape.dims()[0];
    let children = s.v.iter().map(|(&x, sp)| (vec![BitVector::from_index(n1, x)], sp.clone())).collect();
    crate::tensor::LSystem::new(&s.shape, s.u.clone(), crate::tensor::Children::Explicit(children), s.k)
}
