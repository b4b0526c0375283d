use std::collections::BTreeMap;

use num_integer::Integer;
use serde::Serialize;

use super::agreement::{agreement_profile, check_forcing, reverify, ForcingCertificate};
use super::rank_one::{matrix_rank_index, RankOneSubset};
use super::structure::{
    build_q_matrix, check_reduced, find_structure_matrix, reduced_witness, smallrank_pair, MatrixStructure, ReducedCheck,
    ReducedWitness, SmallRankPair,
};
use crate::gf2::{PackedBasis, Subspace};
use crate::rational::{one, ratio, Rational};
use crate::tensor::Tensor;
use crate::walsh::GroupMultiset;
use crate::{Error, Result};

/// Default agreement slack for the pipeline.
pub fn default_epsilon() -> Rational {
    ratio(1, 32)
}

/// Default rank threshold separating cluster centers.
pub const DEFAULT_RANK_L: usize = 1;

/// Largest `m = 2^{k+3}` for which the pigeonhole pair is also reported.
const SMALLRANK_MAX_M: usize = 512;

/// Measured sizes of one pipeline run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineDims {
    pub t: usize,
    pub u_codim: usize,
    pub v_codim: usize,
    pub k: usize,
    pub q_total: u64,
    pub agreement: u64,
    pub centers: usize,
    pub w1: usize,
    pub w2: usize,
    pub w12: usize,
    pub x: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub epsilon: Rational,
    pub l: usize,
    pub structure: MatrixStructure,
    pub reduced: ReducedWitness,
    /// Rank-`≤ l` arrays with `7/8` agreement checked against `W₁⊗F + F⊗W₂`.
    pub reduced_check: ReducedCheck,
    /// Agreeing arrays pairwise more than rank `l` apart, every other
    /// agreeing array within rank `l` of one of them.
    #[serde(serialize_with = "serialize_hex")]
    pub centers: Vec<u64>,
    pub smallrank: Option<SmallRankPair>,
    pub certificate: ForcingCertificate,
    pub reverified: bool,
    pub dims: PipelineDims,
    pub histogram: Vec<(u64, u64)>,
}

fn serialize_hex<S: serde::Serializer>(v: &[u64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| format!("{x:x}")))
}

impl PipelineReport {
    /// Containment holds, the certificate re-derives, and every structure
    /// output carries a checked witness.
    pub fn passed(&self) -> bool {
        self.certificate.verified
            && self.reverified
            && self.reduced_check.violations.is_empty()
            && self.structure.witness.all_verified()
    }
}

/// Greedy maximal subset of `set` (taken in order) whose pairwise differences
/// have rank above `l`.
pub fn rank_centers(set: &[u64], n1: usize, n2: usize, l: usize) -> Vec<u64> {
    let mut centers: Vec<u64> = Vec::new();
    for &r in set {
        if centers.iter().all(|&c| matrix_rank_index(r ^ c, n1, n2) > l) {
            centers.push(r);
        }
    }
    centers
}

/// Structure, `Q`, agreement profile, reduced witness and the final forcing
/// check for a dense set of rank-1 matrices.
pub fn matrix_pipeline(b: &RankOneSubset, delta: &Rational, epsilon: &Rational, l: usize) -> Result<PipelineReport> {
    if epsilon <= &crate::rational::zero() || epsilon > &ratio(1, 16) {
        return Err(Error::Precondition(format!("ε = {epsilon} outside (0, 1/16]")));
    }
    let structure = find_structure_matrix(b, delta)?;
    let shape = structure.shape.clone();
    let (n1, n2) = (shape.dims()[0], shape.dims()[1]);
    let q = build_q_matrix(&shape, &structure.u, &structure.v)?;
    let profile = agreement_profile(&q, &shape)?;
    let rw = reduced_witness(&structure.u, &structure.v, l)?;
    let reduced_check = check_reduced(&profile, &rw)?;

    let set = profile.agreement_set(&(one() - epsilon));
    let centers = rank_centers(&set, n1, n2, l);
    let w12 = PackedBasis::spanned_by(centers.iter().copied()).to_subspace(shape.total());
    let spaces = BTreeMap::from([
        (vec![0], rw.w1.clone()),
        (vec![1], rw.w2.clone()),
        (vec![0, 1], w12.clone()),
    ]);
    let certificate = check_forcing(&profile, &(one() - epsilon), &spaces)?;
    let reverified = reverify(&profile, &certificate)?;

    let k = structure.k;
    let m = 1usize << (k + 3);
    let smallrank = if m <= SMALLRANK_MAX_M {
        let candidates = profile.agreement_set(&ratio(3, 4));
        if candidates.len() >= m {
            let rs: Vec<Tensor> = candidates[..m].iter().map(|&r| Tensor::from_index(&shape, r)).collect();
            Some(smallrank_pair(&shape, &structure.u, &structure.v, &rs, k)?)
        } else {
            None
        }
    } else {
        None
    };

    let dims = PipelineDims {
        t: structure.t.len(),
        u_codim: structure.u.codim(),
        v_codim: structure.v_codim,
        k,
        q_total: q.total(),
        agreement: set.len() as u64,
        centers: centers.len(),
        w1: rw.w1.dim(),
        w2: rw.w2.dim(),
        w12: w12.dim(),
        x: rw.x.len(),
    };
    log::info!("matrix pipeline dims {dims:?}");
    Ok(PipelineReport {
        epsilon: epsilon.clone(),
        l,
        structure,
        reduced: rw,
        reduced_check,
        centers,
        smallrank,
        certificate,
        reverified,
        dims,
        histogram: profile.histogram(),
    })
}

/// Repeats every multiset a whole number of times so the sizes become equal
/// when the least common multiple needs at most `cap` copies of each, and
/// otherwise so that the largest is at most twice the smallest.
pub fn equalize_sizes(multisets: &[GroupMultiset], cap: u64) -> Result<Vec<GroupMultiset>> {
    let sizes: Vec<u64> = multisets.iter().map(GroupMultiset::total).collect();
    if sizes.contains(&0) {
        return Err(Error::Empty("multiset"));
    }
    let Some(&max) = sizes.iter().max() else {
        return Ok(Vec::new());
    };
    let mut lcm = 1u64;
    for &s in &sizes {
        lcm = lcm.lcm(&s);
        if lcm / sizes.iter().min().copied().unwrap_or(1) > cap {
            break;
        }
    }
    let exact = sizes.iter().all(|&s| lcm.is_multiple_of(s) && lcm / s <= cap);
    multisets
        .iter()
        .zip(&sizes)
        .map(|(q, &s)| {
            let factor = if exact {
                lcm / s
            } else {
                // largest power of two keeping s·factor ≤ max
                1u64 << (63 - (max / s).leading_zeros())
            };
            q.scaled(factor)
        })
        .collect()
}

/// `{s⊗t : s ∈ Q′, t ∈ Q_s}` as a multiset on the flattened product, `s`
/// occupying the leading axes.
pub fn product_multiset(outer_bits: u32, inner_bits: u32, parts: &[(u64, GroupMultiset)]) -> Result<GroupMultiset> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for (s, qs) in parts {
        if qs.n() != inner_bits {
            return Err(Error::DimensionMismatch {
                expected: inner_bits as usize,
                found: qs.n() as usize,
            });
        }
        for &(t, mult) in qs.entries() {
            let x = super::rank_one::outer_index(&[outer_bits as usize, inner_bits as usize], &[*s, t]);
            *counts.entry(x).or_default() += mult;
        }
    }
    GroupMultiset::from_counts(outer_bits * inner_bits, counts)
}

/// `W₁⊗F + F⊗W₂ + W₁₂` as one subspace, for external re-checks.
pub fn pipeline_sum(report: &PipelineReport) -> Result<Subspace> {
    super::agreement::blowup_sum(&report.structure.shape, &report.certificate.spaces)
}
