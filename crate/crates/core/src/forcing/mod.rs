//! Agreement profiles, forcing certificates and the structure found inside
//! dense sets of rank-1 tensors.

mod agreement;
mod pipeline;
mod rank_one;
mod structure;
mod system;
mod witness;

pub use agreement::{
    agreement_naive, agreement_profile, agreement_profile_with_limit, blowup_sum, check_forcing, reverify,
    AgreementProfile, ForcingCertificate, PROFILE_EXPONENT_LIMIT,
};
pub use pipeline::{
    default_epsilon, equalize_sizes, matrix_pipeline, pipeline_sum, product_multiset, rank_centers, PipelineDims,
    PipelineReport, DEFAULT_RANK_L,
};
pub use rank_one::{matrix_apply, matrix_rank_index, outer_index, tuple_tensor, RankOneSubset, MAX_TUPLE_EXPONENT};
pub use structure::{
    build_q_matrix, check_reduced, find_structure_matrix, reduced_witness, smallrank_pair, structure_lsystem,
    MatrixStructure, ReducedCheck, ReducedWitness, SmallRankPair, WitnessSummary,
};
pub use system::{
    degeneracy_cluster, find_system, system_in_simple, ClusterAssignment, DegeneracyCluster, SystemResult,
};
pub use witness::PairTable;
