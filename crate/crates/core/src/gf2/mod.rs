//! Bit-packed linear algebra over F₂.

mod bitvec;
mod subspace;
mod support;

pub use bitvec::BitVector;
pub use subspace::{
    all_subspaces, gaussian_binomial, rref, subspaces_of_dim, Coset, GrayCodeIter, PackedBasis, Subspace,
};
pub use support::{
    binomial_prefix_sum, count_small_support, private_coordinate_basis, private_sets, PrivateBasisVector,
};
