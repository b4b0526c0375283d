//! Exact and sampled tools for studying closed subsets of Cayley graphs on
//! F₂ⁿ and on tensor spaces F₂^{n₁}⊗…⊗F₂^{n_d}.
//!
//! * [`gf2`]: packed vectors, canonical subspaces, cosets, supports.
//! * [`tensor`]: tensor shapes, rank-1 tensors, contractions, simple sets,
//!   systems of nested subspaces and degeneracy.
//! * [`walsh`]: integer Walsh–Hadamard transforms, measures, large spectra
//!   and Bogolyubov subspaces.
//! * [`closure`]: exact and Monte Carlo closedness, mixed energy, basic sets.
//! * [`forcing`]: agreement profiles, forcing certificates and the matrix
//!   pipeline.
//! * [`hamming`]: Hamming layers and slices, compatibility sweeps, Krawtchouk
//!   spectra and Chernoff bounds.

pub mod budget;
pub mod closure;
mod error;
pub mod forcing;
pub mod gf2;
pub mod hamming;
pub mod rational;
pub mod tensor;
pub mod walsh;

pub use budget::Budget;
pub use error::{Error, Result};
