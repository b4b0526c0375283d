//! Exact Walsh–Hadamard analysis on `F₂ⁿ`.

mod group;
mod spectrum;
mod transform;

pub use group::{GroupMultiset, GroupSet};
pub(crate) use group::{check_dense_exponent, check_exponent, mask};
pub(crate) use spectrum::ExactSum;
pub use spectrum::{bogolyubov, large_spectrum, mu_hat, spectral_closedness, BogolyubovResult, MuHat, Spectrum};
pub use transform::{character_sum, parseval_checks_passed, parseval_holds, wht, wht_invocations, WhtInt};
