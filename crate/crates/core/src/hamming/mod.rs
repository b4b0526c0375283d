//! Hamming layers and slices: compatibility sweeps, slice spectra and the
//! concentration bound used to control them.

mod chernoff;
mod compat;
mod krawtchouk;
mod layer;
mod scenarios;

pub use chernoff::{chernoff_bound, chernoff_radius, hoeffding_radius, ChernoffParams, ChernoffValue, RadiusKind};
pub use compat::{
    compatibility_exact, compatibility_fraction, integer_dot_condition, slice_compatible_weight, slice_good_count,
    weight_nonincreasing, CompatibilityEstimate, SliceSubset,
};
pub use krawtchouk::{
    fourier_concentration, krawtchouk, slice_concentration, slice_mu_hat, Concentration, SliceConcentration,
    SliceSpectrumRow,
};
pub use layer::{binomial, LayerSampler, LayerSet, SliceSet};
pub use scenarios::{
    basis_walk_counts, counterexample_scenarios, layer_slice_closedness, Relation, ScenarioReport, ScenarioRow,
};

pub(crate) fn serialize_biguint<S: serde::Serializer>(v: &num_bigint::BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}
