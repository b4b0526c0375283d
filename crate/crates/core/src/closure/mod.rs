//! Measuring `(B,η)`-closedness: `|{(a,b) ∈ A×B : a+b ∈ A}| ≥ η|A||B|`.

mod basic;
mod examples;
mod measure;
mod sampled;

pub use basic::{basic_set, basic_set_intersection, BasicKind, BasicSet, BasicSpec};
pub use examples::{
    at_most_weight, cosets_separated, layer_prefix_set, layers, middle_layers, random_translate_union,
    TranslateFixture,
};
pub use measure::{closedness_exact, mixed_energy, triangle_compose, TriangleReport, PAIR_BUDGET};
pub use sampled::{closedness_sampled, sample_stream, MultisetSampler};

use num_bigint::BigInt;
use serde::ser::SerializeMap;
use serde::Serialize;

use crate::hamming::RadiusKind;
use crate::rational::Rational;

/// An exact or sampled closedness measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosednessReport {
    Exact {
        /// `pair_count / (|A|·|B|)`, reduced.
        eta: Rational,
        pair_count: BigInt,
        a_size: u64,
        b_total: u64,
    },
    Sampled {
        estimate: f64,
        hits: u64,
        radius: f64,
        radius_kind: RadiusKind,
        confidence: f64,
        samples: u64,
        seed: u64,
    },
}

impl ClosednessReport {
    pub fn exact_eta(&self) -> Option<&Rational> {
        match self {
            ClosednessReport::Exact { eta, .. } => Some(eta),
            ClosednessReport::Sampled { .. } => None,
        }
    }

    /// Point value as a float in either mode.
    pub fn value(&self) -> f64 {
        match self {
            ClosednessReport::Exact { eta, .. } => crate::rational::to_f64(eta),
            ClosednessReport::Sampled { estimate, .. } => *estimate,
        }
    }
}

impl Serialize for ClosednessReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ClosednessReport::Exact {
                eta,
                pair_count,
                a_size,
                b_total,
            } => {
                let mut m = s.serialize_map(Some(6))?;
                m.serialize_entry("mode", "exact")?;
                m.serialize_entry("eta_num", &eta.numer().to_string())?;
                m.serialize_entry("eta_den", &eta.denom().to_string())?;
                m.serialize_entry("pair_count", &pair_count.to_string())?;
                m.serialize_entry("a_size", a_size)?;
                m.serialize_entry("b_total", b_total)?;
                m.end()
            }
            ClosednessReport::Sampled {
                estimate,
                hits,
                radius,
                radius_kind,
                confidence,
                samples,
                seed,
            } => {
                let mut m = s.serialize_map(Some(8))?;
                m.serialize_entry("mode", "sampled")?;
                m.serialize_entry("estimate", estimate)?;
                m.serialize_entry("hits", hits)?;
                m.serialize_entry("radius", radius)?;
                m.serialize_entry("radius_kind", radius_kind)?;
                m.serialize_entry("confidence", confidence)?;
                m.serialize_entry("samples", samples)?;
                m.serialize_entry("seed", seed)?;
                m.end()
            }
        }
    }
}
