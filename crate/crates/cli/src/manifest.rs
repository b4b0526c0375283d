use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use closurelab::closure::{at_most_weight, layer_prefix_set, layers, middle_layers, random_translate_union, sample_stream};
use closurelab::gf2::{BitVector, Subspace};
use closurelab::hamming::RadiusKind;
use closurelab::rational::{self, Rational};
use closurelab::tensor::{Tensor, TensorShape};
use closurelab::walsh::{GroupMultiset, GroupSet};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Closedness,
    Spectrum,
    Bogolyubov,
    ForcingPipeline,
    SimpleSet,
    Lsystem,
    Counterexample,
    Scenarios,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_group_exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<u64>,
    /// Cap on the number of factor tuples a witness search may range over.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_budget: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// One experiment: a command, its parameters and the knobs around it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub command: Command,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// The typed parameters; unknown keys are rejected.
    pub fn params<P: serde::de::DeserializeOwned>(&self) -> Result<P, CliError> {
        let map: serde_json::Map<String, Value> = self.params.clone().into_iter().collect();
        serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Validation(format!("params: {e}")))
    }
}

fn default_b() -> String {
    "basis".into()
}
fn default_samples() -> u64 {
    100_000
}
fn default_confidence() -> f64 {
    0.99
}
fn default_delta() -> String {
    "1/2".into()
}
fn default_epsilon() -> String {
    "1/32".into()
}
fn default_l() -> usize {
    1
}
fn default_ns() -> Vec<u32> {
    vec![36, 49, 64]
}
fn default_c() -> f64 {
    0.1
}
fn default_conc_n() -> u32 {
    100
}
fn default_conc_w() -> u32 {
    10
}
fn default_threshold() -> String {
    "0.98".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosednessParams {
    pub n: u32,
    /// Set language, see [`parse_set`].
    pub a: String,
    #[serde(default = "default_b")]
    pub b: String,
    #[serde(default)]
    pub exact: bool,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub radius: RadiusKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub n: u32,
    pub set: String,
    /// Lists `{r : |1̂_A(r)| ≥ threshold}` when given.
    #[serde(default)]
    pub threshold: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BogolyubovParams {
    pub n: u32,
    pub set: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingParams {
    pub shape: Vec<usize>,
    #[serde(default = "default_delta")]
    pub delta: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: String,
    #[serde(default = "default_l")]
    pub l: usize,
}

/// `H_I` given by rows spanning it, in the vector hex form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub axes: Vec<usize>,
    pub rows: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleSetParams {
    pub shape: Vec<usize>,
    #[serde(default)]
    pub spaces: Vec<SpaceSpec>,
    #[serde(default)]
    pub translate: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsystemParams {
    pub shape: Vec<usize>,
    #[serde(default = "default_delta")]
    pub delta: String,
    /// Optional subspace-form simple set to intersect the system with.
    #[serde(default)]
    pub simple: Option<Vec<SpaceSpec>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleParams {
    #[serde(default = "default_ns")]
    pub n: Vec<u32>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub radius: RadiusKind,
    #[serde(default = "default_conc_n")]
    pub concentration_n: u32,
    #[serde(default = "default_conc_w")]
    pub concentration_w: u32,
    #[serde(default = "default_threshold")]
    pub threshold: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenariosParams {}

pub fn parse_rational(s: &str, what: &str) -> Result<Rational, CliError> {
    rational::parse(s).ok_or_else(|| CliError::Validation(format!("{what}: cannot read {s:?} as a rational")))
}

pub fn parse_shape(dims: &[usize]) -> Result<TensorShape, CliError> {
    Ok(TensorShape::new(dims.to_vec())?)
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::Validation(format!("bad integer {t:?}"))))
        .collect()
}

fn parse_hex_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| u64::from_str_radix(t.trim(), 16).map_err(|_| CliError::Validation(format!("bad hex element {t:?}"))))
        .collect()
}

/// Set language, elements as integer hex:
///
/// `middle` · `layers:W,W` · `at-most:W` · `prefix:M:W,W` · `basis` ·
/// `elements:HEX,HEX` · `random:P/Q` · `translates:COUNT`.
/// Random forms draw from the manifest seed.
pub fn parse_set(spec: &str, n: u32, seed: u64) -> Result<GroupSet, CliError> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let set = match head {
        "middle" => middle_layers(n)?,
        "layers" => layers(n, &parse_u32_list(rest)?)?,
        "at-most" => at_most_weight(n, rest.parse().map_err(|_| CliError::Validation(format!("bad weight in {spec:?}")))?)?,
        "prefix" => {
            let (m, ws) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Validation(format!("prefix needs M:weights, got {spec:?}")))?;
            let m = m.parse().map_err(|_| CliError::Validation(format!("bad prefix length in {spec:?}")))?;
            layer_prefix_set(n, m, &parse_u32_list(ws)?)?
        }
        "basis" => GroupSet::from_elements(n, (0..n).map(|i| 1u64 << i))?,
        "elements" => GroupSet::from_elements(n, parse_hex_list(rest)?)?,
        "random" => {
            let p = parse_rational(rest, "random density")?;
            let num: u64 = p.numer().try_into().map_err(|_| CliError::Validation("density numerator".into()))?;
            let den: u64 = p.denom().try_into().map_err(|_| CliError::Validation("density denominator".into()))?;
            let mut rng = sample_stream(seed, 0);
            let set = GroupSet::from_predicate(n, |_| rng.random_range(0..den) < num)?;
            if set.is_empty() {
                GroupSet::from_elements(n, [0])?
            } else {
                set
            }
        }
        "translates" => {
            let count = rest.parse().map_err(|_| CliError::Validation(format!("bad count in {spec:?}")))?;
            random_translate_union(n, count, seed)?.set
        }
        _ => return Err(CliError::Validation(format!("unknown set form {spec:?}"))),
    };
    Ok(set)
}

/// Multiset form: the same language, every element with multiplicity one.
pub fn parse_multiset(spec: &str, n: u32, seed: u64) -> Result<GroupMultiset, CliError> {
    Ok(GroupMultiset::from_set(&parse_set(spec, n, seed)?)?)
}

pub fn parse_spaces(shape: &TensorShape, specs: &[SpaceSpec]) -> Result<BTreeMap<Vec<usize>, Subspace>, CliError> {
    let mut out = BTreeMap::new();
    for s in specs {
        let len = shape.split(&s.axes)?.inner_total();
        let rows = s
            .rows
            .iter()
            .map(|r| Ok(BitVector::from_hex(r, len)?))
            .collect::<Result<Vec<_>, CliError>>()?;
        if out.insert(s.axes.clone(), closurelab::gf2::rref(len, &rows)?).is_some() {
            return Err(CliError::Validation(format!("axes {:?} given twice", s.axes)));
        }
    }
    Ok(out)
}

pub fn parse_tensor(shape: &TensorShape, hex: &str) -> Result<Tensor, CliError> {
    Ok(Tensor::from_data(shape, BitVector::from_hex(hex, shape.total())?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"command":"scenarios","colour":1}"#;
        assert!(serde_json::from_str::<ExperimentManifest>(bad).is_err());
        let m: ExperimentManifest = serde_json::from_str(r#"{"command":"closedness","params":{"n":5,"a":"middle","x":1}}"#).unwrap();
        assert!(m.params::<ClosednessParams>().is_err());
        let bad_budget = r#"{"command":"scenarios","budgets":{"max_time":1}}"#;
        assert!(serde_json::from_str::<ExperimentManifest>(bad_budget).is_err());
    }

    #[test]
    fn set_language() {
        assert_eq!(parse_set("middle", 5, 0).unwrap().size(), 20);
        assert_eq!(parse_set("layers:0,5", 5, 0).unwrap().size(), 2);
        assert_eq!(parse_set("basis", 4, 0).unwrap().elements(), vec![1, 2, 4, 8]);
        assert_eq!(parse_set("elements:a,3", 4, 0).unwrap().elements(), vec![3, 10]);
        assert_eq!(parse_set("random:1/2", 8, 3).unwrap(), parse_set("random:1/2", 8, 3).unwrap());
        assert!(parse_set("bogus", 4, 0).is_err());
    }
}
