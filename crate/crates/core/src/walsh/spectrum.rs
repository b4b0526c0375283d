use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use super::transform::wht;
use super::{GroupMultiset, GroupSet};
use crate::gf2::{BitVector, PackedBasis, Subspace};
use crate::rational::{ratio, Rational};
use crate::{Error, Result};

/// `coeffs[r] = Σ_x f(x)(−1)^{r·x}` for an integer-valued `f` on `F₂ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    n: u32,
    coeffs: Vec<i64>,
}

impl Spectrum {
    pub fn of_function(f: &[i64]) -> Result<Self> {
        let coeffs = wht(f)?;
        Ok(Spectrum {
            n: f.len().trailing_zeros(),
            coeffs,
        })
    }

    /// Spectrum of `1_A`; `coeffs[r]/2ⁿ = 1̂_A(r)`.
    pub fn of_set(a: &GroupSet) -> Result<Self> {
        Self::of_function(&a.indicator()?)
    }

    /// Spectrum of the multiplicity function of `B`.
    pub fn of_multiset(b: &GroupMultiset) -> Result<Self> {
        Self::of_function(&b.counts()?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn get(&self, r: u64) -> i64 {
        self.coeffs[r as usize]
    }

    /// The normalized coefficient `coeffs[r] / 2ⁿ`.
    pub fn fourier(&self, r: u64) -> Rational {
        ratio(self.coeffs[r as usize], BigInt::from(1) << self.n)
    }

    /// RFC-4180 rows `r,coeff` with `r` in hex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,coeff\r\n");
        for (r, c) in self.coeffs.iter().enumerate() {
            out.push_str(&BitVector::from_index(self.n as usize, r as u64).to_hex());
            out.push(',');
            out.push_str(&c.to_string());
            out.push_str("\r\n");
        }
        out
    }
}

/// `μ̂_B(r) = numer[r] / total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuHat {
    spectrum: Spectrum,
    total: u64,
}

impl MuHat {
    pub fn numerators(&self) -> &[i64] {
        self.spectrum.coeffs()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, r: u64) -> Rational {
        ratio(self.spectrum.get(r), self.total)
    }
}

/// `μ̂_B(r) = (Σ_b mult(b)(−1)^{r·b}) / |B|`.
pub fn mu_hat(b: &GroupMultiset) -> Result<MuHat> {
    Ok(MuHat {
        spectrum: Spectrum::of_multiset(b)?,
        total: b.total(),
    })
}

/// Sums a stream of exact products in `i128`, spilling into `BigInt`.
#[derive(Default)]
pub(crate) struct ExactSum {
    acc: i128,
    spill: BigInt,
}

impl ExactSum {
    pub(crate) fn add_product(&mut self, factors: &[i128]) {
        let mut p: Option<i128> = Some(1);
        for &f in factors {
            p = p.and_then(|q| q.checked_mul(f));
        }
        match p {
            Some(v) => match self.acc.checked_add(v) {
                Some(s) => self.acc = s,
                None => {
                    self.spill += BigInt::from(self.acc) + BigInt::from(v);
                    self.acc = 0;
                }
            },
            None => {
                let big: BigInt = factors.iter().map(|&f| BigInt::from(f)).product();
                self.spill += big;
            }
        }
    }

    pub(crate) fn value(&self) -> BigInt {
        &self.spill + BigInt::from(self.acc)
    }
}

fn same_group(a: &GroupSet, b: &GroupMultiset) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n() as usize,
            found: b.n() as usize,
        });
    }
    Ok(())
}

/// `Σ_r cA[r]² μ̂_B(r) / Σ_r cA[r]²`, which is the pair fraction
/// `|{(a,b): a+b∈A}| / (|A|·|B|)` by the convolution law.
pub fn spectral_closedness(a: &GroupSet, b: &GroupMultiset) -> Result<Rational> {
    same_group(a, b)?;
    if a.is_empty() {
        return Err(Error::Empty("set A"));
    }
    let sa = Spectrum::of_set(a)?;
    let sb = Spectrum::of_multiset(b)?;
    let mut num = ExactSum::default();
    let mut den = ExactSum::default();
    for (&ca, &cb) in sa.coeffs().iter().zip(sb.coeffs()) {
        let ca = ca as i128;
        num.add_product(&[ca, ca, cb as i128]);
        den.add_product(&[ca, ca]);
    }
    Ok(Rational::new(num.value(), den.value() * BigInt::from(b.total())))
}

/// `{r : |1̂_A(r)| ≥ threshold}` in increasing order.
pub fn large_spectrum(a: &GroupSet, threshold: &Rational) -> Result<Vec<u64>> {
    if !threshold.is_positive() {
        return Err(Error::Precondition("threshold must be positive".into()));
    }
    let s = Spectrum::of_set(a)?;
    // |c| / 2ⁿ ≥ p/q  ⟺  |c|·q ≥ p·2ⁿ
    let lhs_scale = threshold.denom().clone();
    let rhs = threshold.numer() << a.n();
    Ok(s
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| BigInt::from(c.abs()) * &lhs_scale >= rhs)
        .map(|(r, _)| r as u64)
        .collect())
}

/// Output of the constructive Bogolyubov step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BogolyubovResult {
    /// `V = span(Spec)^⊥`.
    pub subspace: Subspace,
    /// `Spec = {r : 2·cS[r]²·2ⁿ ≥ |S|³}`, i.e. `|1̂_S(r)|² ≥ α³/2`.
    #[serde(serialize_with = "serialize_hex_list")]
    pub spectrum: Vec<u64>,
    /// `⌊2/α²⌋`, the proven bound on `codim V`.
    pub codim_bound: u64,
    /// Smallest value of the four-fold representation count on `V`.
    #[serde(serialize_with = "serialize_bigint")]
    pub min_representations: BigInt,
}

fn serialize_hex_list<S: serde::Serializer>(v: &[u64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| format!("{x:x}")))
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Extracts `V ⊆ S+S+S+S` of codimension at most `2/α²`.
///
/// Every `x ∈ V` is verified to have `Σ_r cS[r]⁴(−1)^{r·x} > 0`, i.e. a
/// positive number of representations `s₁+s₂+s₃+s₄ = x`. A failure is a defect.
pub fn bogolyubov(s: &GroupSet) -> Result<BogolyubovResult> {
    if s.is_empty() {
        return Err(Error::Empty("set S"));
    }
    let n = s.n();
    let spec = Spectrum::of_set(s)?;
    let size = BigInt::from(s.size());
    let cube = &size * &size * &size;
    let large: Vec<u64> = spec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| (BigInt::from(c) * BigInt::from(c) * 2) << n >= cube)
        .map(|(r, _)| r as u64)
        .collect();
    let basis = PackedBasis::spanned_by(large.iter().copied());
    let v = basis.to_subspace(n as usize).orthogonal_complement();

    // 2/α² = 2·4ⁿ/|S|²
    let bound_big = (BigInt::from(2) << (2 * n)) / (&size * &size);
    let codim_bound = u64::try_from(bound_big).unwrap_or(u64::MAX);
    if v.codim() as u64 > codim_bound {
        return Err(Error::Internal(format!(
            "codimension {} exceeds the bound {codim_bound}",
            v.codim()
        )));
    }

    let fourth: Vec<i128> = spec
        .coeffs()
        .iter()
        .map(|&c| {
            let c = c as i128;
            c * c * c * c
        })
        .collect();
    let reps = wht(&fourth)?;
    let mut min_rep: Option<i128> = None;
    for x in v.enumerate_indices()? {
        let r = reps[x as usize];
        if r <= 0 {
            return Err(Error::Internal(format!(
                "element {x:#x} of the Bogolyubov subspace has no four-fold representation"
            )));
        }
        min_rep = Some(min_rep.map_or(r, |m: i128| m.min(r)));
    }
    // reps[x] = 2ⁿ · #{(s₁,…,s₄) : Σ s_i = x}
    let min_representations = BigInt::from(min_rep.unwrap_or(0)) >> n;
    Ok(BogolyubovResult {
        subspace: v,
        spectrum: large,
        codim_bound,
        min_representations,
    })
}
