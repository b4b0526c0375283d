use serde::Serialize;

use crate::{Error, Result};

/// Parameters of `P(X ≥ E[X] + λ) ≤ exp(−λ²/(2(Var(X) + Mλ/3)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffParams {
    pub variance: f64,
    /// One-sided bound on `X_i − E[X_i]`.
    pub m: f64,
    pub lambda: f64,
}

/// The bound, kept in the log domain so tiny values are not lost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffValue {
    /// `−λ²/(2(Var + Mλ/3))`; `−∞` in the degenerate case.
    pub log_value: f64,
    /// `exp(log_value)`, possibly 0 after underflow.
    pub value: f64,
    /// Set when `value` is 0 although the true bound is positive, or when the
    /// denominator vanishes and the bound is the 0-limit.
    pub underflow: bool,
}

pub fn chernoff_bound(p: ChernoffParams) -> Result<ChernoffValue> {
    if [p.variance, p.m, p.lambda].iter().any(|x| x.is_nan() || *x < 0.0) {
        return Err(Error::Precondition(format!(
            "variance, M and λ must be nonnegative, got {p:?}"
        )));
    }
    if p.lambda == 0.0 {
        return Ok(ChernoffValue {
            log_value: 0.0,
            value: 1.0,
            underflow: false,
        });
    }
    let denom = 2.0 * (p.variance + p.m * p.lambda / 3.0);
    if denom == 0.0 {
        return Ok(ChernoffValue {
            log_value: f64::NEG_INFINITY,
            value: 0.0,
            underflow: true,
        });
    }
    // λ²/denom computed as λ·(λ/denom) to stay finite for large λ
    let log_value = -(p.lambda * (p.lambda / denom));
    let value = log_value.exp();
    Ok(ChernoffValue {
        log_value,
        value,
        underflow: value == 0.0,
    })
}

fn confidence_log(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Precondition(format!("confidence {confidence} outside (0,1)")));
    }
    Ok((2.0 / (1.0 - confidence)).ln())
}

/// Two-sided Hoeffding radius for the mean of `samples` values in `[0,1]`:
/// `sqrt(ln(2/(1−conf)) / (2N))`.
pub fn hoeffding_radius(samples: u64, confidence: f64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    Ok((confidence_log(confidence)? / (2.0 * samples as f64)).sqrt())
}

/// Two-sided radius from the Chernoff form above for the mean of `samples`
/// indicators (`Var ≤ N/4`, `M = 1`): with `L = ln(2/(1−conf))` the deviation
/// of the sum is `λ = L/3 + sqrt(L²/9 + LN/2)`.
pub fn chernoff_radius(samples: u64, confidence: f64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is needed".into()));
    }
    let l = confidence_log(confidence)?;
    let n = samples as f64;
    let lambda = l / 3.0 + (l * l / 9.0 + l * n / 2.0).sqrt();
    Ok(lambda / n)
}

/// Which radius a sampled report carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    #[default]
    Hoeffding,
    Chernoff,
}

impl RadiusKind {
    pub fn radius(self, samples: u64, confidence: f64) -> Result<f64> {
        match self {
            RadiusKind::Hoeffding => hoeffding_radius(samples, confidence),
            RadiusKind::Chernoff => chernoff_radius(samples, confidence),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_lambda_is_one() {
        let v = chernoff_bound(ChernoffParams { variance: 3.0, m: 1.0, lambda: 0.0 }).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn degenerate_denominator_is_flagged() {
        let v = chernoff_bound(ChernoffParams { variance: 0.0, m: 0.0, lambda: 2.0 }).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.underflow);
        assert!(chernoff_bound(ChernoffParams { variance: -1.0, m: 0.0, lambda: 1.0 }).is_err());
    }

    #[test]
    fn radii_at_ninety_nine_percent() {
        let h = hoeffding_radius(100_000, 0.99).unwrap();
        assert!((h - ((200f64).ln() / 200_000.0).sqrt()).abs() < 1e-15);
        let c = chernoff_radius(100_000, 0.99).unwrap();
        assert!(c > 0.0 && c < 0.01);
    }

    proptest! {
        #[test]
        fn monotone_in_lambda_and_variance(var in 0.0f64..1e6, m in 0.0f64..1e3, l1 in 0.0f64..1e4, dl in 0.0f64..1e4, dv in 0.0f64..1e6) {
            let a = chernoff_bound(ChernoffParams { variance: var, m, lambda: l1 }).unwrap();
            let b = chernoff_bound(ChernoffParams { variance: var, m, lambda: l1 + dl }).unwrap();
            prop_assert!(b.log_value <= a.log_value);
            let c = chernoff_bound(ChernoffParams { variance: var + dv, m, lambda: l1 }).unwrap();
            prop_assert!(c.log_value >= a.log_value);
        }
    }
}
