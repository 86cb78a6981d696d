//! Lag-k autocorrelation of each patient's symptom row, used as a risk score.
//!
//! For a series `y` of length `n` with mean `m`:
//!
//! ```text
//! r_k = sum_{t=k+1..n} (y_t - m)(y_{t-k} - m) / sum_{t=1..n} (y_t - m)^2
//! ```
//!
//! The series is one patient's feature row in schema order. A constant row
//! has no variance; it is reported as `0` with `defined = false`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::scalar::Scalar;
use crate::triage::TriageCategory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutocorrError {
    #[error("series needs at least 2 values, got {0}")]
    TooShort(usize),
    #[error("lag {lag} out of range 1..={max}")]
    LagOutOfRange { lag: usize, max: usize },
    #[error("thresholds must satisfy cardiac > pro-cardiac (got {cardiac} and {pro})")]
    InvalidThresholds { cardiac: f64, pro: f64 },
}

/// A correlation value with its definedness flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Autocorrelation<T> {
    pub value: T,
    pub defined: bool,
}

pub fn autocorrelation<T: Scalar>(series: &[T], lag: usize) -> Result<Autocorrelation<T>, AutocorrError> {
    let n = series.len();
    if n < 2 {
        return Err(AutocorrError::TooShort(n));
    }
    if lag == 0 || lag >= n {
        return Err(AutocorrError::LagOutOfRange { lag, max: n - 1 });
    }
    let undefined = Autocorrelation {
        value: T::zero(),
        defined: false,
    };
    if series.iter().all(|&y| y == series[0]) {
        return Ok(undefined);
    }
    let mean = series.iter().copied().fold(T::zero(), |a, b| a + b) / T::from_count(n);
    let dev: Vec<T> = series.iter().map(|&y| y - mean).collect();
    let denom = dev.iter().fold(T::zero(), |a, &d| a + d * d);
    if !(denom > T::zero()) {
        return Ok(undefined);
    }
    let numer = dev[lag..]
        .iter()
        .zip(&dev[..n - lag])
        .fold(T::zero(), |a, (&x, &y)| a + x * y);
    Ok(Autocorrelation {
        value: numer / denom,
        defined: true,
    })
}

/// Cut-offs for turning a correlation into a category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds<T> {
    pub cardiac: T,
    pub pro_cardiac: T,
}

impl<T: Scalar> RiskThresholds<T> {
    pub fn new(cardiac: T, pro_cardiac: T) -> Result<Self, AutocorrError> {
        if cardiac > pro_cardiac {
            Ok(Self {
                cardiac,
                pro_cardiac,
            })
        } else {
            Err(AutocorrError::InvalidThresholds {
                cardiac: cardiac.to_f64_lossy(),
                pro: pro_cardiac.to_f64_lossy(),
            })
        }
    }

    /// `r >= cardiac` is Cardiac, `pro <= r < cardiac` is ProCardiac,
    /// anything else (including undefined) is Normal.
    pub fn categorize(&self, r: T, defined: bool) -> TriageCategory {
        if !defined {
            TriageCategory::Normal
        } else if r >= self.cardiac {
            TriageCategory::Cardiac
        } else if r >= self.pro_cardiac {
            TriageCategory::ProCardiac
        } else {
            TriageCategory::Normal
        }
    }
}

impl<T: Scalar> Default for RiskThresholds<T> {
    fn default() -> Self {
        Self {
            cardiac: T::from_f64(0.8).expect("representable"),
            pro_cardiac: T::from_f64(0.5).expect("representable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScore<T> {
    pub id: String,
    pub lag: usize,
    pub r: T,
    pub defined: bool,
    pub category: Option<TriageCategory>,
}

/// One uncategorized score per patient, in dataset order.
pub fn risk_scores<T: Scalar>(d: &Dataset, lag: usize) -> Result<Vec<RiskScore<T>>, AutocorrError> {
    let max = d.arity().saturating_sub(1);
    if d.arity() < 2 || lag == 0 || lag > max {
        return Err(AutocorrError::LagOutOfRange { lag, max });
    }
    d.records()
        .iter()
        .map(|rec| {
            let ac = autocorrelation(&rec.to_point::<T>(), lag)?;
            Ok(RiskScore {
                id: rec.id.clone(),
                lag,
                r: ac.value,
                defined: ac.defined,
                category: None,
            })
        })
        .collect()
}

pub fn categorize_risk<T: Scalar>(scores: &[RiskScore<T>], t: &RiskThresholds<T>) -> Vec<RiskScore<T>> {
    scores
        .iter()
        .map(|s| RiskScore {
            category: Some(t.categorize(s.r, s.defined)),
            ..s.clone()
        })
        .collect()
}

/// CSV `id,lag,r,defined,category`.
pub fn scores_to_csv<T: Scalar>(scores: &[RiskScore<T>]) -> String {
    let mut out = String::from("id,lag,r,defined,category\n");
    for s in scores {
        let category = s.category.map_or("", TriageCategory::as_str);
        out.push_str(&format!("{},{},{},{},{}\n", s.id, s.lag, s.r, s.defined, category));
    }
    out
}
