use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CensusError;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Sighting counts for one occasion pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusInput {
    /// Individuals seen on the first occasion (`n`).
    #[serde(rename = "n")]
    pub first: u64,
    /// Individuals seen on the second occasion (`K`).
    #[serde(rename = "K")]
    pub second: u64,
    /// Individuals seen on both (`k`).
    #[serde(rename = "k")]
    pub recaptured: u64,
}

impl CensusInput {
    pub fn new(first: u64, second: u64, recaptured: u64) -> Result<Self, CensusError> {
        if recaptured > first.min(second) {
            return Err(CensusError::InvalidCounts { first, second, recaptured });
        }
        Ok(CensusInput { first, second, recaptured })
    }

    /// Distinct individuals seen on either occasion, `n + K - k`.
    pub fn distinct(&self) -> u64 {
        self.first + self.second - self.recaptured
    }

    pub fn swapped(&self) -> Self {
        CensusInput { first: self.second, second: self.first, recaptured: self.recaptured }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    LincolnPetersen,
    Chapman,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::LincolnPetersen => "lincoln-petersen",
            Estimator::Chapman => "chapman",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = CensusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lincoln-petersen" | "lincoln_petersen" | "lp" | "petersen" => Ok(Estimator::LincolnPetersen),
            "chapman" => Ok(Estimator::Chapman),
            _ => Err(CensusError::UnknownEstimator(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusEstimate {
    pub input: CensusInput,
    pub estimator: Estimator,
    pub n_est: f64,
    pub variance: Option<f64>,
    pub ci95: Option<(f64, f64)>,
}

impl CensusEstimate {
    pub fn ci_contains(&self, value: f64) -> Option<bool> {
        self.ci95.map(|(lo, hi)| lo <= value && value <= hi)
    }
}

/// `N = K·n / k`. No variance is attached.
pub fn lincoln_petersen(input: CensusInput) -> Result<CensusEstimate, CensusError> {
    if input.recaptured == 0 {
        return Err(CensusError::UndefinedEstimate);
    }
    let n_est = (input.second as f64 * input.first as f64) / input.recaptured as f64;
    Ok(CensusEstimate { input, estimator: Estimator::LincolnPetersen, n_est, variance: None, ci95: None })
}

/// Chapman's bias-corrected estimator with the Seber variance and a normal
/// 95% interval. Defined for `k = 0`.
///
/// ```text
/// N   = (n+1)(K+1)/(k+1) - 1
/// var = (n+1)(K+1)(n-k)(K-k) / ((k+1)^2 (k+2))
/// ```
pub fn chapman(input: CensusInput) -> CensusEstimate {
    let n = input.first as f64;
    let big_k = input.second as f64;
    let k = input.recaptured as f64;
    let n_est = (n + 1.0) * (big_k + 1.0) / (k + 1.0) - 1.0;
    let variance = (n + 1.0) * (big_k + 1.0) * (n - k) * (big_k - k) / ((k + 1.0) * (k + 1.0) * (k + 2.0));
    let half = Z_95 * variance.sqrt();
    CensusEstimate {
        input,
        estimator: Estimator::Chapman,
        n_est,
        variance: Some(variance),
        ci95: Some((n_est - half, n_est + half)),
    }
}

pub fn estimate(input: CensusInput, estimator: Estimator) -> Result<CensusEstimate, CensusError> {
    match estimator {
        Estimator::LincolnPetersen => lincoln_petersen(input),
        Estimator::Chapman => Ok(chapman(input)),
    }
}
