//! Exact rational node scores and miner weight schemes.
//!
//! Scores drive the drop decision in every round, and equal scores must
//! compare equal exactly: the tie-breaker rules are the mechanism under
//! study, so floating point is banned here. Floats appear only at the CSV
//! boundary for plotting.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// A node's weighted average undirected hop distance to the miners.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Score(BigRational);

impl Score {
    pub fn new(value: BigRational) -> Score {
        Score(value)
    }

    pub fn zero() -> Score {
        Score(BigRational::zero())
    }

    /// `numer / denom` in canonical form.
    pub fn from_integer_parts(numer: u64, denom: u64) -> Score {
        Score(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        ))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_value(self) -> BigRational {
        self.0
    }

    /// Lossy conversion for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Miner hashrate profiles used to weight the score.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WeightScheme {
    /// Every miner weighs `1/m`.
    Uniform,
    /// Miner `i` (1-based) weighs proportionally to `i/(i+1)`.
    Linear,
    /// Miner `i` (1-based) weighs proportionally to `(1/2)^i`.
    Exponential,
}

impl WeightScheme {
    pub fn token(self) -> &'static str {
        match self {
            WeightScheme::Uniform => "uniform",
            WeightScheme::Linear => "linear",
            WeightScheme::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<WeightScheme> {
        match s {
            "uniform" => Some(WeightScheme::Uniform),
            "linear" => Some(WeightScheme::Linear),
            "exponential" => Some(WeightScheme::Exponential),
            _ => None,
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Normalized weight vector over the `m` miners for a scheme. The raw
/// proportions are divided by their sum so the result sums to one exactly.
pub fn miner_weights(scheme: WeightScheme, m: usize) -> Vec<BigRational> {
    assert!(m >= 1, "at least one miner");
    let raw: Vec<BigRational> = match scheme {
        WeightScheme::Uniform => {
            return vec![BigRational::new(BigInt::one(), BigInt::from(m as u64)); m];
        }
        WeightScheme::Linear => (1..=m as u64)
            .map(|i| BigRational::new(BigInt::from(i), BigInt::from(i + 1)))
            .collect(),
        WeightScheme::Exponential => (1..=m as u32)
            .map(|i| BigRational::new(BigInt::one(), BigInt::from(2u8).pow(i)))
            .collect(),
    };
    let total: BigRational = raw.iter().sum();
    raw.into_iter().map(|w| w / &total).collect()
}

/// Shared validation for explicit miner weight vectors: length `m`, strictly
/// positive entries, exact sum of one.
pub fn validate_miner_weights(m: usize, weights: &[BigRational]) -> Result<(), String> {
    if weights.len() != m {
        return Err(format!(
            "weight vector covers {} miners, expected {}",
            weights.len(),
            m
        ));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
        return Err(format!("non-positive miner weight {}", w));
    }
    let total: BigRational = weights.iter().sum();
    if !total.is_one() {
        return Err(format!("weights sum to {}, expected 1", total));
    }
    Ok(())
}
