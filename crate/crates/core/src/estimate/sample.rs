use alloc::collections::BTreeMap;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleError {
    Empty,
    NegativeCount(i64),
    NegativeFrequency { count: i64, frequency: i64 },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::Empty => write!(f, "sample has no observations"),
            SampleError::NegativeCount(c) => write!(f, "negative count {c}"),
            SampleError::NegativeFrequency { count, frequency } => {
                write!(f, "negative frequency {frequency} for count {count}")
            }
        }
    }
}

impl core::error::Error for SampleError {}

/// A histogram of observed counts with its summary statistics.
///
/// The variance uses denominator `N`, matching the population moments the
/// method-of-moments estimator equates it to.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    freq: BTreeMap<u64, u64>,
    n: u64,
    n0: u64,
    total: u128,
    mean: f64,
    variance: f64,
}

impl FrequencySample {
    /// Summarises raw observations.
    pub fn from_counts<I: IntoIterator<Item = i64>>(counts: I) -> Result<Self, SampleError> {
        Self::from_histogram(counts.into_iter().map(|c| (c, 1)))
    }

    /// Summarises a `(count, frequency)` histogram. Zero frequencies are
    /// ignored and repeated counts are accumulated.
    pub fn from_histogram<I: IntoIterator<Item = (i64, i64)>>(
        rows: I,
    ) -> Result<Self, SampleError> {
        let mut freq = BTreeMap::new();
        for (count, frequency) in rows {
            if count < 0 {
                return Err(SampleError::NegativeCount(count));
            }
            if frequency < 0 {
                return Err(SampleError::NegativeFrequency { count, frequency });
            }
            if frequency > 0 {
                *freq.entry(count as u64).or_insert(0) += frequency as u64;
            }
        }
        Self::from_map(freq)
    }

    /// Summarises an already-validated histogram.
    pub fn from_map(mut freq: BTreeMap<u64, u64>) -> Result<Self, SampleError> {
        freq.retain(|_, f| *f > 0);
        let n: u64 = freq.values().sum();
        if n == 0 {
            return Err(SampleError::Empty);
        }
        let n0 = freq.get(&0).copied().unwrap_or(0);
        let total: u128 = freq.iter().map(|(&y, &f)| y as u128 * f as u128).sum();
        let mean = total as f64 / n as f64;
        let variance = freq
            .iter()
            .map(|(&y, &f)| {
                let d = y as f64 - mean;
                f as f64 * d * d
            })
            .sum::<f64>()
            / n as f64;
        Ok(FrequencySample {
            freq,
            n,
            n0,
            total,
            mean,
            variance,
        })
    }

    /// Total number of observations `N`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of zero observations `N₀`.
    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// Sum of all observed counts, `m · N`.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with denominator `N`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn max_count(&self) -> u64 {
        self.freq.keys().next_back().copied().unwrap_or(0)
    }

    pub fn frequency(&self, y: u64) -> u64 {
        self.freq.get(&y).copied().unwrap_or(0)
    }

    pub fn histogram(&self) -> &BTreeMap<u64, u64> {
        &self.freq
    }

    /// `(count, frequency)` pairs in increasing count order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.freq.iter().map(|(&y, &f)| (y, f))
    }

    pub(crate) fn nonzero(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.iter().filter(|&(y, _)| y != 0)
    }

    pub fn is_all_zero(&self) -> bool {
        self.n0 == self.n
    }
}
