use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};

/// Uniformly sampled complex baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_period: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        ensure_positive("sample_period", sample_period)?;
        if samples.is_empty() {
            return Err(Error::domain("signal must hold at least one sample"));
        }
        if samples
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(Error::domain("signal samples must be finite"));
        }
        Ok(Self {
            samples,
            sample_period,
        })
    }

    /// Builds a signal from samples already known to satisfy the invariants.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_period: f64) -> Self {
        debug_assert!(!samples.is_empty() && sample_period > 0.0);
        Self {
            samples,
            sample_period,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}
