//! Coherent front end and single-tap LMS carrier phase estimation.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytics::SymbolClock;
use crate::error::{Error, Result};
use crate::modem::Constellation;
use crate::noise::{apply_phase, PhaseTrajectory, Rotation};
use crate::signal::ComplexSignal;

/// Ideal homodyne mixing with the LO: out[k] = in[k]·exp(−j·θ_LO[k]).
pub fn mix_with_lo(signal: &ComplexSignal, lo_phase: &PhaseTrajectory) -> Result<ComplexSignal> {
    apply_phase(signal, lo_phase, Rotation::Conjugate)
}

/// Every `samples_per_symbol`-th sample starting at `offset`.
pub fn downsample_to_symbols(
    signal: &ComplexSignal,
    clock: &SymbolClock,
    offset: usize,
) -> Result<Vec<Complex64>> {
    let sps = clock.samples_per_symbol();
    if offset >= sps {
        return Err(Error::domain(format!(
            "sampling offset {offset} must be below samples_per_symbol {sps}"
        )));
    }
    Ok(signal
        .samples()
        .iter()
        .skip(offset)
        .step_by(sps)
        .copied()
        .collect())
}

/// State of the single-tap LMS phase tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmsState {
    pub tap: Complex64,
    pub mu: f64,
    pub training_len: usize,
}

impl LmsState {
    pub fn new(tap: Complex64, mu: f64, training_len: usize) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::domain(format!(
                "LMS step must lie in (0, 1), got {mu}"
            )));
        }
        if !(tap.re.is_finite() && tap.im.is_finite()) {
            return Err(Error::domain("LMS tap must be finite"));
        }
        Ok(Self {
            tap,
            mu,
            training_len,
        })
    }

    /// Least-squares tap over the training prefix,
    /// w₀ = Σ d·conj(x) / Σ |x|².
    pub fn from_training(received: &[Complex64], training: &[Complex64], mu: f64) -> Result<Self> {
        if received.len() < training.len() {
            return Err(Error::domain("training prefix longer than received block"));
        }
        let num: Complex64 = training
            .iter()
            .zip(received)
            .map(|(d, x)| d * x.conj())
            .sum();
        let den: f64 = received[..training.len()]
            .iter()
            .map(|x| x.norm_sqr())
            .sum();
        let tap = if den > 0.0 {
            num / den
        } else {
            Complex64::new(1.0, 0.0)
        };
        Self::new(tap, mu, training.len())
    }
}

/// Decision-directed single-tap LMS.
///
/// y[n] = w·x[n]; the reference d[n] is the training symbol for
/// n < training_len and the hard decision on y[n] afterwards;
/// w ← w + μ·(d[n] − y[n])·conj(x[n]).
pub fn cpe_lms(
    symbols: &[Complex64],
    reference_prefix: &[Complex64],
    state: LmsState,
    constellation: &Constellation,
) -> Result<(Vec<Complex64>, LmsState)> {
    if symbols.is_empty() {
        return Err(Error::domain("no symbols to track"));
    }
    if reference_prefix.len() != state.training_len {
        return Err(Error::domain(format!(
            "training prefix has {} symbols, state expects {}",
            reference_prefix.len(),
            state.training_len
        )));
    }
    if state.training_len > symbols.len() {
        return Err(Error::domain(
            "training prefix longer than the symbol block",
        ));
    }
    let mut w = state.tap;
    let mu = state.mu;
    let out = symbols
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let y = w * x;
            let d = reference_prefix
                .get(n)
                .copied()
                .unwrap_or_else(|| constellation.decide(y));
            w += mu * (d - y) * x.conj();
            y
        })
        .collect();
    Ok((out, LmsState { tap: w, ..state }))
}

/// Known pilot groups interleaved with the payload after the training
/// prefix: `len` pilots at the start of every `period` symbols. A period of
/// zero disables pilots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotPattern {
    pub period: usize,
    pub len: usize,
}

impl Default for PilotPattern {
    fn default() -> Self {
        Self { period: 64, len: 4 }
    }
}

impl PilotPattern {
    pub const fn none() -> Self {
        Self { period: 0, len: 0 }
    }

    pub fn is_enabled(&self) -> bool {
        self.period > 0 && self.len > 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.period > 0 && self.len >= self.period {
            return Err(Error::domain(format!(
                "pilot group of {} symbols does not fit a period of {}",
                self.len, self.period
            )));
        }
        Ok(())
    }

    /// Whether symbol `i` of a block is a pilot, given the training length.
    pub fn is_pilot(&self, i: usize, training_len: usize) -> bool {
        self.is_enabled() && i >= training_len && (i - training_len) % self.period < self.len
    }

    /// Payload symbols among the `n` symbols following the training prefix.
    pub fn data_symbols(&self, n: usize) -> usize {
        if !self.is_enabled() {
            return n;
        }
        let full = n / self.period;
        let rest = n % self.period;
        n - full * self.len - rest.min(self.len)
    }
}

/// Output of [`cpe_lms_pilot_aided`].
#[derive(Debug, Clone, PartialEq)]
pub struct CpeOutput {
    pub symbols: Vec<Complex64>,
    pub state: LmsState,
    /// Quadrant corrections applied at pilot groups.
    pub slip_corrections: usize,
}

/// [`cpe_lms`] with pilot-aided cycle-slip correction.
///
/// `known` holds the transmitted symbols; only the training prefix and the
/// pilot positions are read from it. Before each pilot group the quadrant
/// of Σ w·x·conj(d) over the group is estimated with the current tap, and
/// the tap is rotated by the opposite multiple of π/2. Pilot symbols then
/// drive data-aided updates like the training prefix.
pub fn cpe_lms_pilot_aided(
    symbols: &[Complex64],
    known: &[Complex64],
    state: LmsState,
    pilots: &PilotPattern,
    constellation: &Constellation,
) -> Result<CpeOutput> {
    if symbols.is_empty() {
        return Err(Error::domain("no symbols to track"));
    }
    if known.len() != symbols.len() {
        return Err(Error::domain(format!(
            "{} known symbols for a block of {}",
            known.len(),
            symbols.len()
        )));
    }
    if state.training_len > symbols.len() {
        return Err(Error::domain(
            "training prefix longer than the symbol block",
        ));
    }
    pilots.validate()?;

    let train = state.training_len;
    let mu = state.mu;
    let mut w = state.tap;
    let mut corrections = 0;
    let mut out = Vec::with_capacity(symbols.len());
    for (n, &x) in symbols.iter().enumerate() {
        let pilot = pilots.is_pilot(n, train);
        if pilot && (n - train).is_multiple_of(pilots.period) {
            let end = (n + pilots.len).min(symbols.len());
            let rho: Complex64 = (n..end).map(|m| w * symbols[m] * known[m].conj()).sum();
            let quadrant = (rho.arg() / FRAC_PI_2).round();
            if quadrant != 0.0 {
                w *= Complex64::from_polar(1.0, -quadrant * FRAC_PI_2);
                corrections += 1;
            }
        }
        let y = w * x;
        let d = if n < train || pilot {
            known[n]
        } else {
            constellation.decide(y)
        };
        w += mu * (d - y) * x.conj();
        out.push(y);
    }
    Ok(CpeOutput {
        symbols: out,
        state: LmsState { tap: w, ..state },
        slip_corrections: corrections,
    })
}
