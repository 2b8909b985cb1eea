//! Chromatic dispersion as an all-pass quadratic-phase filter, its exact
//! inverse, and the truncated-inverse FIR equalizer used in the receiver.
//!
//! Sign convention (fixed crate-wide): the fiber multiplies the baseband
//! spectrum by `exp(-j·π·λ²·D·L·f²/c)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::analytics::FiberSpec;
use crate::error::{ensure_positive, Error, Result};
use crate::signal::ComplexSignal;

/// Sign of the fiber's spectral phase exponent.
pub const FIBER_PHASE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdDirection {
    /// Propagation through the fiber.
    Fiber,
    /// Exact inverse of the fiber.
    Inverse,
}

/// Chromatic dispersion operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOperator {
    pub fiber: FiberSpec,
    pub direction: CdDirection,
}

impl CdOperator {
    pub fn fiber(fiber: FiberSpec) -> Self {
        Self {
            fiber,
            direction: CdDirection::Fiber,
        }
    }

    pub fn inverse(fiber: FiberSpec) -> Self {
        Self {
            fiber,
            direction: CdDirection::Inverse,
        }
    }

    /// Transfer function at baseband frequency `f` (Hz).
    pub fn transfer(&self, f: f64) -> Complex64 {
        let dir = match self.direction {
            CdDirection::Fiber => 1.0,
            CdDirection::Inverse => -1.0,
        };
        let phase = FIBER_PHASE_SIGN * dir * PI * self.fiber.group_delay_spread() * f * f;
        Complex64::from_polar(1.0, phase)
    }
}

/// Frequency of DFT bin `k` on the centered grid of an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, sample_period: f64) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    let centered = if k < n_f / 2.0 { k } else { k - n_f };
    centered / (n_f * sample_period)
}

fn plan(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Applies `op` by multiplying the DFT of the whole signal with its transfer
/// function. The operation is circular over the signal length.
pub fn apply_cd_frequency_domain(signal: &ComplexSignal, op: &CdOperator) -> Result<ComplexSignal> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::domain("dispersion needs at least two samples"));
    }
    if !op.fiber.has_dispersion() {
        return Ok(signal.clone());
    }
    let t = signal.sample_period();
    let (fwd, inv) = plan(n);
    let mut buf = signal.samples().to_vec();
    fwd.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (k, x) in buf.iter_mut().enumerate() {
        *x *= op.transfer(bin_frequency(k, n, t)) * scale;
    }
    inv.process(&mut buf);
    Ok(ComplexSignal::from_parts(buf, t))
}

/// FIR filter with center-aligned taps.
#[derive(Debug, Clone, PartialEq)]
pub struct FirEqualizer {
    taps: Vec<Complex64>,
    tap_spacing: f64,
}

impl FirEqualizer {
    pub fn new(taps: Vec<Complex64>, tap_spacing: f64) -> Result<Self> {
        ensure_positive("tap spacing", tap_spacing)?;
        if taps.len().is_multiple_of(2) {
            return Err(Error::domain(format!(
                "FIR tap count must be odd, got {}",
                taps.len()
            )));
        }
        Ok(Self { taps, tap_spacing })
    }

    pub fn identity(tap_spacing: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0)], tap_spacing)
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Taps on either side of the center tap.
    pub fn half_len(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn tap_spacing(&self) -> f64 {
        self.tap_spacing
    }

    /// Frequency response Σ a_k·exp(−j2πf·k·T), k centered on the middle tap.
    pub fn response(&self, f: f64) -> Complex64 {
        let m = self.half_len() as f64;
        self.taps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                a * Complex64::from_polar(1.0, -2.0 * PI * f * (i as f64 - m) * self.tap_spacing)
            })
            .sum()
    }
}

/// Number of taps for the truncated time-domain inverse of `fiber` at tap
/// spacing `sample_period`: 2·⌊|D|λ²L / (2cT²)⌋ + 1.
pub fn fir_tap_count(fiber: &FiberSpec, sample_period: f64) -> usize {
    let spread = fiber.group_delay_spread().abs();
    let half = (spread / (2.0 * sample_period * sample_period)).floor();
    2 * half as usize + 1
}

/// Truncated time-domain inverse of the fiber dispersion.
///
/// a_k = √(j·c·T²/(D·λ²·L)) · exp(−j·π·c·T²·k²/(D·λ²·L)), for
/// |k| ≤ (N−1)/2 with N from [`fir_tap_count`]. Returns the single-tap
/// identity when the fiber has no dispersion or N = 1.
pub fn design_fir_equalizer(fiber: &FiberSpec, sample_period: f64) -> Result<FirEqualizer> {
    ensure_positive("sample_period", sample_period)?;
    if !fiber.has_dispersion() {
        return FirEqualizer::identity(sample_period);
    }
    let n = fir_tap_count(fiber, sample_period);
    if n == 1 {
        return FirEqualizer::identity(sample_period);
    }
    let m = ((n - 1) / 2) as i64;
    // λ²·D·L / c; the tap formula is written in terms of its reciprocal.
    let spread = fiber.group_delay_spread();
    let t2 = sample_period * sample_period;
    let amplitude = (Complex64::new(0.0, 1.0) * (t2 / spread)).sqrt();
    let taps = (-m..=m)
        .map(|k| {
            let kf = k as f64;
            amplitude * Complex64::from_polar(1.0, -PI * t2 * kf * kf / spread)
        })
        .collect();
    FirEqualizer::new(taps, sample_period)
}

/// Center-aligned linear convolution, computed by overlap-save. The output
/// has the input's length; its first and last `half_len` samples contain
/// edge transients.
pub fn apply_fir(signal: &ComplexSignal, eq: &FirEqualizer) -> Result<ComplexSignal> {
    let len = signal.len();
    let taps = eq.taps();
    if len <= taps.len() {
        return Err(Error::domain(format!(
            "signal of {len} samples is not longer than the {}-tap equalizer",
            taps.len()
        )));
    }
    if taps.len() == 1 {
        let a = taps[0];
        let out = signal.samples().iter().map(|&x| x * a).collect();
        return Ok(ComplexSignal::from_parts(out, signal.sample_period()));
    }

    let n_taps = taps.len();
    let half = eq.half_len();
    let fft_len = (4 * n_taps).max(4096).next_power_of_two();
    let step = fft_len - (n_taps - 1);
    let (fwd, inv) = plan(fft_len);

    let mut kernel = vec![Complex64::new(0.0, 0.0); fft_len];
    kernel[..n_taps].copy_from_slice(taps);
    fwd.process(&mut kernel);
    let scale = 1.0 / fft_len as f64;
    kernel.iter_mut().for_each(|k| *k *= scale);

    // Input padded with n_taps-1 leading zeros; full convolution index m maps
    // to output index m - half.
    let x = signal.samples();
    let padded_at = |j: usize| -> Complex64 {
        if j < n_taps - 1 {
            Complex64::new(0.0, 0.0)
        } else {
            x.get(j - (n_taps - 1)).copied().unwrap_or_default()
        }
    };

    let mut out = Vec::with_capacity(len);
    let mut block = vec![Complex64::new(0.0, 0.0); fft_len];
    // Skip whole blocks that only produce full-convolution indices < half.
    let mut start = (half / step) * step;
    let mut discard = half - start;
    while out.len() < len {
        for (p, b) in block.iter_mut().enumerate() {
            *b = padded_at(start + p);
        }
        fwd.process(&mut block);
        block.iter_mut().zip(&kernel).for_each(|(b, k)| *b *= k);
        inv.process(&mut block);
        let valid = &block[n_taps - 1..];
        let take = (len - out.len()).min(valid.len() - discard);
        out.extend_from_slice(&valid[discard..discard + take]);
        discard = 0;
        start += step;
    }
    Ok(ComplexSignal::from_parts(out, signal.sample_period()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, bin: usize, t: f64) -> ComplexSignal {
        let f0 = bin_frequency(bin, n, t);
        let s = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * f0 * k as f64 * t))
            .collect();
        ComplexSignal::new(s, t).unwrap()
    }

    #[test]
    fn zero_length_fiber_is_identity() {
        let f = FiberSpec::ssmf(0.0).unwrap();
        let sig = tone(64, 3, 1e-11);
        let out = apply_cd_frequency_domain(&sig, &CdOperator::fiber(f)).unwrap();
        assert_eq!(out, sig);
    }

    #[test]
    fn single_tone_picks_up_quadratic_phase() {
        let fiber = FiberSpec::ssmf(50.0).unwrap();
        let t = 1.0 / 56e9;
        let n = 1024;
        let bin = 37;
        let sig = tone(n, bin, t);
        let out = apply_cd_frequency_domain(&sig, &CdOperator::fiber(fiber)).unwrap();
        let f0 = bin_frequency(bin, n, t);
        let expect = -PI * fiber.group_delay_spread() * f0 * f0;
        let expected = Complex64::from_polar(1.0, expect);
        for (o, i) in out.samples().iter().zip(sig.samples()) {
            assert!((o - i * expected).norm() < 1e-10);
        }
    }

    #[test]
    fn tap_count_for_2000km() {
        let fiber = FiberSpec::ssmf(2000.0).unwrap();
        assert_eq!(fir_tap_count(&fiber, 1.0 / 56e9), 805);
        let eq = design_fir_equalizer(&fiber, 1.0 / 56e9).unwrap();
        assert_eq!(eq.len(), 805);
        let mag = eq.taps()[0].norm();
        assert!(eq
            .taps()
            .iter()
            .all(|a| (a.norm() - mag).abs() < 1e-12 * mag));
    }

    #[test]
    fn short_fiber_gives_unit_single_tap() {
        let fiber = FiberSpec::ssmf(1.0).unwrap();
        let eq = design_fir_equalizer(&fiber, 1.0 / 56e9).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq.taps()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn identity_fir_is_exact() {
        let sig = tone(100, 5, 1.0);
        let eq = FirEqualizer::identity(1.0).unwrap();
        assert_eq!(apply_fir(&sig, &eq).unwrap(), sig);
    }

    #[test]
    fn fir_rejects_short_signal() {
        let fiber = FiberSpec::ssmf(100.0).unwrap();
        let eq = design_fir_equalizer(&fiber, 1.0 / 56e9).unwrap();
        let sig = tone(eq.len(), 1, 1.0 / 56e9);
        assert!(apply_fir(&sig, &eq).is_err());
    }

    #[test]
    fn impulse_reproduces_taps() {
        let fiber = FiberSpec::ssmf(300.0).unwrap();
        let t = 1.0 / 56e9;
        let eq = design_fir_equalizer(&fiber, t).unwrap();
        let n = eq.len() * 3;
        let center = n / 2;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[center] = Complex64::new(1.0, 0.0);
        let out = apply_fir(&ComplexSignal::new(x, t).unwrap(), &eq).unwrap();
        let m = eq.half_len();
        for (i, a) in eq.taps().iter().enumerate() {
            assert!((out.samples()[center - m + i] - a).norm() < 1e-12);
        }
    }

    #[test]
    fn even_tap_count_rejected() {
        assert!(FirEqualizer::new(vec![Complex64::new(1.0, 0.0); 2], 1.0).is_err());
    }
}
