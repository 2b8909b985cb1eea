//! Closed-form EEPN model.
//!
//! The dispersion-enhanced phase noise of one laser is summarized by an extra
//! phase variance per symbol, which is folded together with the intrinsic
//! laser linewidths into an effective linewidth. The BER floor follows from
//! the probability that a Gaussian phase error exceeds the QPSK decision
//! margin of π/4.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, ensure_positive, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Conventional OSNR reference bandwidth (0.1 nm at 1550 nm), Hz.
pub const OSNR_REF_BANDWIDTH_HZ: f64 = 12.5e9;

/// Scale from ps/(nm·km) to s/m².
const PS_PER_NM_KM: f64 = 1e-6;

/// Fiber parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FiberSpecRepr", try_from = "FiberSpecRepr")]
pub struct FiberSpec {
    /// Dispersion coefficient D, s/m².
    pub dispersion: f64,
    /// Length L, m.
    pub length: f64,
    /// Carrier wavelength λ, m.
    pub wavelength: f64,
}

impl FiberSpec {
    pub fn new(dispersion: f64, length: f64, wavelength: f64) -> Result<Self> {
        if !dispersion.is_finite() {
            return Err(Error::domain("dispersion must be finite"));
        }
        ensure_nonneg("fiber length", length)?;
        ensure_positive("wavelength", wavelength)?;
        Ok(Self {
            dispersion,
            length,
            wavelength,
        })
    }

    /// Builds a fiber from the engineering units used in link budgets:
    /// ps/(nm·km), km and nm.
    pub fn from_engineering(d_ps_nm_km: f64, length_km: f64, wavelength_nm: f64) -> Result<Self> {
        Self::new(
            d_ps_nm_km * PS_PER_NM_KM,
            length_km * 1e3,
            wavelength_nm / 1e9,
        )
    }

    /// Standard single-mode fiber at 1550 nm, D = 16 ps/(nm·km).
    pub fn ssmf(length_km: f64) -> Result<Self> {
        Self::from_engineering(16.0, length_km, 1550.0)
    }

    pub fn dispersion_ps_nm_km(&self) -> f64 {
        self.dispersion / PS_PER_NM_KM
    }

    pub fn length_km(&self) -> f64 {
        self.length / 1e3
    }

    /// Accumulated dispersion expressed as λ²·D·L/c, in s².
    ///
    /// The quadratic spectral phase of the fiber is π·f²·(this value).
    pub fn group_delay_spread(&self) -> f64 {
        self.wavelength * self.wavelength * self.dispersion * self.length / SPEED_OF_LIGHT
    }

    pub fn has_dispersion(&self) -> bool {
        self.dispersion != 0.0 && self.length != 0.0
    }

    /// Same fiber with its length set to zero.
    pub fn back_to_back(&self) -> Self {
        Self {
            length: 0.0,
            ..*self
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberSpecRepr {
    dispersion_ps_nm_km: f64,
    length_km: f64,
    wavelength_nm: f64,
}

impl From<FiberSpec> for FiberSpecRepr {
    fn from(f: FiberSpec) -> Self {
        Self {
            dispersion_ps_nm_km: f.dispersion_ps_nm_km(),
            length_km: f.length_km(),
            wavelength_nm: f.wavelength * 1e9,
        }
    }
}

impl TryFrom<FiberSpecRepr> for FiberSpec {
    type Error = Error;

    fn try_from(r: FiberSpecRepr) -> Result<Self> {
        FiberSpec::from_engineering(r.dispersion_ps_nm_km, r.length_km, r.wavelength_nm)
    }
}

/// 3-dB linewidth of a laser with Wiener phase noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LaserSpec {
    linewidth_hz: f64,
}

impl LaserSpec {
    pub fn new(linewidth_hz: f64) -> Result<Self> {
        ensure_nonneg("laser linewidth", linewidth_hz)?;
        Ok(Self { linewidth_hz })
    }

    pub const fn ideal() -> Self {
        Self { linewidth_hz: 0.0 }
    }

    pub fn linewidth(&self) -> f64 {
        self.linewidth_hz
    }

    /// Phase variance accumulated over `interval` seconds, 2π·Δf·τ.
    pub fn phase_variance(&self, interval: f64) -> f64 {
        2.0 * PI * self.linewidth_hz * interval
    }
}

impl TryFrom<f64> for LaserSpec {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        LaserSpec::new(v)
    }
}

impl From<LaserSpec> for f64 {
    fn from(l: LaserSpec) -> f64 {
        l.linewidth_hz
    }
}

/// Symbol timing of the modem and the waveform oversampling factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "SymbolClockRepr", try_from = "SymbolClockRepr")]
pub struct SymbolClock {
    symbol_period: f64,
    samples_per_symbol: usize,
}

impl SymbolClock {
    pub fn new(symbol_period: f64, samples_per_symbol: usize) -> Result<Self> {
        ensure_positive("symbol period", symbol_period)?;
        if samples_per_symbol == 0 {
            return Err(Error::domain("samples_per_symbol must be >= 1"));
        }
        Ok(Self {
            symbol_period,
            samples_per_symbol,
        })
    }

    pub fn from_rate(symbol_rate_hz: f64, samples_per_symbol: usize) -> Result<Self> {
        ensure_positive("symbol rate", symbol_rate_hz)?;
        Self::new(1.0 / symbol_rate_hz, samples_per_symbol)
    }

    /// 28 GBd at 2 samples per symbol.
    pub fn default_28g() -> Self {
        Self {
            symbol_period: 1.0 / 28e9,
            samples_per_symbol: 2,
        }
    }

    pub fn symbol_period(&self) -> f64 {
        self.symbol_period
    }

    pub fn symbol_rate(&self) -> f64 {
        1.0 / self.symbol_period
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn sample_period(&self) -> f64 {
        self.symbol_period / self.samples_per_symbol as f64
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolClockRepr {
    symbol_rate_hz: f64,
    samples_per_symbol: usize,
}

impl From<SymbolClock> for SymbolClockRepr {
    fn from(c: SymbolClock) -> Self {
        Self {
            symbol_rate_hz: c.symbol_rate(),
            samples_per_symbol: c.samples_per_symbol,
        }
    }
}

impl TryFrom<SymbolClockRepr> for SymbolClock {
    type Error = Error;

    fn try_from(r: SymbolClockRepr) -> Result<Self> {
        SymbolClock::from_rate(r.symbol_rate_hz, r.samples_per_symbol)
    }
}

fn check_fiber(fiber: &FiberSpec) -> Result<()> {
    ensure_nonneg("dispersion", fiber.dispersion)?;
    ensure_nonneg("fiber length", fiber.length)?;
    ensure_positive("wavelength", fiber.wavelength)
}

/// Extra phase variance per symbol, in rad², created when a laser of
/// linewidth `linewidth_hz` sees the accumulated dispersion of `fiber`
/// without a matching dispersion on the other end of the link.
pub fn eepn_variance(fiber: &FiberSpec, linewidth_hz: f64, clock: &SymbolClock) -> Result<f64> {
    check_fiber(fiber)?;
    ensure_nonneg("linewidth", linewidth_hz)?;
    let lambda = fiber.wavelength;
    Ok(PI * lambda * lambda / (2.0 * SPEED_OF_LIGHT)
        * fiber.dispersion
        * fiber.length
        * linewidth_hz
        / clock.symbol_period())
}

/// Linewidth equivalent of [`eepn_variance`]: σ² / (2π·T_s).
pub fn eepn_linewidth(fiber: &FiberSpec, linewidth_hz: f64, clock: &SymbolClock) -> Result<f64> {
    Ok(eepn_variance(fiber, linewidth_hz, clock)? / (2.0 * PI * clock.symbol_period()))
}

/// Sum of the transmitter, LO and EEPN linewidths. Correlation between the
/// LO and EEPN contributions is neglected.
pub fn effective_linewidth(tx: &LaserSpec, lo: &LaserSpec, eepn_lw_hz: f64) -> Result<f64> {
    ensure_nonneg("EEPN linewidth", eepn_lw_hz)?;
    Ok(tx.linewidth() + lo.linewidth() + eepn_lw_hz)
}

/// Phase variance per symbol for an effective linewidth, 2π·Δf·T_s.
pub fn effective_variance(effective_lw_hz: f64, clock: &SymbolClock) -> Result<f64> {
    ensure_nonneg("effective linewidth", effective_lw_hz)?;
    Ok(2.0 * PI * effective_lw_hz * clock.symbol_period())
}

/// QPSK BER floor for a given effective linewidth: ½·erfc(π / (4√2·σ)).
pub fn ber_floor(effective_lw_hz: f64, clock: &SymbolClock) -> Result<f64> {
    let variance = effective_variance(effective_lw_hz, clock)?;
    if variance == 0.0 {
        return Ok(0.0);
    }
    let sigma = variance.sqrt();
    Ok(0.5 * erfc(PI / (4.0 * std::f64::consts::SQRT_2 * sigma)))
}

/// Es/N0 (linear) of a single-polarization signal for a given OSNR, with
/// the noise counted in both polarizations over `ref_bandwidth_hz`.
pub fn osnr_to_es_n0(osnr_db: f64, symbol_rate_hz: f64, ref_bandwidth_hz: f64) -> Result<f64> {
    if !osnr_db.is_finite() {
        return Err(Error::domain(format!("OSNR must be finite, got {osnr_db}")));
    }
    ensure_positive("symbol rate", symbol_rate_hz)?;
    ensure_positive("reference bandwidth", ref_bandwidth_hz)?;
    Ok(10f64.powf(osnr_db / 10.0) * 2.0 * ref_bandwidth_hz / symbol_rate_hz)
}

/// Gray-coded QPSK bit error rate on an AWGN channel.
pub fn qpsk_ber_awgn(es_n0: f64) -> Result<f64> {
    if es_n0.is_nan() || es_n0 < 0.0 {
        return Err(Error::domain(format!("Es/N0 must be >= 0, got {es_n0}")));
    }
    Ok(0.5 * erfc((es_n0 / 2.0).sqrt()))
}

/// Complementary error function, double precision.
pub fn erfc(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    libm::erfc(x)
}

/// The full analytic chain for one link configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorPrediction {
    pub eepn_linewidth_hz: f64,
    pub effective_linewidth_hz: f64,
    pub effective_variance: f64,
    pub ber_floor: f64,
}

/// Evaluates the analytic chain with the EEPN generated by the laser whose
/// linewidth is `eepn_source_hz` acting against `fiber`.
pub fn predict_floor(
    fiber: &FiberSpec,
    tx: &LaserSpec,
    lo: &LaserSpec,
    eepn_source_hz: f64,
    clock: &SymbolClock,
) -> Result<FloorPrediction> {
    let eepn_lw = eepn_linewidth(fiber, eepn_source_hz, clock)?;
    let eff = effective_linewidth(tx, lo, eepn_lw)?;
    Ok(FloorPrediction {
        eepn_linewidth_hz: eepn_lw,
        effective_linewidth_hz: eff,
        effective_variance: effective_variance(eff, clock)?,
        ber_floor: ber_floor(eff, clock)?,
    })
}
