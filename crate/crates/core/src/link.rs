//! End-to-end link pipelines.
//!
//! Post-compensation: Tx laser → fiber → noise → LO → Rx FIR equalizer.
//! Pre-compensation: electrical inverse dispersion → Tx laser → fiber →
//! noise → LO, with no receiver equalizer.
//! Optical compensation: the fiber dispersion is cancelled optically, so
//! neither laser sees any net dispersion.
//!
//! One call simulates one block ("trial"); the harness accumulates blocks.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    predict_floor, FiberSpec, FloorPrediction, LaserSpec, SymbolClock, OSNR_REF_BANDWIDTH_HZ,
};
use crate::dispersion::{
    apply_cd_frequency_domain, apply_fir, design_fir_equalizer, fir_tap_count, CdOperator,
};
use crate::error::{Error, Result};
use crate::modem::{
    decide_and_count, map_symbols, prbs16_at, shape_waveform, BitSequence, Constellation,
    ErrorCount,
};
use crate::noise::{apply_phase, gen_wiener_phase, load_noise_for_osnr, Osnr, RngStream, Rotation};
use crate::rxdsp::{
    cpe_lms_pilot_aided, downsample_to_symbols, mix_with_lo, LmsState, PilotPattern,
};
use crate::signal::ComplexSignal;

const TX_PHASE_STREAM: u64 = 1;
const LO_PHASE_STREAM: u64 = 2;
const AWGN_STREAM: u64 = 3;

/// Where the chromatic dispersion is undone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compensation {
    /// Receiver DSP, after LO mixing.
    Post,
    /// Transmitter electrical domain, before the carrier is imprinted.
    Pre,
    /// Dispersion-compensating fiber; zero net dispersion.
    Optical,
}

impl fmt::Display for Compensation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compensation::Post => "post",
            Compensation::Pre => "pre",
            Compensation::Optical => "optical",
        })
    }
}

/// Filter used for electrical pre-distortion in the transmitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TxEqualizer {
    /// Exact frequency-domain inverse of the fiber.
    #[default]
    Exact,
    /// Same truncated FIR design as the receiver equalizer.
    Fir,
}

fn default_order() -> usize {
    4
}
fn default_ref_bandwidth() -> f64 {
    OSNR_REF_BANDWIDTH_HZ
}
fn default_prbs_seed() -> u16 {
    0xFFFF
}
fn default_osnr() -> Osnr {
    Osnr::NoiseFree
}

/// Full description of one simulated block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkScenario {
    pub compensation: Compensation,
    #[serde(rename = "tx_linewidth_hz")]
    pub tx_laser: LaserSpec,
    #[serde(rename = "lo_linewidth_hz")]
    pub lo_laser: LaserSpec,
    pub fiber: FiberSpec,
    pub clock: SymbolClock,
    #[serde(default = "default_order")]
    pub constellation_order: usize,
    #[serde(default = "default_osnr")]
    pub osnr_db: Osnr,
    /// Symbols per block, including training and edge guards.
    pub n_symbols: usize,
    pub training_len: usize,
    pub mu: f64,
    #[serde(default = "default_ref_bandwidth")]
    pub ref_bandwidth_hz: f64,
    #[serde(default)]
    pub tx_equalizer: TxEqualizer,
    #[serde(default = "default_prbs_seed")]
    pub prbs_seed: u16,
    /// Bit offset of this block into the periodic PRBS.
    #[serde(default)]
    pub data_offset: usize,
    /// Pilot groups used for cycle-slip correction in the receiver.
    #[serde(default)]
    pub pilots: PilotPattern,
    #[serde(default)]
    pub rng: RngStream,
}

impl LinkScenario {
    /// Single-polarization 28 GBd QPSK over `length_km` of standard fiber,
    /// 2 samples per symbol, 2¹⁶-symbol blocks, 500 training symbols, μ = 0.2.
    pub fn reference_link(
        compensation: Compensation,
        tx_linewidth_hz: f64,
        lo_linewidth_hz: f64,
        length_km: f64,
    ) -> Result<Self> {
        Ok(Self {
            compensation,
            tx_laser: LaserSpec::new(tx_linewidth_hz)?,
            lo_laser: LaserSpec::new(lo_linewidth_hz)?,
            fiber: FiberSpec::ssmf(length_km)?,
            clock: SymbolClock::default_28g(),
            constellation_order: 4,
            osnr_db: Osnr::NoiseFree,
            n_symbols: 1 << 16,
            training_len: 500,
            mu: 0.2,
            ref_bandwidth_hz: OSNR_REF_BANDWIDTH_HZ,
            tx_equalizer: TxEqualizer::Exact,
            prbs_seed: 0xFFFF,
            data_offset: 0,
            pilots: PilotPattern::default(),
            rng: RngStream::new(0, 0),
        })
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::psk(self.constellation_order)
    }

    /// Dispersion seen by the electronic equalizer (none for optical).
    fn electronic_fiber(&self) -> FiberSpec {
        match self.compensation {
            Compensation::Optical => self.fiber.back_to_back(),
            _ => self.fiber,
        }
    }

    /// Symbols excluded at each block edge: ⌈N/2⌉ for an N-tap equalizer of
    /// the link dispersion, and never less than the 2·(N−1)/2 samples over
    /// which circular and linear filtering disagree.
    pub fn guard_symbols(&self) -> usize {
        let n = fir_tap_count(&self.electronic_fiber(), self.clock.sample_period());
        let sps = self.clock.samples_per_symbol();
        n.div_ceil(2).max((n - 1).div_ceil(sps))
    }

    /// Payload bits counted per block.
    pub fn counted_bits(&self) -> usize {
        let k = self.constellation_order.trailing_zeros() as usize;
        let after_training = self
            .n_symbols
            .saturating_sub(2 * self.guard_symbols() + self.training_len);
        self.pilots.data_symbols(after_training) * k
    }

    pub fn bits_per_block(&self) -> usize {
        self.n_symbols * self.constellation_order.trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.constellation()?;
        let guard = self.guard_symbols();
        if self.n_symbols <= self.training_len + 2 * guard {
            return Err(Error::domain(format!(
                "n_symbols = {} must exceed training_len + 2·guard = {}",
                self.n_symbols,
                self.training_len + 2 * guard
            )));
        }
        if self.training_len == 0 {
            return Err(Error::domain("training_len must be >= 1"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::domain(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        self.pilots.validate()?;
        if self.clock.samples_per_symbol() < 2 {
            return Err(Error::domain("link pipelines need >= 2 samples per symbol"));
        }
        Ok(())
    }

    /// The analytic companion: EEPN from the LO for post-compensation, from
    /// the Tx laser for pre-compensation, none for optical compensation.
    pub fn prediction(&self) -> Result<FloorPrediction> {
        let (fiber, source) = match self.compensation {
            Compensation::Post => (self.fiber, self.lo_laser.linewidth()),
            Compensation::Pre => (self.fiber, self.tx_laser.linewidth()),
            Compensation::Optical => (self.fiber.back_to_back(), 0.0),
        };
        predict_floor(&fiber, &self.tx_laser, &self.lo_laser, source, &self.clock)
    }

    /// Short identity string used when no scenario name is supplied.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}-{}km-tx{}-lo{}",
            self.compensation,
            self.fiber.length_km(),
            self.tx_laser.linewidth(),
            self.lo_laser.linewidth()
        )
    }
}

/// One measured point of a BER curve with its analytic overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerRecord {
    pub scenario: String,
    pub compensation: Compensation,
    pub distance_km: f64,
    pub df_tx_hz: f64,
    pub df_lo_hz: f64,
    pub osnr_db: Osnr,
    pub n_bits: u64,
    pub n_errors: u64,
    pub ber: f64,
    pub eepn_lw_hz: f64,
    pub eff_lw_hz: f64,
    pub ber_floor_theory: f64,
}

impl BerRecord {
    pub fn from_count(name: &str, sc: &LinkScenario, count: ErrorCount) -> Result<Self> {
        let p = sc.prediction()?;
        Ok(Self {
            scenario: name.to_string(),
            compensation: sc.compensation,
            distance_km: sc.fiber.length_km(),
            df_tx_hz: sc.tx_laser.linewidth(),
            df_lo_hz: sc.lo_laser.linewidth(),
            osnr_db: sc.osnr_db,
            n_bits: count.bits,
            n_errors: count.errors,
            ber: if count.bits == 0 { 0.0 } else { count.ber() },
            eepn_lw_hz: p.eepn_linewidth_hz,
            eff_lw_hz: p.effective_linewidth_hz,
            ber_floor_theory: p.ber_floor,
        })
    }

    pub fn count(&self) -> ErrorCount {
        ErrorCount {
            errors: self.n_errors,
            bits: self.n_bits,
        }
    }
}

struct TxData {
    bits: BitSequence,
    symbols: Vec<Complex64>,
    waveform: ComplexSignal,
}

fn transmit_data(sc: &LinkScenario, constellation: &Constellation) -> Result<TxData> {
    let bits = prbs16_at(sc.bits_per_block(), sc.prbs_seed, sc.data_offset)?;
    let symbols = map_symbols(&bits, constellation)?;
    let waveform = shape_waveform(&symbols, &sc.clock)?;
    Ok(TxData {
        bits,
        symbols,
        waveform,
    })
}

fn laser_phase(
    sc: &LinkScenario,
    laser: &LaserSpec,
    n: usize,
    stream: u64,
) -> Result<crate::noise::PhaseTrajectory> {
    gen_wiener_phase(n, laser, sc.clock.sample_period(), &sc.rng.fork(stream))
}

/// Receiver input N(t), LO mixing.
fn receive_optical(sc: &LinkScenario, optical: &ComplexSignal) -> Result<ComplexSignal> {
    let noisy = load_noise_for_osnr(
        optical,
        sc.osnr_db,
        sc.clock.symbol_rate(),
        sc.ref_bandwidth_hz,
        &sc.rng.fork(AWGN_STREAM),
    )?;
    let lo = laser_phase(sc, &sc.lo_laser, noisy.len(), LO_PHASE_STREAM)?;
    mix_with_lo(&noisy, &lo)
}

/// Decimation, training-initialized LMS with pilot-aided slip correction,
/// and error counting over the payload symbols of the block interior.
fn detect(
    sc: &LinkScenario,
    constellation: &Constellation,
    electrical: &ComplexSignal,
    tx: &TxData,
) -> Result<ErrorCount> {
    let rx = downsample_to_symbols(electrical, &sc.clock, 0)?;
    let guard = sc.guard_symbols();
    let region = guard..sc.n_symbols - guard;
    let k = constellation.bits_per_symbol();

    let x = &rx[region.clone()];
    let known = &tx.symbols[region.clone()];
    let state = LmsState::from_training(&x[..sc.training_len], &known[..sc.training_len], sc.mu)?;
    let cpe = cpe_lms_pilot_aided(x, known, state, &sc.pilots, constellation)?;

    let bits = &tx.bits.bits()[region.start * k..region.end * k];
    let mut data = Vec::with_capacity(x.len());
    let mut ref_bits = Vec::with_capacity(bits.len());
    for (i, y) in cpe.symbols.iter().enumerate().skip(sc.training_len) {
        if !sc.pilots.is_pilot(i, sc.training_len) {
            data.push(*y);
            ref_bits.extend_from_slice(&bits[i * k..(i + 1) * k]);
        }
    }
    decide_and_count(&data, &BitSequence::new(ref_bits)?, constellation, 0)
}

fn require(sc: &LinkScenario, expected: Compensation) -> Result<()> {
    if sc.compensation != expected {
        return Err(Error::domain(format!(
            "scenario uses {} compensation, expected {expected}",
            sc.compensation
        )));
    }
    sc.validate()
}

fn post_block(sc: &LinkScenario) -> Result<ErrorCount> {
    let constellation = sc.constellation()?;
    let tx = transmit_data(sc, &constellation)?;
    let n = tx.waveform.len();
    let tx_phase = laser_phase(sc, &sc.tx_laser, n, TX_PHASE_STREAM)?;
    let optical = apply_phase(&tx.waveform, &tx_phase, Rotation::Forward)?;
    let optical = apply_cd_frequency_domain(&optical, &CdOperator::fiber(sc.fiber))?;
    let electrical = receive_optical(sc, &optical)?;
    let eq = design_fir_equalizer(&sc.fiber, sc.clock.sample_period())?;
    let equalized = apply_fir(&electrical, &eq)?;
    detect(sc, &constellation, &equalized, &tx)
}

fn pre_block(sc: &LinkScenario) -> Result<ErrorCount> {
    let constellation = sc.constellation()?;
    let tx = transmit_data(sc, &constellation)?;
    let predistorted = match sc.tx_equalizer {
        TxEqualizer::Exact => {
            apply_cd_frequency_domain(&tx.waveform, &CdOperator::inverse(sc.fiber))?
        }
        TxEqualizer::Fir => apply_fir(
            &tx.waveform,
            &design_fir_equalizer(&sc.fiber, sc.clock.sample_period())?,
        )?,
    };
    let tx_phase = laser_phase(sc, &sc.tx_laser, predistorted.len(), TX_PHASE_STREAM)?;
    let optical = apply_phase(&predistorted, &tx_phase, Rotation::Forward)?;
    let optical = apply_cd_frequency_domain(&optical, &CdOperator::fiber(sc.fiber))?;
    let electrical = receive_optical(sc, &optical)?;
    detect(sc, &constellation, &electrical, &tx)
}

fn optical_block(sc: &LinkScenario) -> Result<ErrorCount> {
    let constellation = sc.constellation()?;
    let tx = transmit_data(sc, &constellation)?;
    let tx_phase = laser_phase(sc, &sc.tx_laser, tx.waveform.len(), TX_PHASE_STREAM)?;
    let optical = apply_phase(&tx.waveform, &tx_phase, Rotation::Forward)?;
    let electrical = receive_optical(sc, &optical)?;
    detect(sc, &constellation, &electrical, &tx)
}

/// Simulates one post-compensated block.
pub fn simulate_post(sc: &LinkScenario) -> Result<BerRecord> {
    require(sc, Compensation::Post)?;
    BerRecord::from_count(&sc.fingerprint(), sc, post_block(sc)?)
}

/// Simulates one pre-compensated block.
pub fn simulate_pre(sc: &LinkScenario) -> Result<BerRecord> {
    require(sc, Compensation::Pre)?;
    BerRecord::from_count(&sc.fingerprint(), sc, pre_block(sc)?)
}

/// Simulates one block over an optically compensated (zero net dispersion)
/// link.
pub fn simulate_optical_comp(sc: &LinkScenario) -> Result<BerRecord> {
    require(sc, Compensation::Optical)?;
    BerRecord::from_count(&sc.fingerprint(), sc, optical_block(sc)?)
}

/// Error count of one block, dispatching on the compensation scheme.
pub fn simulate_block(sc: &LinkScenario) -> Result<ErrorCount> {
    sc.validate()?;
    match sc.compensation {
        Compensation::Post => post_block(sc),
        Compensation::Pre => pre_block(sc),
        Compensation::Optical => optical_block(sc),
    }
}
