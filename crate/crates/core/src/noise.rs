//! Laser phase noise and additive receiver noise.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytics::{osnr_to_es_n0, LaserSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::signal::ComplexSignal;

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha20 with the seed expanded into the key and `stream_id`
/// selecting the 64-bit ChaCha stream, so distinct ids never share output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives an independent child stream, e.g. one per noise source.
    pub fn fork(&self, label: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: mix64(self.stream_id ^ mix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sampled laser phase, θ[0] = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    phases: Vec<f64>,
    sample_period: f64,
}

impl PhaseTrajectory {
    pub fn new(phases: Vec<f64>, sample_period: f64) -> Result<Self> {
        ensure_positive("sample_period", sample_period)?;
        if phases.is_empty() {
            return Err(Error::domain("phase trajectory must be nonempty"));
        }
        Ok(Self {
            phases,
            sample_period,
        })
    }

    pub fn constant(value: f64, n: usize, sample_period: f64) -> Result<Self> {
        Self::new(vec![value; n], sample_period)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Wiener phase noise: a random walk with Gaussian increments of variance
/// 2π·Δf·T per sample (white frequency noise).
pub fn gen_wiener_phase(
    n_samples: usize,
    laser: &LaserSpec,
    sample_period: f64,
    rng: &RngStream,
) -> Result<PhaseTrajectory> {
    ensure_positive("sample_period", sample_period)?;
    if n_samples == 0 {
        return Err(Error::domain("n_samples must be >= 1"));
    }
    let mut phases = vec![0.0; n_samples];
    let std = laser.phase_variance(sample_period).sqrt();
    if std > 0.0 {
        let mut g = rng.generator();
        let mut acc = 0.0;
        for p in phases.iter_mut().skip(1) {
            let step: f64 = StandardNormal.sample(&mut g);
            acc += std * step;
            *p = acc;
        }
    }
    Ok(PhaseTrajectory {
        phases,
        sample_period,
    })
}

/// Sign of the phase imprinted by [`apply_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Forward,
    Conjugate,
}

impl Rotation {
    fn sign(self) -> f64 {
        match self {
            Rotation::Forward => 1.0,
            Rotation::Conjugate => -1.0,
        }
    }
}

/// out[k] = in[k]·exp(±j·θ[k]).
pub fn apply_phase(
    signal: &ComplexSignal,
    phase: &PhaseTrajectory,
    rotation: Rotation,
) -> Result<ComplexSignal> {
    if signal.len() != phase.len() {
        return Err(Error::domain(format!(
            "signal has {} samples but phase trajectory has {}",
            signal.len(),
            phase.len()
        )));
    }
    if signal.sample_period() != phase.sample_period() {
        return Err(Error::domain("signal and phase sample periods differ"));
    }
    let sign = rotation.sign();
    let out = signal
        .samples()
        .iter()
        .zip(phase.phases())
        .map(|(&s, &theta)| {
            if theta == 0.0 {
                s
            } else {
                s * Complex64::from_polar(1.0, sign * theta)
            }
        })
        .collect();
    Ok(ComplexSignal::from_parts(out, signal.sample_period()))
}

/// Optical signal-to-noise ratio, or the noise-free sentinel.
///
/// Serialized as a number in dB, or as the string `"inf"` for noise-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Osnr {
    Db(f64),
    NoiseFree,
}

impl Osnr {
    pub fn db(&self) -> f64 {
        match self {
            Osnr::Db(v) => *v,
            Osnr::NoiseFree => f64::INFINITY,
        }
    }

    pub fn from_db(v: f64) -> Self {
        if v == f64::INFINITY {
            Osnr::NoiseFree
        } else {
            Osnr::Db(v)
        }
    }
}

impl fmt::Display for Osnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Osnr::Db(v) => write!(f, "{v}"),
            Osnr::NoiseFree => f.write_str("inf"),
        }
    }
}

impl Serialize for Osnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Osnr::Db(v) => s.serialize_f64(*v),
            Osnr::NoiseFree => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Osnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Osnr::Db(v)),
            Raw::Str(s) if s == "inf" => Ok(Osnr::NoiseFree),
            _ => Err(serde::de::Error::custom(
                "osnr_db must be a finite number or \"inf\"",
            )),
        }
    }
}

/// Adds circular complex Gaussian noise so that the per-sample SNR of the
/// output equals the Es/N0 implied by `osnr`.
///
/// The noise is white at the waveform sample rate. Its variance is referenced
/// to the measured mean power of `signal`.
pub fn load_noise_for_osnr(
    signal: &ComplexSignal,
    osnr: Osnr,
    symbol_rate_hz: f64,
    ref_bandwidth_hz: f64,
    rng: &RngStream,
) -> Result<ComplexSignal> {
    let Osnr::Db(osnr_db) = osnr else {
        return Ok(signal.clone());
    };
    let es_n0 = osnr_to_es_n0(osnr_db, symbol_rate_hz, ref_bandwidth_hz)?;
    let power = signal.mean_power();
    if power.is_nan() || power <= 0.0 {
        return Err(Error::domain(
            "cannot calibrate noise on a zero-power signal",
        ));
    }
    let std_per_dim = (power / es_n0 / 2.0).sqrt();
    let mut g = rng.generator();
    let out = signal
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut g);
            let im: f64 = StandardNormal.sample(&mut g);
            s + Complex64::new(re, im) * std_per_dim
        })
        .collect();
    Ok(ComplexSignal::from_parts(out, signal.sample_period()))
}
