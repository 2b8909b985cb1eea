//! Bit source, Gray-coded PSK mapping, NRZ waveform and hard-decision BER
//! counting.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analytics::SymbolClock;
use crate::error::{Error, Result};
use crate::signal::ComplexSignal;

pub const PRBS16_PERIOD: usize = (1 << 16) - 1;

/// Maximal-length LFSR for x¹⁶+x¹⁴+x¹³+x¹¹+1 (Fibonacci form).
///
/// The output bit is the register LSB; the feedback enters at bit 15.
#[derive(Debug, Clone)]
pub struct Prbs16 {
    state: u16,
}

impl Prbs16 {
    pub fn new(seed: u16) -> Result<Self> {
        if seed == 0 {
            return Err(Error::domain("PRBS seed must be nonzero"));
        }
        Ok(Self { state: seed })
    }

    pub fn state(&self) -> u16 {
        self.state
    }

    pub fn next_bit(&mut self) -> bool {
        let s = self.state;
        let out = s & 1;
        let fb = (s ^ (s >> 2) ^ (s >> 3) ^ (s >> 5)) & 1;
        self.state = (s >> 1) | (fb << 15);
        out == 1
    }
}

impl Iterator for Prbs16 {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.next_bit())
    }
}

/// Sequence of bits, one `bool` per bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::domain("bit sequence must be nonempty"));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// `length` PRBS-16 bits starting from register state `seed`.
pub fn prbs16(length: usize, seed: u16) -> Result<BitSequence> {
    prbs16_at(length, seed, 0)
}

/// Like [`prbs16`], skipping the first `offset` bits of the (periodic)
/// sequence. The payload of trial `t` uses `offset = t · bits_per_trial`.
pub fn prbs16_at(length: usize, seed: u16, offset: usize) -> Result<BitSequence> {
    let mut gen = Prbs16::new(seed)?;
    for _ in 0..offset % PRBS16_PERIOD {
        gen.next_bit();
    }
    BitSequence::new(gen.take(length).collect())
}

/// Gray-labelled M-PSK constellation with unit symbol energy.
///
/// Point `i` sits at angle π/M + 2πi/M and carries the label `i ^ (i >> 1)`,
/// MSB first. For QPSK this gives 00→(1+j)/√2, 01→(−1+j)/√2, 11→(−1−j)/√2
/// and 10→(1−j)/√2.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<usize>,
    /// Point index by label.
    by_label: Vec<usize>,
}

impl Constellation {
    pub fn psk(order: usize) -> Result<Self> {
        if !(2..=64).contains(&order) || !order.is_power_of_two() {
            return Err(Error::domain(format!(
                "PSK order must be a power of two in [2, 64], got {order}"
            )));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let points = (0..order)
            .map(|i| {
                Complex64::from_polar(1.0, PI / order as f64 + 2.0 * PI * i as f64 / order as f64)
            })
            .collect();
        let labels: Vec<usize> = (0..order).map(|i| i ^ (i >> 1)).collect();
        let mut by_label = vec![0; order];
        for (i, &l) in labels.iter().enumerate() {
            by_label[l] = i;
        }
        Ok(Self {
            order,
            bits_per_symbol,
            points,
            labels,
            by_label,
        })
    }

    pub fn qpsk() -> Self {
        Self::psk(4).expect("QPSK is a valid PSK order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn point_for_label(&self, label: usize) -> Complex64 {
        self.points[self.by_label[label]]
    }

    /// Index of the nearest constellation point.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Hard decision: the nearest point itself.
    pub fn decide(&self, z: Complex64) -> Complex64 {
        self.points[self.nearest(z)]
    }

    pub fn label_of(&self, z: Complex64) -> usize {
        self.labels[self.nearest(z)]
    }
}

pub fn map_symbols(bits: &BitSequence, constellation: &Constellation) -> Result<Vec<Complex64>> {
    let k = constellation.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::domain(format!(
            "{} bits do not divide into {k}-bit symbols",
            bits.len()
        )));
    }
    Ok(bits
        .bits()
        .chunks(k)
        .map(|chunk| {
            let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            constellation.point_for_label(label)
        })
        .collect())
}

/// Rectangular NRZ: each symbol held for `samples_per_symbol` samples.
pub fn shape_waveform(symbols: &[Complex64], clock: &SymbolClock) -> Result<ComplexSignal> {
    if symbols.is_empty() {
        return Err(Error::domain("cannot shape an empty symbol array"));
    }
    let sps = clock.samples_per_symbol();
    let samples = symbols
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, sps))
        .collect();
    ComplexSignal::new(samples, clock.sample_period())
}

/// Bit errors and the number of bits they were counted over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCount {
    pub errors: u64,
    pub bits: u64,
}

impl ErrorCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            f64::NAN
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

impl std::ops::Add for ErrorCount {
    type Output = ErrorCount;

    fn add(self, rhs: ErrorCount) -> ErrorCount {
        ErrorCount {
            errors: self.errors + rhs.errors,
            bits: self.bits + rhs.bits,
        }
    }
}

impl std::iter::Sum for ErrorCount {
    fn sum<I: Iterator<Item = ErrorCount>>(iter: I) -> Self {
        iter.fold(ErrorCount::default(), |a, b| a + b)
    }
}

/// Minimum-distance decisions on `rx_symbols`, counting bit errors against
/// `ref_bits` after the first `skip` symbols.
pub fn decide_and_count(
    rx_symbols: &[Complex64],
    ref_bits: &BitSequence,
    constellation: &Constellation,
    skip: usize,
) -> Result<ErrorCount> {
    let k = constellation.bits_per_symbol();
    if ref_bits.len() != rx_symbols.len() * k {
        return Err(Error::domain(format!(
            "{} received symbols need {} reference bits, got {}",
            rx_symbols.len(),
            rx_symbols.len() * k,
            ref_bits.len()
        )));
    }
    if skip >= rx_symbols.len() {
        return Err(Error::domain("skip must be smaller than the symbol count"));
    }
    let mut errors = 0u64;
    for (z, chunk) in rx_symbols.iter().zip(ref_bits.bits().chunks(k)).skip(skip) {
        let expected = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        errors += (constellation.label_of(*z) ^ expected).count_ones() as u64;
    }
    Ok(ErrorCount {
        errors,
        bits: ((rx_symbols.len() - skip) * k) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn zero_seed_rejected() {
        assert!(prbs16(10, 0).is_err());
    }

    #[test]
    fn prbs_periodic() {
        let seq = prbs16(2 * PRBS16_PERIOD, 0xACE1).unwrap();
        let (a, b) = seq.bits().split_at(PRBS16_PERIOD);
        assert_eq!(a, b);
    }

    #[test]
    fn prbs_offset_matches_skip() {
        let full = prbs16(300, 0xFFFF).unwrap();
        let tail = prbs16_at(100, 0xFFFF, 200).unwrap();
        assert_eq!(&full.bits()[200..], tail.bits());
        let wrapped = prbs16_at(100, 0xFFFF, 200 + PRBS16_PERIOD).unwrap();
        assert_eq!(tail, wrapped);
    }

    #[test]
    fn qpsk_table() {
        let c = Constellation::qpsk();
        let h = FRAC_1_SQRT_2;
        let cases = [
            ([false, false], Complex64::new(h, h)),
            ([false, true], Complex64::new(-h, h)),
            ([true, true], Complex64::new(-h, -h)),
            ([true, false], Complex64::new(h, -h)),
        ];
        for (bits, expect) in cases {
            let sym = map_symbols(&BitSequence::new(bits.to_vec()).unwrap(), &c).unwrap();
            assert!((sym[0] - expect).norm() < 1e-15, "{bits:?}");
        }
    }

    #[test]
    fn indivisible_bits_rejected() {
        let bits = BitSequence::new(vec![true; 3]).unwrap();
        assert!(map_symbols(&bits, &Constellation::qpsk()).is_err());
    }

    #[test]
    fn unit_energy_and_gray_adjacency() {
        for order in [2, 4, 8, 16] {
            let c = Constellation::psk(order).unwrap();
            let mean: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            assert!((mean - 1.0).abs() < 1e-12);
            for i in 0..order {
                let j = (i + 1) % order;
                if order > 2 || i == 0 {
                    assert_eq!((c.labels()[i] ^ c.labels()[j]).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn shape_repeats_symbols() {
        let clock = SymbolClock::new(1.0, 2).unwrap();
        let s = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let w = shape_waveform(&s, &clock).unwrap();
        assert_eq!(w.samples(), &[s[0], s[0], s[1], s[1]]);
        assert_eq!(w.sample_period(), 0.5);
        assert!(shape_waveform(&[], &clock).is_err());
    }

    #[test]
    fn negated_qpsk_flips_every_bit() {
        let c = Constellation::qpsk();
        let bits = prbs16(2000, 0xFFFF).unwrap();
        let syms: Vec<_> = map_symbols(&bits, &c)
            .unwrap()
            .into_iter()
            .map(|s| -s)
            .collect();
        let count = decide_and_count(&syms, &bits, &c, 0).unwrap();
        assert_eq!(count.errors, count.bits);
        assert_eq!(count.ber(), 1.0);
    }

    #[test]
    fn count_rejects_mismatch() {
        let c = Constellation::qpsk();
        let bits = prbs16(20, 0xFFFF).unwrap();
        let syms = map_symbols(&bits, &c).unwrap();
        assert!(decide_and_count(&syms[..9], &bits, &c, 0).is_err());
        assert!(decide_and_count(&syms, &bits, &c, 10).is_err());
        let ok = decide_and_count(&syms, &bits, &c, 3).unwrap();
        assert_eq!(
            ok,
            ErrorCount {
                errors: 0,
                bits: 14
            }
        );
    }
}
