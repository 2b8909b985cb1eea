use std::collections::HashSet;

use eepnlab::analytics::SymbolClock;
use eepnlab::modem::*;
use proptest::prelude::*;

/// a[n+16] = a[n] ^ a[n+2] ^ a[n+3] ^ a[n+5], a[0..16] = seed bits LSB first.
fn recurrence(seed: u16, len: usize) -> Vec<bool> {
    let mut a: Vec<bool> = (0..16).map(|i| seed >> i & 1 == 1).collect();
    while a.len() < len {
        let n = a.len() - 16;
        a.push(a[n] ^ a[n + 2] ^ a[n + 3] ^ a[n + 5]);
    }
    a.truncate(len);
    a
}

#[test]
fn prbs_visits_every_nonzero_state_once() {
    let mut g = Prbs16::new(0xFFFF).unwrap();
    let mut seen = HashSet::new();
    let mut ones = 0;
    for _ in 0..PRBS16_PERIOD {
        assert!(seen.insert(g.state()));
        ones += g.next_bit() as usize;
    }
    assert_eq!(seen.len(), 65535);
    assert!(!seen.contains(&0));
    assert_eq!(g.state(), 0xFFFF);
    assert_eq!(ones, 32768);
}

#[test]
fn prbs_first_outputs() {
    let got = prbs16(16, 0xFFFF).unwrap();
    assert_eq!(got.bits(), vec![true; 16].as_slice());
    for seed in [0xFFFF, 0x0001, 0xACE1, 0x8000] {
        assert_eq!(
            prbs16(300, seed).unwrap().bits(),
            recurrence(seed, 300).as_slice(),
            "seed {seed:#x}"
        );
    }
}

#[test]
fn awgn_free_round_trip() {
    let c = Constellation::qpsk();
    let bits = prbs16(2 * 5000, 0xFFFF).unwrap();
    let syms = map_symbols(&bits, &c).unwrap();
    let count = decide_and_count(&syms, &bits, &c, 0).unwrap();
    assert_eq!(count.errors, 0);
    assert_eq!(count.bits, 10000);
    let w = shape_waveform(&syms, &SymbolClock::default_28g()).unwrap();
    assert_eq!(w.len(), 10000);
    assert!((w.mean_power() - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn labels_survive_mapping(log2m in 1usize..6, seed in 1u16.., n in 1usize..200) {
        let c = Constellation::psk(1 << log2m).unwrap();
        let bits = prbs16(n * log2m, seed).unwrap();
        let syms = map_symbols(&bits, &c).unwrap();
        prop_assert_eq!(syms.len(), n);
        prop_assert_eq!(decide_and_count(&syms, &bits, &c, 0).unwrap().errors, 0);
    }

    #[test]
    fn small_perturbations_decide_back(i in 0usize..4, re in -0.3f64..0.3, im in -0.3f64..0.3) {
        let c = Constellation::qpsk();
        let p = c.points()[i];
        prop_assert_eq!(c.nearest(p + num_complex::Complex64::new(re, im) * 0.5), i);
    }

    #[test]
    fn offsets_are_periodic(offset in 0usize..200_000, len in 1usize..64) {
        let a = prbs16_at(len, 0xFFFF, offset).unwrap();
        let b = prbs16_at(len, 0xFFFF, offset + PRBS16_PERIOD).unwrap();
        prop_assert_eq!(a, b);
    }
}
