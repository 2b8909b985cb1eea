use eepnlab::analytics::{LaserSpec, SymbolClock};
use eepnlab::noise::*;
use eepnlab::ComplexSignal;
use num_complex::Complex64;

const N: usize = 1_000_000;

#[test]
fn wiener_lag_increments() {
    let t = SymbolClock::default_28g().sample_period();
    let laser = LaserSpec::new(5e6).unwrap();
    let p = gen_wiener_phase(N + 1, &laser, t, &RngStream::new(21, 4)).unwrap();
    for m in [1usize, 4, 16, 64] {
        let inc: Vec<f64> = p
            .phases()
            .chunks(m)
            .map(|c| c[0])
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        let k = inc.len() as f64;
        let var = inc.iter().map(|d| d * d).sum::<f64>() / k;
        let expect = 2.0 * std::f64::consts::PI * 5e6 * m as f64 * t;
        let se = expect * (2.0 / k).sqrt();
        assert!(
            (var - expect).abs() < 3.0 * se,
            "lag {m}: {var} vs {expect} ± {se}"
        );
    }
}

fn constant(n: usize) -> ComplexSignal {
    ComplexSignal::new(vec![Complex64::new(0.6, -0.8); n], 1.0 / 56e9).unwrap()
}

fn noise_of(out: &ComplexSignal, sig: &ComplexSignal) -> Vec<Complex64> {
    out.samples()
        .iter()
        .zip(sig.samples())
        .map(|(a, b)| a - b)
        .collect()
}

#[test]
fn snr_matches_target() {
    let sig = constant(N);
    for osnr in [6.0, 10.0, 20.0] {
        let out =
            load_noise_for_osnr(&sig, Osnr::Db(osnr), 28e9, 12.5e9, &RngStream::new(5, 1)).unwrap();
        let n = noise_of(&out, &sig);
        let pn = n.iter().map(|z| z.norm_sqr()).sum::<f64>() / N as f64;
        let snr_db = 10.0 * (sig.mean_power() / pn).log10();
        let target = 10.0 * (osnr_to_es_n0_for_test(osnr)).log10();
        assert!((snr_db - target).abs() < 0.1, "{snr_db} vs {target}");
    }
}

fn osnr_to_es_n0_for_test(osnr: f64) -> f64 {
    10f64.powf(osnr / 10.0) * 2.0 * 12.5 / 28.0
}

#[test]
fn noise_is_circular_and_stream_specific() {
    let sig = constant(N);
    let a = noise_of(
        &load_noise_for_osnr(&sig, Osnr::Db(10.0), 28e9, 12.5e9, &RngStream::new(5, 1)).unwrap(),
        &sig,
    );
    let b = noise_of(
        &load_noise_for_osnr(&sig, Osnr::Db(10.0), 28e9, 12.5e9, &RngStream::new(5, 2)).unwrap(),
        &sig,
    );
    assert_ne!(a, b);
    let power = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>() / N as f64;
    let (pa, pb) = (power(&a), power(&b));
    // Each power estimate has relative standard error 1/√N.
    assert!((pa / pb - 1.0).abs() < 5.0 * (2.0 / N as f64).sqrt());
    let pseudo: Complex64 = a.iter().map(|z| z * z).sum::<Complex64>() / N as f64;
    assert!(pseudo.norm() / pa < 5.0 / (N as f64).sqrt());
    let cross: Complex64 = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        / N as f64;
    assert!(cross.norm() / pa < 5.0 / (N as f64).sqrt());
}

#[test]
fn same_stream_same_noise() {
    let sig = constant(1000);
    let s = RngStream::new(8, 8);
    let a = load_noise_for_osnr(&sig, Osnr::Db(12.0), 28e9, 12.5e9, &s).unwrap();
    let b = load_noise_for_osnr(&sig, Osnr::Db(12.0), 28e9, 12.5e9, &s).unwrap();
    assert_eq!(a, b);
}
