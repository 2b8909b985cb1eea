use eepnlab::link::*;
use eepnlab::noise::{Osnr, RngStream};

fn scenario(comp: Compensation, tx: f64, lo: f64, km: f64) -> LinkScenario {
    LinkScenario::reference_link(comp, tx, lo, km).unwrap()
}

#[test]
fn no_dispersion_no_noise_no_errors() {
    for (tx, lo) in [(10e6, 0.0), (5e6, 5e6), (0.0, 10e6)] {
        let mut sc = scenario(Compensation::Optical, tx, lo, 2000.0);
        sc.n_symbols = 100_000;
        sc.rng = RngStream::new(3, 7);
        let r = simulate_optical_comp(&sc).unwrap();
        assert_eq!(r.n_errors, 0, "({tx}, {lo})");
        assert_eq!(r.n_bits, sc.counted_bits() as u64);
        assert!(r.n_bits > 180_000);
        assert!(r.ber_floor_theory < 1e-30);
        assert_eq!(r.eepn_lw_hz, 0.0);
    }
}

#[test]
fn both_tx_equalizers_are_transparent() {
    for eq in [TxEqualizer::Exact, TxEqualizer::Fir] {
        let mut sc = scenario(Compensation::Pre, 0.0, 0.0, 2000.0);
        sc.n_symbols = 1 << 14;
        sc.tx_equalizer = eq;
        assert_eq!(simulate_pre(&sc).unwrap().n_errors, 0, "{eq:?}");
    }
}

#[test]
fn laser_on_the_far_side_of_the_equalizer_is_harmless() {
    // Post-compensation with only a Tx laser and pre-compensation with only
    // an LO: the laser phase never crosses uncompensated dispersion.
    let mut post = scenario(Compensation::Post, 10e6, 0.0, 2000.0);
    let mut pre = scenario(Compensation::Pre, 0.0, 10e6, 2000.0);
    for sc in [&mut post, &mut pre] {
        sc.osnr_db = Osnr::Db(20.0);
        sc.rng = RngStream::new(1, 2);
    }
    let a = simulate_post(&post).unwrap();
    let b = simulate_pre(&pre).unwrap();
    assert!(a.ber < 1e-3, "{}", a.ber);
    assert!(b.ber < 1e-3, "{}", b.ber);
}

#[test]
fn record_fields_follow_scenario() {
    let mut sc = scenario(Compensation::Post, 0.0, 10e6, 2000.0);
    sc.n_symbols = 1 << 13;
    let r = simulate_post(&sc).unwrap();
    assert_eq!(r.distance_km, 2000.0);
    assert_eq!(r.df_lo_hz, 10e6);
    assert_eq!(r.osnr_db, Osnr::NoiseFree);
    assert_eq!(r.n_bits, sc.counted_bits() as u64);
    assert!((r.eepn_lw_hz / 502_630_389.721_145 - 1.0).abs() < 1e-9);
}

#[test]
fn simulate_entry_points_check_mode() {
    let sc = scenario(Compensation::Post, 0.0, 0.0, 100.0);
    assert!(simulate_pre(&sc).is_err());
    assert!(simulate_optical_comp(&sc).is_err());
    assert!(simulate_post(&sc).is_ok());
}

#[test]
fn blocks_are_reproducible() {
    let mut sc = scenario(Compensation::Post, 0.0, 10e6, 2000.0);
    sc.n_symbols = 1 << 14;
    sc.osnr_db = Osnr::Db(14.0);
    sc.rng = RngStream::new(5, 5);
    let a = simulate_block(&sc).unwrap();
    assert_eq!(a, simulate_block(&sc).unwrap());
    sc.rng = RngStream::new(5, 6);
    assert_ne!(a, simulate_block(&sc).unwrap());
}
