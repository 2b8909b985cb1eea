//! Closed-form EEPN chain against values computed independently at 40-digit
//! precision, and the erfc wrapper against a series/continued-fraction
//! reference written here.

use eepnlab::analytics::*;

fn clock() -> SymbolClock {
    SymbolClock::default_28g()
}

fn fiber() -> FiberSpec {
    FiberSpec::from_engineering(16.0, 2000.0, 1550.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Maclaurin series of erf for small x, Lentz continued fraction of erfc
/// for large x.
fn erfc_ref(x: f64) -> f64 {
    if x < 1.0 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..100_000 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }
}

#[test]
fn erfc_matches_reference_and_tables() {
    let table = [
        (0.1, 0.887_537_083_981_715),
        (0.5, 0.479_500_122_186_953_5),
        (1.0, 0.157_299_207_050_285_13),
        (2.0, 0.004_677_734_981_047_266),
        (3.0, 2.209_049_699_858_544e-5),
        (5.0, 1.537_459_794_428_035e-12),
        (10.0, 2.088_487_583_762_545e-45),
        (20.0, 5.395_865_611_607_901e-176),
        (26.0, 5.663_192_408_856_143e-296),
    ];
    for (x, want) in table {
        assert!(rel(erfc(x), want) < 1e-12, "erfc({x}) = {}", erfc(x));
        assert!(
            rel(erfc_ref(x), want) < 1e-12,
            "reference erfc({x}) = {}",
            erfc_ref(x)
        );
    }
    for i in 0..400 {
        let x = i as f64 * 0.05;
        assert!(rel(erfc(x), erfc_ref(x)) < 1e-12, "x = {x}");
    }
}

#[test]
fn eepn_variance_5mhz() {
    let v = eepn_variance(&fiber(), 5e6, &clock()).unwrap();
    assert!(rel(v, 0.056_394_997_850_675_85) < 1e-9, "{v}");
}

#[test]
fn eepn_linewidths() {
    let l5 = eepn_linewidth(&fiber(), 5e6, &clock()).unwrap();
    let l10 = eepn_linewidth(&fiber(), 10e6, &clock()).unwrap();
    assert!(rel(l5, 251_315_194.860_572_5) < 1e-9, "{l5}");
    assert!(rel(l10, 502_630_389.721_145) < 1e-9, "{l10}");
    assert_eq!(eepn_linewidth(&fiber(), 0.0, &clock()).unwrap(), 0.0);
}

#[test]
fn effective_linewidth_sums() {
    let tx = LaserSpec::new(5e6).unwrap();
    let lo = LaserSpec::new(5e6).unwrap();
    let ee = eepn_linewidth(&fiber(), 5e6, &clock()).unwrap();
    let eff = effective_linewidth(&tx, &lo, ee).unwrap();
    assert!(rel(eff, 261_315_194.860_572_5) < 1e-9, "{eff}");
    let eff =
        effective_linewidth(&LaserSpec::new(10e6).unwrap(), &LaserSpec::ideal(), 0.0).unwrap();
    assert_eq!(eff, 10e6);
}

#[test]
fn floors() {
    let cases = [
        (422e6, 0.094_696_578_558_206_62, 0.005_351_527_372_060_139),
        (10e6, 0.002_243_994_752_564_138, 4.878_652_119_365_31e-62),
        (
            512_630_389.721_145,
            0.115_033_990_453_915_85,
            0.010_288_129_423_097_776,
        ),
        (
            261_315_194.860_572_5,
            0.058_638_992_603_24,
            5.906_214_112_109_422e-4,
        ),
        (100e6, 0.022_439_947_525_641_38, 7.899_789_657_688_388e-8),
        (2e9, 0.448_798_950_512_827_6, 0.120_524_665_628_375_18),
    ];
    for (lw, var, floor) in cases {
        let v = effective_variance(lw, &clock()).unwrap();
        let b = ber_floor(lw, &clock()).unwrap();
        assert!(rel(v, var) < 1e-9, "variance at {lw}: {v}");
        assert!(rel(b, floor) < 1e-9, "floor at {lw}: {b}");
    }
    assert!(ber_floor(10e6, &clock()).unwrap() < 1e-30);
    assert_eq!(ber_floor(0.0, &clock()).unwrap(), 0.0);
}

#[test]
fn floor_chain_for_presets() {
    let p = predict_floor(
        &fiber(),
        &LaserSpec::ideal(),
        &LaserSpec::new(10e6).unwrap(),
        10e6,
        &clock(),
    )
    .unwrap();
    assert!(rel(p.eepn_linewidth_hz, 502_630_389.721_145) < 1e-9);
    assert!(rel(p.ber_floor, 0.010_288_129_423_097_776) < 1e-9);
}

#[test]
fn osnr_conversion_and_awgn_curve() {
    let es = osnr_to_es_n0(10.0, 28e9, 12.5e9).unwrap();
    assert!(rel(es, 8.928_571_428_571_428) < 1e-12);
    assert!(rel(osnr_to_es_n0(0.0, 25e9, 12.5e9).unwrap(), 1.0) < 1e-15);
    assert!(
        rel(
            osnr_to_es_n0(3.01, 25e9, 12.5e9).unwrap(),
            1.999_861_869_632_744
        ) < 1e-12
    );
    assert!(rel(qpsk_ber_awgn(es).unwrap(), 0.001_403_719_231_001_008_4) < 1e-9);
    assert!(osnr_to_es_n0(10.0, 0.0, 12.5e9).is_err());
    assert!(osnr_to_es_n0(10.0, 28e9, -1.0).is_err());
}

#[test]
fn monotone_and_linear() {
    let c = clock();
    let mut last = 0.0;
    for i in 1..200 {
        let b = ber_floor(i as f64 * 10e6, &c).unwrap();
        assert!(b >= last);
        last = b;
    }
    let mut last = 1.0;
    for i in 0..100 {
        let b = qpsk_ber_awgn(i as f64 * 0.2).unwrap();
        assert!(b < last || i == 0);
        last = b;
    }
    let a = eepn_variance(&fiber(), 3e6, &c).unwrap();
    let b = eepn_variance(&fiber(), 6e6, &c).unwrap();
    assert!(rel(b, 2.0 * a) < 1e-14);
    let short = FiberSpec::from_engineering(16.0, 1000.0, 1550.0).unwrap();
    assert!(
        rel(
            eepn_variance(&fiber(), 3e6, &c).unwrap(),
            2.0 * eepn_variance(&short, 3e6, &c).unwrap()
        ) < 1e-14
    );
}
