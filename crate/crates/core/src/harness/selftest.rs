//! Invariant checks behind `eepnlab selftest`.

use num_complex::Complex64;
use rand::Rng;

use crate::analytics::{FiberSpec, LaserSpec, SymbolClock};
use crate::dispersion::{apply_cd_frequency_domain, fir_tap_count, CdOperator};
use crate::error::Result;
use crate::link::{simulate_block, Compensation, LinkScenario};
use crate::modem::{Constellation, Prbs16, PRBS16_PERIOD};
use crate::noise::{gen_wiener_phase, Osnr, RngStream};
use crate::rxdsp::{cpe_lms, LmsState};
use crate::signal::ComplexSignal;

use super::config::{LinewidthSplit, OsnrGrid, SweepConfig};
use super::sweep::run_sweep;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Runs every check; takes a few seconds in an optimized build.
pub fn selftest() -> Vec<Check> {
    vec![
        check("dispersion all-pass and inverse", dispersion_identities()),
        check("fir tap count at 2000 km", tap_count()),
        check("wiener increment statistics", wiener_statistics()),
        check("prbs16 period", prbs_period()),
        check("determinism under parallelism", determinism()),
        check("lms noiseless tracking", lms_noiseless()),
    ]
}

fn dispersion_identities() -> Result<(bool, String)> {
    let clock = SymbolClock::default_28g();
    let mut g = RngStream::new(1, 1).generator();
    let x: Vec<Complex64> = (0..8192)
        .map(|_| Complex64::new(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5))
        .collect();
    let sig = ComplexSignal::new(x, clock.sample_period())?;
    let fiber = FiberSpec::ssmf(2000.0)?;
    let y = apply_cd_frequency_domain(&sig, &CdOperator::fiber(fiber))?;
    let z = apply_cd_frequency_domain(&y, &CdOperator::inverse(fiber))?;
    let energy = (y.energy() / sig.energy() - 1.0).abs();
    let round_trip = z
        .samples()
        .iter()
        .zip(sig.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((
        energy < 1e-10 && round_trip < 1e-10,
        format!("energy error {energy:.2e}, round-trip error {round_trip:.2e}"),
    ))
}

fn tap_count() -> Result<(bool, String)> {
    let n = fir_tap_count(
        &FiberSpec::ssmf(2000.0)?,
        SymbolClock::default_28g().sample_period(),
    );
    Ok((n == 805, format!("N = {n}")))
}

fn wiener_statistics() -> Result<(bool, String)> {
    let n = 1 << 20;
    let t = SymbolClock::default_28g().sample_period();
    let laser = LaserSpec::new(10e6)?;
    let p = gen_wiener_phase(n + 1, &laser, t, &RngStream::new(3, 5))?;
    let inc: Vec<f64> = p.phases().windows(2).map(|w| w[1] - w[0]).collect();
    let mean = inc.iter().sum::<f64>() / n as f64;
    let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let expect = laser.phase_variance(t);
    let z_mean = mean / (expect / n as f64).sqrt();
    let z_var = (var / expect - 1.0) / (2.0 / n as f64).sqrt();
    Ok((
        z_mean.abs() < 5.0 && z_var.abs() < 5.0,
        format!("variance {var:.4e} vs {expect:.4e} (z = {z_var:.2}), mean z = {z_mean:.2}"),
    ))
}

fn prbs_period() -> Result<(bool, String)> {
    let mut g = Prbs16::new(0xFFFF)?;
    let start = g.state();
    let mut steps = 0;
    loop {
        g.next_bit();
        steps += 1;
        if g.state() == start || steps > PRBS16_PERIOD {
            break;
        }
    }
    Ok((steps == PRBS16_PERIOD, format!("period {steps}")))
}

fn determinism() -> Result<(bool, String)> {
    let mut base = LinkScenario::reference_link(Compensation::Post, 0.0, 0.0, 100.0)?;
    base.n_symbols = 4096;
    base.training_len = 200;
    let mut cfg = SweepConfig {
        base,
        osnr: OsnrGrid {
            start_db: 8.0,
            stop_db: 10.0,
            step_db: 2.0,
            include_noise_free: true,
        },
        scenarios: vec![
            LinewidthSplit::new("quiet", 0.0, 0.0),
            LinewidthSplit::new("lo", 0.0, 50e6),
        ],
        min_errors: 40,
        max_symbols: 4096 * 12,
        parallelism: 1,
        master_seed: 11,
    };
    let serial = run_sweep(&cfg)?;
    cfg.parallelism = 4;
    let parallel = run_sweep(&cfg)?;
    let same = serial.records == parallel.records
        && serial.metadata.config_hash == parallel.metadata.config_hash;
    let bits: u64 = serial.records.iter().map(|r| r.n_bits).sum();
    Ok((
        same,
        format!(
            "{} points, {bits} bits, 1 vs 4 workers",
            serial.records.len()
        ),
    ))
}

fn lms_noiseless() -> Result<(bool, String)> {
    let c = Constellation::qpsk();
    let mut g = RngStream::new(9, 9).generator();
    let tx: Vec<Complex64> = (0..4000)
        .map(|_| c.points()[g.random_range(0..4)])
        .collect();
    let rot = Complex64::from_polar(1.0, 0.4);
    let rx: Vec<Complex64> = tx.iter().map(|s| s * rot).collect();
    let mut errors = 0;
    for mu in [0.01, 0.1, 0.2, 0.5] {
        let state = LmsState::from_training(&rx[..100], &tx[..100], mu)?;
        let (y, _) = cpe_lms(&rx, &tx[..100], state, &c)?;
        errors += y[100..]
            .iter()
            .zip(&tx[100..])
            .filter(|(a, b)| c.nearest(**a) != c.nearest(**b))
            .count() as u64;
    }
    for comp in [Compensation::Post, Compensation::Pre] {
        let mut sc = LinkScenario::reference_link(comp, 0.0, 0.0, 2000.0)?;
        sc.osnr_db = Osnr::NoiseFree;
        sc.n_symbols = 1 << 13;
        errors += simulate_block(&sc)?.errors;
    }
    Ok((errors == 0, format!("{errors} errors")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
