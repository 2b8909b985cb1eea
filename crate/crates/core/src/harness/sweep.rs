use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::FloorPrediction;
use crate::error::{Error, Result};
use crate::link::{simulate_block, BerRecord, Compensation};
use crate::modem::{ErrorCount, PRBS16_PERIOD};
use crate::noise::{mix64, RngStream};

use super::config::SweepConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetadata {
    pub version: String,
    pub timestamp_unix_s: u64,
    pub config_hash: String,
    pub master_seed: u64,
}

impl RunMetadata {
    /// Stamped with `SOURCE_DATE_EPOCH` when set, for reproducible files.
    fn for_config(cfg: &SweepConfig) -> Self {
        let timestamp_unix_s = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_s,
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultSet {
    pub metadata: RunMetadata,
    pub records: Vec<BerRecord>,
}

impl ResultSet {
    /// Checks that these results were produced from `cfg`: same config hash
    /// and one record per (scenario, OSNR) pair in sweep order.
    pub fn verify(&self, cfg: &SweepConfig) -> Result<()> {
        if self.metadata.config_hash != cfg.hash() {
            return Err(Error::config(format!(
                "config hash mismatch: results {} vs config {}",
                self.metadata.config_hash,
                cfg.hash()
            )));
        }
        let grid = cfg.osnr.points();
        let expected = cfg.scenarios.len() * grid.len();
        if self.records.len() != expected {
            return Err(Error::config(format!(
                "{} records for {expected} sweep points",
                self.records.len()
            )));
        }
        let pairs = cfg
            .scenarios
            .iter()
            .flat_map(|s| grid.iter().map(move |o| (s, o)));
        for (r, (s, o)) in self.records.iter().zip(pairs) {
            if r.scenario != s.name || r.osnr_db != *o {
                return Err(Error::config(format!(
                    "record ({}, {}) out of place, expected ({}, {o})",
                    r.scenario, r.osnr_db, s.name
                )));
            }
        }
        Ok(())
    }
}

/// Random stream id of one trial; depends only on its coordinates.
pub fn trial_stream_id(scenario: usize, osnr: usize, trial: u64) -> u64 {
    mix64(mix64(mix64(scenario as u64) ^ osnr as u64) ^ trial)
}

/// Monte Carlo estimate for one (scenario, OSNR) point.
///
/// Trials are simulated in parallel batches but accumulated in trial order;
/// the point stops at the first trial prefix reaching `min_errors` errors or
/// `max_symbols` simulated symbols, so the batch size never shows in the
/// result.
pub fn run_point(cfg: &SweepConfig, scenario: usize, osnr_index: usize) -> Result<BerRecord> {
    let osnr = *cfg
        .osnr
        .points()
        .get(osnr_index)
        .ok_or_else(|| Error::config(format!("no OSNR point {osnr_index}")))?;
    let mut sc = cfg.scenario(scenario)?;
    sc.osnr_db = osnr;
    let name = &cfg.scenarios[scenario].name;

    let max_trials = cfg.max_symbols.div_ceil(sc.n_symbols as u64).max(1);
    let batch = rayon::current_num_threads().max(1) as u64;
    let block_bits = sc.bits_per_block() as u64;
    let mut total = ErrorCount::default();
    let mut next = 0;
    'outer: while next < max_trials {
        let end = (next + batch).min(max_trials);
        let counts = (next..end)
            .into_par_iter()
            .map(|t| {
                let mut trial = sc.clone();
                trial.rng =
                    RngStream::new(cfg.master_seed, trial_stream_id(scenario, osnr_index, t));
                trial.data_offset = ((t * block_bits) % PRBS16_PERIOD as u64) as usize;
                simulate_block(&trial)
            })
            .collect::<Result<Vec<_>>>()?;
        for c in counts {
            total = total + c;
            next += 1;
            if total.errors >= cfg.min_errors {
                break 'outer;
            }
        }
    }
    BerRecord::from_count(name, &sc, total)
}

fn pool(cfg: &SweepConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} workers: {e}", cfg.parallelism)))
}

/// Runs every (scenario, OSNR) point of the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ResultSet> {
    cfg.validate()?;
    let n_osnr = cfg.osnr.points().len();
    let points: Vec<(usize, usize)> = (0..cfg.scenarios.len())
        .flat_map(|s| (0..n_osnr).map(move |o| (s, o)))
        .collect();
    let records = pool(cfg)?.install(|| {
        points
            .par_iter()
            .map(|&(s, o)| run_point(cfg, s, o))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ResultSet {
        metadata: RunMetadata::for_config(cfg),
        records,
    })
}

/// Analytic floor of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryRow {
    pub scenario: String,
    pub compensation: Compensation,
    pub distance_km: f64,
    pub df_tx_hz: f64,
    pub df_lo_hz: f64,
    pub eepn_lw_hz: f64,
    pub eff_lw_hz: f64,
    pub eff_variance: f64,
    pub ber_floor_theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryTable {
    pub metadata: RunMetadata,
    pub rows: Vec<TheoryRow>,
}

/// Closed-form EEPN linewidth, effective linewidth, effective phase
/// variance and BER floor per scenario, without simulation.
pub fn theory_table(cfg: &SweepConfig) -> Result<TheoryTable> {
    cfg.validate()?;
    let rows = (0..cfg.scenarios.len())
        .map(|i| {
            let sc = cfg.scenario(i)?;
            let FloorPrediction {
                eepn_linewidth_hz,
                effective_linewidth_hz,
                effective_variance,
                ber_floor,
            } = sc.prediction()?;
            Ok(TheoryRow {
                scenario: cfg.scenarios[i].name.clone(),
                compensation: sc.compensation,
                distance_km: sc.fiber.length_km(),
                df_tx_hz: sc.tx_laser.linewidth(),
                df_lo_hz: sc.lo_laser.linewidth(),
                eepn_lw_hz: eepn_linewidth_hz,
                eff_lw_hz: effective_linewidth_hz,
                eff_variance: effective_variance,
                ber_floor_theory: ber_floor,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryTable {
        metadata: RunMetadata::for_config(cfg),
        rows,
    })
}
