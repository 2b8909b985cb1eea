use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytics::LaserSpec;
use crate::error::{Error, Result};
use crate::link::{Compensation, LinkScenario};
use crate::noise::Osnr;

/// OSNR axis: `start_db..=stop_db` in steps of `step_db`, optionally
/// followed by a noise-free point that exposes the floor directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OsnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    #[serde(default = "yes")]
    pub include_noise_free: bool,
}

fn yes() -> bool {
    true
}

impl OsnrGrid {
    pub fn points(&self) -> Vec<Osnr> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        let mut out: Vec<Osnr> = (0..n)
            .map(|i| Osnr::Db(self.start_db + i as f64 * self.step_db))
            .collect();
        if self.include_noise_free {
            out.push(Osnr::NoiseFree);
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_db.is_finite() && self.step_db > 0.0) {
            return Err(Error::config(format!(
                "osnr step must be > 0, got {}",
                self.step_db
            )));
        }
        if !(self.start_db.is_finite() && self.stop_db.is_finite()) || self.stop_db < self.start_db
        {
            return Err(Error::config(format!(
                "osnr range [{}, {}] is empty or not finite",
                self.start_db, self.stop_db
            )));
        }
        Ok(())
    }
}

/// A named Tx/LO linewidth split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinewidthSplit {
    pub name: String,
    pub tx_linewidth_hz: f64,
    pub lo_linewidth_hz: f64,
}

impl LinewidthSplit {
    pub fn new(name: &str, tx_linewidth_hz: f64, lo_linewidth_hz: f64) -> Self {
        Self {
            name: name.to_string(),
            tx_linewidth_hz,
            lo_linewidth_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Template for every point; linewidths and OSNR are overridden.
    pub base: LinkScenario,
    pub osnr: OsnrGrid,
    pub scenarios: Vec<LinewidthSplit>,
    /// Stop a point once this many bit errors were seen ...
    pub min_errors: u64,
    /// ... or this many symbols were simulated.
    pub max_symbols: u64,
    /// Worker threads; 0 uses every core. Never affects results.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig4,
    Fig5,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(Error::config(format!("unknown preset {other:?}"))),
        }
    }
}

impl SweepConfig {
    /// 2000 km, 28 GBd QPSK, total linewidth 10 MHz split three ways,
    /// OSNR 6..24 dB plus the noise-free floor. Fig4 compensates in the
    /// receiver, Fig5 in the transmitter.
    pub fn preset(preset: Preset) -> Self {
        let compensation = match preset {
            Preset::Fig4 => Compensation::Post,
            Preset::Fig5 => Compensation::Pre,
        };
        let base = LinkScenario::reference_link(compensation, 0.0, 0.0, 2000.0)
            .expect("preset parameters are valid");
        Self {
            base,
            osnr: OsnrGrid {
                start_db: 6.0,
                stop_db: 24.0,
                step_db: 1.0,
                include_noise_free: true,
            },
            scenarios: vec![
                LinewidthSplit::new("tx10-lo0", 10e6, 0.0),
                LinewidthSplit::new("tx5-lo5", 5e6, 5e6),
                LinewidthSplit::new("tx0-lo10", 0.0, 10e6),
            ],
            min_errors: 100,
            max_symbols: 1 << 21,
            parallelism: 0,
            master_seed: 0,
        }
    }

    /// Parses a JSON config. With a preset the file only needs the keys it
    /// changes; objects are merged recursively into the preset.
    pub fn from_json(text: &str, preset: Option<Preset>) -> Result<Self> {
        let user: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("invalid JSON: {e}")))?;
        let merged = match preset {
            Some(p) => {
                let mut v = serde_json::to_value(Self::preset(p))
                    .map_err(|e| Error::config(e.to_string()))?;
                merge(&mut v, user);
                v
            }
            None => user,
        };
        let cfg: Self = serde_json::from_value(merged)
            .map_err(|e| Error::config(format!("invalid sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, preset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_errors < 1 {
            return Err(Error::config("min_errors must be >= 1"));
        }
        self.osnr.validate()?;
        if self.scenarios.is_empty() {
            return Err(Error::config("at least one scenario is required"));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if self.scenarios[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::config(format!(
                    "duplicate scenario name {:?}",
                    s.name
                )));
            }
            self.scenario(i)?;
        }
        if self.max_symbols < self.base.training_len as u64 {
            return Err(Error::config(format!(
                "max_symbols = {} cannot cover the {} training symbols",
                self.max_symbols, self.base.training_len
            )));
        }
        Ok(())
    }

    /// The base scenario with linewidth split `index` applied.
    pub fn scenario(&self, index: usize) -> Result<LinkScenario> {
        let split = self
            .scenarios
            .get(index)
            .ok_or_else(|| Error::config(format!("no scenario {index}")))?;
        let as_config = |e: Error| match e {
            Error::Domain(m) => Error::config(format!("scenario {:?}: {m}", split.name)),
            other => other,
        };
        let mut sc = self.base.clone();
        sc.tx_laser = LaserSpec::new(split.tx_linewidth_hz).map_err(as_config)?;
        sc.lo_laser = LaserSpec::new(split.lo_linewidth_hz).map_err(as_config)?;
        sc.validate().map_err(as_config)?;
        Ok(sc)
    }

    /// Hex SHA-256 of the canonical JSON form. `parallelism` is left out
    /// since it cannot change any result.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = Self {
            parallelism: 0,
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn merge(dst: &mut Value, src: Value) {
    match (dst, src) {
        (Value::Object(d), Value::Object(s)) => {
            for (k, v) in s {
                match d.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        d.insert(k, v);
                    }
                }
            }
        }
        (d, s) => *d = s,
    }
}
