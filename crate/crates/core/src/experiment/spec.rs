use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::Snr;
use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::ga::GaConfig;

fn one() -> usize {
    1
}

/// An experiment grid read from JSON.
///
/// ```json
/// {
///   "channel": {"n_tx": 10, "n_rx": 10, "n_subcarriers": 16, "n_taps": 3, "seed": 1},
///   "ga": {"population_size": 20, "max_generations": 30, "fitness_batch_size": 100},
///   "snr_grid": [15.0],
///   "nt_grid": [2, 4, 6, 8],
///   "repetitions": 5,
///   "output_dir": "out/table2"
/// }
/// ```
///
/// `ga.subset_size` is ignored; each cell uses its `nt_grid` entry.
/// `base_seed` defaults to `channel.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub channel: ChannelConfig,
    #[serde(default)]
    pub ga: GaConfig,
    pub snr_grid: Vec<f64>,
    pub nt_grid: Vec<usize>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub base_seed: Option<u64>,
    /// Also run the exhaustive oracle in `convergence`.
    #[serde(default)]
    pub oracle: bool,
    /// Keep the full ranked list in `oracle` output.
    #[serde(default)]
    pub ranked: bool,
}

impl ExperimentSpec {
    /// Parses and validates a spec file. Parse errors carry line and column.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::Spec {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.snr_grid.is_empty() || self.nt_grid.is_empty() {
            return Err(Error::config("snr_grid and nt_grid must be non-empty"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        for (k, &db) in self.snr_grid.iter().enumerate() {
            Snr::from_db(db).map_err(|_| Error::config(format!("snr_grid[{k}] = {db} is not a finite SNR")))?;
        }
        for (k, &n_t) in self.nt_grid.iter().enumerate() {
            if n_t == 0 || n_t > self.channel.n_tx {
                return Err(Error::config(format!(
                    "nt_grid[{k}] = {n_t} is infeasible for n_tx = {}",
                    self.channel.n_tx
                )));
            }
            self.ga_for(n_t).validate(self.channel.n_tx)?;
        }
        Ok(())
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed.unwrap_or(self.channel.seed)
    }

    /// Replicate `rep` seeds both its channel batch and its GA runs.
    pub fn replicate_seed(&self, rep: usize) -> u64 {
        self.base_seed().wrapping_add(rep as u64)
    }

    pub(crate) fn ga_for(&self, n_t: usize) -> GaConfig {
        GaConfig {
            subset_size: n_t,
            ..self.ga
        }
    }

    /// Cells in output order: `nt_grid` outer, `snr_grid` inner.
    pub fn cells(&self) -> Vec<Cell> {
        self.nt_grid
            .iter()
            .flat_map(|&n_t| self.snr_grid.iter().map(move |&snr_db| Cell { n_t, snr_db }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n_t: usize,
    pub snr_db: f64,
}

impl Cell {
    pub fn snr(&self) -> Result<Snr> {
        Snr::from_db(self.snr_db)
    }
}

/// Directory-safe cell name, e.g. `nt8_snr15`.
impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nt{}_snr{}", self.n_t, self.snr_db)
    }
}
