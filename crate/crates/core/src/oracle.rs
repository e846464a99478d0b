//! Exhaustive search over every `n_t`-subset: the ground truth for the GA.

use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;

use crate::capacity::{ergodic_capacity, AntennaSubset, Snr};
use crate::channel::RealizationBatch;
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// `C(n, k)`, exact.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub budget: u64,
    pub ranked: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            ranked: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedSubset {
    pub subset: AntennaSubset,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_subset: AntennaSubset,
    pub best_capacity: f64,
    pub subsets_evaluated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranked: Option<Vec<RankedSubset>>,
}

impl OracleResult {
    /// `subset,capacity` rows in ranked order; empty body when no ranking was kept.
    pub fn ranked_csv(&self) -> String {
        let mut out = String::from("subset,capacity\n");
        for r in self.ranked.iter().flatten() {
            let _ = writeln!(out, "{},{:.6}", r.subset, r.capacity);
        }
        out
    }
}

pub fn exhaustive_search(batch: &RealizationBatch, n_t: usize, snr: Snr) -> Result<OracleResult> {
    exhaustive_search_with(batch, n_t, snr, OracleOptions::default())
}

/// Enumerates subsets in lexicographic order and keeps the first maximizer.
pub fn exhaustive_search_with(
    batch: &RealizationBatch,
    n_t: usize,
    snr: Snr,
    options: OracleOptions,
) -> Result<OracleResult> {
    let n_tx = batch.config().n_tx;
    if n_t == 0 || n_t > n_tx {
        return Err(Error::config(format!("n_t={n_t} is not in 1..={n_tx}")));
    }
    let subsets = binomial(n_tx, n_t);
    if subsets > options.budget as u128 {
        return Err(Error::Budget {
            n_tx,
            n_t,
            subsets,
            budget: options.budget,
        });
    }

    let mut best: Option<(f64, AntennaSubset)> = None;
    let mut ranked = Vec::new();
    let mut evaluated = 0u64;
    for positions in (0..n_tx).combinations(n_t) {
        let subset = AntennaSubset::from_positions(n_tx, &positions)?;
        let capacity = ergodic_capacity(batch, &subset, snr)?.bits_per_s_per_hz;
        evaluated += 1;
        if best.as_ref().is_none_or(|(c, _)| capacity > *c) {
            best = Some((capacity, subset.clone()));
        }
        if options.ranked {
            ranked.push(RankedSubset { subset, capacity });
        }
    }
    // stable: equal capacities stay in lexicographic order
    ranked.sort_by(|a, b| b.capacity.total_cmp(&a.capacity));

    let (best_capacity, best_subset) = best.expect("at least one subset");
    Ok(OracleResult {
        best_subset,
        best_capacity,
        subsets_evaluated: evaluated,
        ranked: options.ranked.then_some(ranked),
    })
}
