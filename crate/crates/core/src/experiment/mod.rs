//! Seeded experiment grids over `(n_t, SNR)` cells.
//!
//! Replicate `r` draws one channel batch from `base_seed + r` and every cell,
//! strategy and oracle in that replicate is scored on it, so comparisons are
//! paired. The GA in replicate `r` is seeded with the same value. Replicates
//! run in parallel; results are always returned cell-major, then by
//! replicate.

mod output;
mod spec;

use rayon::prelude::*;

use crate::capacity::AntennaSubset;
use crate::channel::{generate_batch, RealizationBatch};
use crate::error::Result;
use crate::ga::{run_on_batch, GaConfig, MutationStrategy, RunTrace};
use crate::oracle::{binomial, exhaustive_search_with, OracleOptions, OracleResult};

pub use output::{
    cmd_compare, cmd_convergence, cmd_oracle, cmd_run, cmd_sweep_snr, snr_monotonicity_violations,
    CommandOptions, CommandReport,
};
pub use spec::{Cell, ExperimentSpec};

/// One GA run in one cell of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRun {
    pub cell: Cell,
    pub rep: usize,
    pub seed: u64,
    pub strategy: MutationStrategy,
    pub best_subset: AntennaSubset,
    pub capacity: f64,
    pub trace: RunTrace,
}

/// Both strategies and, when affordable, the oracle on one shared batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub cell: Cell,
    pub rep: usize,
    pub adaptive: CellRun,
    pub plain: CellRun,
    pub oracle: Option<OracleResult>,
}

impl ComparisonRow {
    pub fn oracle_capacity(&self) -> Option<f64> {
        self.oracle.as_ref().map(|o| o.best_capacity)
    }
}

pub fn replicate_batch(spec: &ExperimentSpec, rep: usize) -> Result<RealizationBatch> {
    generate_batch(&spec.channel, spec.ga.fitness_batch_size, spec.replicate_seed(rep))
}

fn ga_config(spec: &ExperimentSpec, cell: &Cell, rep: usize, strategy: MutationStrategy) -> GaConfig {
    GaConfig {
        seed: spec.replicate_seed(rep),
        mutation_strategy: strategy,
        ..spec.ga_for(cell.n_t)
    }
}

pub fn run_cell(
    spec: &ExperimentSpec,
    batch: &RealizationBatch,
    cell: &Cell,
    rep: usize,
    strategy: MutationStrategy,
) -> Result<CellRun> {
    let ga = ga_config(spec, cell, rep, strategy);
    let out = run_on_batch(batch, &ga, cell.snr()?)?;
    Ok(CellRun {
        cell: *cell,
        rep,
        seed: ga.seed,
        strategy,
        capacity: out.best.fitness.unwrap_or_default(),
        best_subset: out.best.subset,
        trace: out.trace,
    })
}

/// Evaluates `per_cell` for every (cell, replicate), replicates in parallel,
/// and returns results cell-major.
fn for_each_cell<T, F>(spec: &ExperimentSpec, per_cell: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&RealizationBatch, &Cell, usize) -> Result<T> + Sync,
{
    spec.validate()?;
    let cells = spec.cells();
    let by_rep: Vec<Vec<T>> = (0..spec.repetitions)
        .into_par_iter()
        .map(|rep| {
            let batch = replicate_batch(spec, rep)?;
            cells.iter().map(|cell| per_cell(&batch, cell, rep)).collect()
        })
        .collect::<Result<_>>()?;
    let mut iters: Vec<_> = by_rep.into_iter().map(Vec::into_iter).collect();
    let mut out = Vec::with_capacity(cells.len() * spec.repetitions);
    for _ in 0..cells.len() {
        for it in &mut iters {
            out.extend(it.next());
        }
    }
    Ok(out)
}

/// GA runs with the spec's own strategy for every (cell, replicate).
pub fn compute_runs(spec: &ExperimentSpec) -> Result<Vec<CellRun>> {
    let strategy = spec.ga.mutation_strategy;
    for_each_cell(spec, |batch, cell, rep| run_cell(spec, batch, cell, rep, strategy))
}

fn oracle_fits(spec: &ExperimentSpec, n_t: usize, budget: u64) -> bool {
    binomial(spec.channel.n_tx, n_t) <= budget as u128
}

fn run_oracle(
    batch: &RealizationBatch,
    cell: &Cell,
    budget: u64,
    ranked: bool,
) -> Result<OracleResult> {
    exhaustive_search_with(batch, cell.n_t, cell.snr()?, OracleOptions { budget, ranked })
}

/// Adaptive and plain GA on the same batch and seed; the oracle runs for
/// cells whose search space fits `oracle_budget`.
pub fn compute_comparison(spec: &ExperimentSpec, oracle_budget: u64) -> Result<Vec<ComparisonRow>> {
    for_each_cell(spec, |batch, cell, rep| {
        let adaptive = run_cell(spec, batch, cell, rep, MutationStrategy::Adaptive)?;
        let plain = run_cell(spec, batch, cell, rep, MutationStrategy::Plain)?;
        let oracle = oracle_fits(spec, cell.n_t, oracle_budget)
            .then(|| run_oracle(batch, cell, oracle_budget, false))
            .transpose()?;
        Ok(ComparisonRow {
            cell: *cell,
            rep,
            adaptive,
            plain,
            oracle,
        })
    })
}

/// Like [`compute_comparison`], but the oracle runs only when the spec asks
/// for it, and then a cell over budget is an error.
pub fn compute_convergence(spec: &ExperimentSpec, oracle_budget: u64) -> Result<Vec<ComparisonRow>> {
    if spec.oracle {
        check_oracle_budget(spec, oracle_budget)?;
    }
    for_each_cell(spec, |batch, cell, rep| {
        let adaptive = run_cell(spec, batch, cell, rep, MutationStrategy::Adaptive)?;
        let plain = run_cell(spec, batch, cell, rep, MutationStrategy::Plain)?;
        let oracle = spec
            .oracle
            .then(|| run_oracle(batch, cell, oracle_budget, false))
            .transpose()?;
        Ok(ComparisonRow {
            cell: *cell,
            rep,
            adaptive,
            plain,
            oracle,
        })
    })
}

fn check_oracle_budget(spec: &ExperimentSpec, budget: u64) -> Result<()> {
    for &n_t in &spec.nt_grid {
        let subsets = binomial(spec.channel.n_tx, n_t);
        if subsets > budget as u128 {
            return Err(crate::error::Error::Budget {
                n_tx: spec.channel.n_tx,
                n_t,
                subsets,
                budget,
            });
        }
    }
    Ok(())
}

/// Exhaustive search for every (cell, replicate). Fails before any work if
/// a cell exceeds the budget.
pub fn compute_oracle(spec: &ExperimentSpec, budget: u64) -> Result<Vec<(Cell, usize, OracleResult)>> {
    spec.validate()?;
    check_oracle_budget(spec, budget)?;
    for_each_cell(spec, |batch, cell, rep| {
        Ok((*cell, rep, run_oracle(batch, cell, budget, spec.ranked)?))
    })
}
