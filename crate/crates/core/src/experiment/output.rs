//! Command entry points and the on-disk result layout:
//!
//! ```text
//! <out>/spec.json        effective spec (base_seed filled in)
//! <out>/meta.json        command and wall-clock time; the only non-reproducible file
//! <out>/aggregate.csv    one row per cell
//! <out>/runs/<cell>/<rep>.json
//! <out>/traces/<cell>/<rep>.csv
//! ```
//!
//! Every CSV number is written with six decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::spec::{Cell, ExperimentSpec};
use super::{compute_comparison, compute_convergence, compute_oracle, compute_runs, CellRun, ComparisonRow};
use crate::capacity::AntennaSubset;
use crate::error::Result;
use crate::ga::MutationStrategy;
use crate::oracle::DEFAULT_BUDGET;

#[derive(Debug, Clone)]
pub struct CommandOptions {
    pub out_dir: PathBuf,
    pub oracle_budget: u64,
}

impl CommandOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            oracle_budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CommandReport {
    pub out_dir: PathBuf,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn prepare(spec: &ExperimentSpec, opts: &CommandOptions, command: &str) -> Result<()> {
    spec.validate()?;
    fs::create_dir_all(&opts.out_dir)?;
    let effective = ExperimentSpec {
        base_seed: Some(spec.base_seed()),
        ..spec.clone()
    };
    write_file(&opts.out_dir.join("spec.json"), serde_json::to_string_pretty(&effective)? + "\n")?;
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or_default();
    let meta = serde_json::json!({
        "command": command,
        "unix_time": unix_time,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_file(&opts.out_dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn opt6(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Groups cell-major results into per-cell slices.
fn by_cell<T>(items: &[T], reps: usize) -> impl Iterator<Item = &[T]> {
    items.chunks(reps)
}

#[derive(Serialize)]
struct RunRecord<'a> {
    n_t: usize,
    snr_db: f64,
    rep: usize,
    seed: u64,
    strategy: MutationStrategy,
    best_subset: &'a AntennaSubset,
    capacity: f64,
    generations: usize,
    evaluations: u64,
    cache_hits: u64,
    trace: String,
}

fn runs_csv(runs: &[CellRun]) -> String {
    let mut out = String::from("n_t,snr_db,rep,seed,best_subset,capacity\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            r.cell.n_t, r.cell.snr_db, r.rep, r.seed, r.best_subset, r.capacity
        );
    }
    out
}

fn capacity_aggregate(runs: &[CellRun], reps: usize) -> String {
    let mut out = String::from("n_t,snr_db,repetitions,mean_capacity,min_capacity,max_capacity\n");
    for group in by_cell(runs, reps) {
        let caps: Vec<f64> = group.iter().map(|r| r.capacity).collect();
        let min = caps.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = caps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6}",
            group[0].cell.n_t,
            group[0].cell.snr_db,
            group.len(),
            mean(&caps),
            min,
            max
        );
    }
    out
}

/// Runs the GA for every (cell, replicate) and writes per-run JSON, traces,
/// `runs.csv` and `aggregate.csv`.
pub fn cmd_run(spec: &ExperimentSpec, opts: &CommandOptions) -> Result<CommandReport> {
    prepare(spec, opts, "run")?;
    let runs = compute_runs(spec)?;
    let out = &opts.out_dir;
    for r in &runs {
        let trace_rel = format!("traces/{}/{}.csv", r.cell, r.rep);
        let record = RunRecord {
            n_t: r.cell.n_t,
            snr_db: r.cell.snr_db,
            rep: r.rep,
            seed: r.seed,
            strategy: r.strategy,
            best_subset: &r.best_subset,
            capacity: r.capacity,
            generations: r.trace.per_generation().len(),
            evaluations: r.trace.evaluations(),
            cache_hits: r.trace.cache_hits(),
            trace: trace_rel.clone(),
        };
        write_file(
            &out.join(format!("runs/{}/{}.json", r.cell, r.rep)),
            serde_json::to_string_pretty(&record)? + "\n",
        )?;
        write_file(&out.join(trace_rel), r.trace.to_csv())?;
    }
    write_file(&out.join("runs.csv"), runs_csv(&runs))?;
    let aggregate = capacity_aggregate(&runs, spec.repetitions);
    write_file(&out.join("aggregate.csv"), &aggregate)?;
    Ok(CommandReport {
        out_dir: out.clone(),
        summary: aggregate.lines().map(str::to_owned).collect(),
    })
}

/// Replicates whose capacity for some `n_t` does not strictly increase with SNR.
pub fn snr_monotonicity_violations(spec: &ExperimentSpec, runs: &[CellRun]) -> Vec<String> {
    let mut violations = Vec::new();
    let reps = spec.repetitions;
    let n_snr = spec.snr_grid.len();
    for (k, &n_t) in spec.nt_grid.iter().enumerate() {
        let cells = &runs[k * n_snr * reps..(k + 1) * n_snr * reps];
        let mut order: Vec<usize> = (0..n_snr).collect();
        order.sort_by(|&a, &b| spec.snr_grid[a].total_cmp(&spec.snr_grid[b]));
        for rep in 0..reps {
            for w in order.windows(2) {
                let lo = &cells[w[0] * reps + rep];
                let hi = &cells[w[1] * reps + rep];
                if hi.capacity <= lo.capacity {
                    violations.push(format!(
                        "n_t={n_t} rep {rep}: {:.6} at {} dB is not above {:.6} at {} dB",
                        hi.capacity, hi.cell.snr_db, lo.capacity, lo.cell.snr_db
                    ));
                }
            }
        }
    }
    violations
}

/// Capacity of the GA-selected subset over the SNR grid for every `n_t`.
pub fn cmd_sweep_snr(spec: &ExperimentSpec, opts: &CommandOptions) -> Result<CommandReport> {
    prepare(spec, opts, "sweep-snr")?;
    let runs = compute_runs(spec)?;
    let out = &opts.out_dir;
    write_file(&out.join("runs.csv"), runs_csv(&runs))?;
    let aggregate = capacity_aggregate(&runs, spec.repetitions);
    write_file(&out.join("aggregate.csv"), &aggregate)?;
    let mut summary: Vec<String> = aggregate.lines().map(str::to_owned).collect();
    let violations = snr_monotonicity_violations(spec, &runs);
    if violations.is_empty() {
        summary.push("capacity strictly increases with SNR for every n_t and replicate".into());
    } else {
        summary.extend(violations.into_iter().map(|v| format!("warning: {v}")));
    }
    Ok(CommandReport {
        out_dir: out.clone(),
        summary,
    })
}

fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "n_t,snr_db,rep,selected_adaptive,selected_plain,capacity_adaptive,capacity_plain,oracle_capacity,gap_adaptive,gap_plain\n",
    );
    for r in rows {
        let o = r.oracle_capacity();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{},{},{}",
            r.cell.n_t,
            r.cell.snr_db,
            r.rep,
            r.adaptive.best_subset,
            r.plain.best_subset,
            r.adaptive.capacity,
            r.plain.capacity,
            opt6(o),
            opt6(o.map(|o| o - r.adaptive.capacity)),
            opt6(o.map(|o| o - r.plain.capacity)),
        );
    }
    out
}

/// Table-style comparison of both strategies and the oracle. Subsets shown
/// are those of replicate 0; capacities and gaps are means over replicates.
pub fn cmd_compare(spec: &ExperimentSpec, opts: &CommandOptions) -> Result<CommandReport> {
    prepare(spec, opts, "compare")?;
    let rows = compute_comparison(spec, opts.oracle_budget)?;
    let out = &opts.out_dir;
    write_file(&out.join("compare.csv"), comparison_csv(&rows))?;

    let mut agg = String::from(
        "n_t,n_tx,snr_db,repetitions,selected_adaptive,selected_plain,capacity_adaptive,capacity_plain,oracle_capacity,mean_gap_adaptive,mean_gap_plain,median_gap_adaptive\n",
    );
    let n_tx = spec.channel.n_tx;
    for group in by_cell(&rows, spec.repetitions) {
        let first = &group[0];
        let adaptive: Vec<f64> = group.iter().map(|r| r.adaptive.capacity).collect();
        let plain: Vec<f64> = group.iter().map(|r| r.plain.capacity).collect();
        let oracle: Option<Vec<f64>> = group.iter().map(|r| r.oracle_capacity()).collect();
        let gaps = |xs: &[f64]| -> Option<Vec<f64>> {
            oracle.as_ref().map(|o| o.iter().zip(xs).map(|(o, x)| o - x).collect())
        };
        let gap_a = gaps(&adaptive);
        let gap_p = gaps(&plain);
        let _ = writeln!(
            agg,
            "{},{},{},{},{},{},{:.6},{:.6},{},{},{},{}",
            first.cell.n_t,
            n_tx,
            first.cell.snr_db,
            group.len(),
            first.adaptive.best_subset,
            first.plain.best_subset,
            mean(&adaptive),
            mean(&plain),
            opt6(oracle.as_deref().map(mean)),
            opt6(gap_a.as_deref().map(mean)),
            opt6(gap_p.as_deref().map(mean)),
            opt6(gap_a.as_deref().map(median)),
        );
    }
    write_file(&out.join("aggregate.csv"), &agg)?;
    Ok(CommandReport {
        out_dir: out.clone(),
        summary: agg.lines().map(str::to_owned).collect(),
    })
}

/// Relative tolerance for "reached its final value" in convergence summaries.
const REACHED: f64 = 0.0;

fn convergence_trace_csv(row: &ComparisonRow) -> String {
    let mut out = String::from("strategy,generation,evaluations,best_fitness,mean_fitness,best_subset\n");
    for (name, run) in [("adaptive", &row.adaptive), ("plain", &row.plain)] {
        for g in run.trace.per_generation() {
            let _ = writeln!(
                out,
                "{name},{},{},{:.6},{:.6},{}",
                g.generation, g.evaluations, g.best_fitness, g.mean_fitness, g.best_subset
            );
        }
    }
    out
}

/// Per-generation traces of both strategies on identical batches and seeds.
pub fn cmd_convergence(spec: &ExperimentSpec, opts: &CommandOptions) -> Result<CommandReport> {
    prepare(spec, opts, "convergence")?;
    let rows = compute_convergence(spec, opts.oracle_budget)?;
    let out = &opts.out_dir;

    let mut per_run = String::from(
        "n_t,snr_db,rep,final_adaptive,final_plain,generations_adaptive,generations_plain,oracle_capacity,adaptive_hit_oracle,plain_hit_oracle\n",
    );
    for r in &rows {
        write_file(&out.join(format!("traces/{}/{}.csv", r.cell, r.rep)), convergence_trace_csv(r))?;
        let o = r.oracle_capacity();
        let hit = |c: f64| o.map(|o| (c == o).to_string()).unwrap_or_default();
        let _ = writeln!(
            per_run,
            "{},{},{},{:.6},{:.6},{},{},{},{},{}",
            r.cell.n_t,
            r.cell.snr_db,
            r.rep,
            r.adaptive.capacity,
            r.plain.capacity,
            r.adaptive.trace.generations_to_reach(REACHED),
            r.plain.trace.generations_to_reach(REACHED),
            opt6(o),
            hit(r.adaptive.capacity),
            hit(r.plain.capacity),
        );
    }
    write_file(&out.join("convergence.csv"), &per_run)?;

    let mut agg = String::from(
        "n_t,snr_db,repetitions,mean_final_adaptive,mean_final_plain,median_generations_adaptive,median_generations_plain,adaptive_not_slower,adaptive_oracle_hits,plain_oracle_hits\n",
    );
    let mut summary = Vec::new();
    for group in by_cell(&rows, spec.repetitions) {
        let cell: Cell = group[0].cell;
        let gens = |f: fn(&ComparisonRow) -> &CellRun| -> Vec<f64> {
            group.iter().map(|r| f(r).trace.generations_to_reach(REACHED) as f64).collect()
        };
        let ga = gens(|r| &r.adaptive);
        let gp = gens(|r| &r.plain);
        let not_slower = ga.iter().zip(&gp).filter(|(a, p)| a <= p).count();
        let hits = |f: fn(&ComparisonRow) -> f64| -> String {
            if group.iter().all(|r| r.oracle.is_some()) {
                group
                    .iter()
                    .filter(|r| Some(f(r)) == r.oracle_capacity())
                    .count()
                    .to_string()
            } else {
                String::new()
            }
        };
        let fa: Vec<f64> = group.iter().map(|r| r.adaptive.capacity).collect();
        let fp: Vec<f64> = group.iter().map(|r| r.plain.capacity).collect();
        let _ = writeln!(
            agg,
            "{},{},{},{:.6},{:.6},{},{},{},{},{}",
            cell.n_t,
            cell.snr_db,
            group.len(),
            mean(&fa),
            mean(&fp),
            median(&ga),
            median(&gp),
            not_slower,
            hits(|r| r.adaptive.capacity),
            hits(|r| r.plain.capacity),
        );
        summary.push(format!(
            "{cell}: adaptive reaches its final value in a median of {} generations, plain in {}; adaptive is not slower in {not_slower}/{} runs",
            median(&ga),
            median(&gp),
            group.len()
        ));
    }
    write_file(&out.join("aggregate.csv"), &agg)?;
    Ok(CommandReport {
        out_dir: out.clone(),
        summary,
    })
}

/// Exhaustive search per (cell, replicate): `oracle/<cell>/<rep>.json`, plus
/// `<rep>_ranked.csv` when the spec asks for the ranking.
pub fn cmd_oracle(spec: &ExperimentSpec, opts: &CommandOptions) -> Result<CommandReport> {
    spec.validate()?;
    let results = compute_oracle(spec, opts.oracle_budget)?;
    prepare(spec, opts, "oracle")?;
    let out = &opts.out_dir;
    let mut agg = String::from("n_t,snr_db,rep,best_subset,best_capacity,subsets_evaluated\n");
    for (cell, rep, result) in &results {
        write_file(
            &out.join(format!("oracle/{cell}/{rep}.json")),
            serde_json::to_string_pretty(result)? + "\n",
        )?;
        if result.ranked.is_some() {
            write_file(&out.join(format!("oracle/{cell}/{rep}_ranked.csv")), result.ranked_csv())?;
        }
        let _ = writeln!(
            agg,
            "{},{},{},{},{:.6},{}",
            cell.n_t, cell.snr_db, rep, result.best_subset, result.best_capacity, result.subsets_evaluated
        );
    }
    write_file(&out.join("aggregate.csv"), &agg)?;
    Ok(CommandReport {
        out_dir: out.clone(),
        summary: agg.lines().map(str::to_owned).collect(),
    })
}
