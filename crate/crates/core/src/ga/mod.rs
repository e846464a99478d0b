//! Genetic search for the capacity-maximizing antenna subset.
//!
//! A run is: random initialization, fitness evaluation, then for each
//! generation shuffle-and-pair crossover, mutation of every child, and an
//! elitist pool that keeps the best `population_size` of parents plus
//! children. Mutation is either [`MutationStrategy::Plain`] (one random
//! swap) or [`MutationStrategy::Adaptive`], which scores a move at every
//! selected antenna and commits only the best one.
//!
//! Every chromosome in a run is scored on the same [`RealizationBatch`], so
//! fitness is a pure function of the mask and is cached per run.

mod operators;
mod trace;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::capacity::{ergodic_capacity, AntennaSubset, Snr};
use crate::channel::{generate_batch, ChannelConfig, RealizationBatch};
use crate::error::{Error, Result};
use crate::rng::{streams, SimRng};

pub use operators::{
    adaptive_mutation, crossover, crossover_masks, feasible_points, init_population,
    plain_mutation, repair_cardinality, select_next_generation, MutationPointSet, Offspring,
};
pub use trace::{GenerationRecord, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationStrategy {
    Plain,
    Adaptive,
}

/// How the adaptive operator picks the antenna that replaces a deselected one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartnerMode {
    /// A uniformly random unselected antenna.
    RandomZero,
    /// Every unselected antenna is tried; the best one is kept.
    #[default]
    BestSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub subset_size: usize,
    pub crossover_rate: f64,
    /// Zero means the initial population is evaluated and nothing else.
    pub max_generations: usize,
    pub mutation_strategy: MutationStrategy,
    pub adaptive_partner_mode: PartnerMode,
    pub seed: u64,
    pub fitness_batch_size: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            subset_size: 1,
            crossover_rate: 0.5,
            max_generations: 30,
            mutation_strategy: MutationStrategy::Adaptive,
            adaptive_partner_mode: PartnerMode::BestSwap,
            seed: 0,
            fitness_batch_size: 100,
        }
    }
}

impl GaConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self, n_tx: usize) -> Result<()> {
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(Error::config(format!(
                "population_size must be even and at least 2, got {}",
                self.population_size
            )));
        }
        if self.subset_size == 0 || self.subset_size > n_tx {
            return Err(Error::config(format!(
                "subset_size {} is not in 1..={n_tx}",
                self.subset_size
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::config(format!(
                "crossover_rate {} is not a probability",
                self.crossover_rate
            )));
        }
        if self.fitness_batch_size == 0 {
            return Err(Error::config("fitness_batch_size must be at least 1"));
        }
        Ok(())
    }

    /// Fitness requests a run issues, cache hits included.
    pub fn expected_evaluations(&self, n_tx: usize) -> u64 {
        let n = self.population_size as u64;
        let n_t = self.subset_size as u64;
        let zeros = n_tx as u64 - n_t;
        let per_generation = match self.mutation_strategy {
            MutationStrategy::Plain => n,
            MutationStrategy::Adaptive => {
                let per_child = if zeros == 0 {
                    0
                } else {
                    match self.adaptive_partner_mode {
                        PartnerMode::BestSwap => n_t * zeros,
                        PartnerMode::RandomZero => n_t,
                    }
                };
                n + n * per_child
            }
        };
        n + self.max_generations as u64 * per_generation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub subset: AntennaSubset,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(subset: AntennaSubset) -> Self {
        Self {
            subset,
            fitness: None,
        }
    }

    pub(crate) fn scored(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::Internal(format!("chromosome {} was never evaluated", self.subset)))
    }
}

/// Scores subsets against one batch and SNR, with a per-run cache.
#[derive(Debug)]
pub struct FitnessEvaluator<'a> {
    batch: &'a RealizationBatch,
    snr: Snr,
    cache: HashMap<AntennaSubset, f64>,
    evaluations: u64,
    cache_hits: u64,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(batch: &'a RealizationBatch, snr: Snr) -> Self {
        Self {
            batch,
            snr,
            cache: HashMap::new(),
            evaluations: 0,
            cache_hits: 0,
        }
    }

    pub fn fitness(&mut self, subset: &AntennaSubset) -> Result<f64> {
        self.evaluations += 1;
        if let Some(&f) = self.cache.get(subset) {
            self.cache_hits += 1;
            return Ok(f);
        }
        let f = ergodic_capacity(self.batch, subset, self.snr)?.bits_per_s_per_hz;
        self.cache.insert(subset.clone(), f);
        Ok(f)
    }

    pub fn evaluate(&mut self, chromosome: &mut Chromosome) -> Result<f64> {
        let f = self.fitness(&chromosome.subset)?;
        chromosome.fitness = Some(f);
        Ok(f)
    }

    /// Fitness requests so far, including cache hits.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits
    }

    pub fn batch(&self) -> &RealizationBatch {
        self.batch
    }

    pub fn snr(&self) -> Snr {
        self.snr
    }
}

/// Uncached fitness: the ergodic capacity of the chromosome's subset, stored
/// on the chromosome.
pub fn evaluate_fitness(chromosome: &mut Chromosome, batch: &RealizationBatch, snr: Snr) -> Result<f64> {
    let f = ergodic_capacity(batch, &chromosome.subset, snr)?.bits_per_s_per_hz;
    chromosome.fitness = Some(f);
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Chromosome,
    pub trace: RunTrace,
}

/// Draws a batch of `ga.fitness_batch_size` realizations from `channel.seed`
/// and runs the GA on it.
pub fn run(channel: &ChannelConfig, ga: &GaConfig, snr: Snr) -> Result<RunOutcome> {
    channel.validate()?;
    ga.validate(channel.n_tx)?;
    let batch = generate_batch(channel, ga.fitness_batch_size, channel.seed)?;
    run_on_batch(&batch, ga, snr)
}

/// Runs the GA on a caller-supplied batch (used for paired comparisons).
pub fn run_on_batch(batch: &RealizationBatch, ga: &GaConfig, snr: Snr) -> Result<RunOutcome> {
    let n_tx = batch.config().n_tx;
    ga.validate(n_tx)?;
    let mut rng = SimRng::new(ga.seed).split(streams::GA);
    let mut evaluator = FitnessEvaluator::new(batch, snr);

    let mut population = init_population(ga, n_tx, &mut rng)?;
    for c in &mut population {
        evaluator.evaluate(c)?;
    }
    population = select_next_generation(population, Vec::new(), ga.population_size)?;
    let mut trace = RunTrace::new(GenerationRecord::summarize(0, &population, &evaluator)?);

    let mut order: Vec<usize> = (0..population.len()).collect();
    for generation in 1..=ga.max_generations {
        order.shuffle(&mut rng);
        let mut children = Vec::with_capacity(population.len());
        for pair in order.chunks_exact(2) {
            let off = crossover(&population[pair[0]], &population[pair[1]], ga, &mut rng)?;
            children.push(off.first);
            children.push(off.second);
        }
        match ga.mutation_strategy {
            MutationStrategy::Plain => {
                for child in &mut children {
                    *child = plain_mutation(child, &mut rng);
                    evaluator.evaluate(child)?;
                }
            }
            MutationStrategy::Adaptive => {
                for child in &mut children {
                    evaluator.evaluate(child)?;
                    *child = adaptive_mutation(child, &mut evaluator, ga.adaptive_partner_mode, &mut rng)?;
                }
            }
        }
        population = select_next_generation(population, children, ga.population_size)?;
        trace.push(GenerationRecord::summarize(generation, &population, &evaluator)?);
    }

    Ok(RunOutcome {
        best: population.swap_remove(0),
        trace,
    })
}
