use std::fmt::Write as _;

use super::{Chromosome, FitnessEvaluator};
use crate::capacity::AntennaSubset;
use crate::error::{Error, Result};

/// Population state after one generation's selection. Generation 0 is the
/// evaluated initial population.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_subset: AntennaSubset,
    /// Cumulative fitness requests, cache hits included.
    pub evaluations: u64,
    pub cache_hits: u64,
}

impl GenerationRecord {
    /// `population` must be sorted best-first.
    pub(crate) fn summarize(
        generation: usize,
        population: &[Chromosome],
        evaluator: &FitnessEvaluator<'_>,
    ) -> Result<Self> {
        let best = population
            .first()
            .ok_or_else(|| Error::Internal("empty population".into()))?;
        let mut sum = 0.0;
        for c in population {
            sum += c.scored()?;
        }
        Ok(Self {
            generation,
            best_fitness: best.scored()?,
            mean_fitness: sum / population.len() as f64,
            best_subset: best.subset.clone(),
            evaluations: evaluator.evaluations(),
            cache_hits: evaluator.cache_hits(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    initial: GenerationRecord,
    per_generation: Vec<GenerationRecord>,
}

impl RunTrace {
    pub(crate) fn new(initial: GenerationRecord) -> Self {
        Self {
            initial,
            per_generation: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, record: GenerationRecord) {
        self.per_generation.push(record);
    }

    pub fn initial(&self) -> &GenerationRecord {
        &self.initial
    }

    /// One record per evolved generation, `1..=max_generations`.
    pub fn per_generation(&self) -> &[GenerationRecord] {
        &self.per_generation
    }

    pub fn last(&self) -> &GenerationRecord {
        self.per_generation.last().unwrap_or(&self.initial)
    }

    pub fn final_fitness(&self) -> f64 {
        self.last().best_fitness
    }

    pub fn evaluations(&self) -> u64 {
        self.last().evaluations
    }

    pub fn cache_hits(&self) -> u64 {
        self.last().cache_hits
    }

    /// Generations needed before the best fitness is within `rel_tol` of the
    /// run's final value; 0 if the initial population already was.
    pub fn generations_to_reach(&self, rel_tol: f64) -> usize {
        let target = self.final_fitness() - rel_tol * self.final_fitness().abs();
        std::iter::once(&self.initial)
            .chain(&self.per_generation)
            .find(|r| r.best_fitness >= target)
            .map_or(self.per_generation.len(), |r| r.generation)
    }

    /// `generation,best_fitness,mean_fitness,best_subset`, one row per evolved
    /// generation, six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,best_subset\n");
        for r in &self.per_generation {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{}",
                r.generation, r.best_fitness, r.mean_fitness, r.best_subset
            );
        }
        out
    }
}
