//! GA operators. Each one is usable on its own; `run` only sequences them.

use rand::seq::index;
use rand::Rng;

use super::{Chromosome, FitnessEvaluator, GaConfig, PartnerMode};
use crate::capacity::AntennaSubset;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// `population_size` chromosomes, each with `subset_size` distinct antennas
/// drawn uniformly without replacement.
pub fn init_population(config: &GaConfig, n_tx: usize, rng: &mut SimRng) -> Result<Vec<Chromosome>> {
    let n_t = config.subset_size;
    if n_t == 0 || n_t > n_tx {
        return Err(Error::config(format!("subset_size {n_t} is not in 1..={n_tx}")));
    }
    (0..config.population_size)
        .map(|_| {
            let picked = index::sample(rng, n_tx, n_t).into_vec();
            AntennaSubset::from_positions(n_tx, &picked).map(Chromosome::new)
        })
        .collect()
}

/// Exchanges the genes at positions `cut..` between two masks. `cut` is the
/// number of leading genes each child keeps from its own parent.
pub fn crossover_masks(a: &[bool], b: &[bool], cut: usize) -> (Vec<bool>, Vec<bool>) {
    let mut first = a.to_vec();
    let mut second = b.to_vec();
    first[cut..].copy_from_slice(&b[cut..]);
    second[cut..].copy_from_slice(&a[cut..]);
    (first, second)
}

/// Both children of one crossover, after repair. `cut_point` is `None` when
/// the pair was copied instead of crossed.
#[derive(Debug, Clone, PartialEq)]
pub struct Offspring {
    pub first: Chromosome,
    pub second: Chromosome,
    pub cut_point: Option<usize>,
}

/// Single-point crossover: with probability `crossover_rate` a cut in
/// `1..n_tx` is drawn and the tails are exchanged, then both children are
/// repaired back to `subset_size` antennas.
pub fn crossover(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    config: &GaConfig,
    rng: &mut SimRng,
) -> Result<Offspring> {
    let n_tx = parent_a.subset.n_tx();
    if parent_b.subset.n_tx() != n_tx {
        return Err(Error::dimension(format!(
            "parents over {n_tx} and {} antennas",
            parent_b.subset.n_tx()
        )));
    }
    let crossed = rng.random_bool(config.crossover_rate);
    let cut_point = (crossed && n_tx >= 2).then(|| rng.random_range(1..n_tx));
    let (a, b) = match cut_point {
        Some(cut) => crossover_masks(parent_a.subset.mask(), parent_b.subset.mask(), cut),
        None => (parent_a.subset.mask().to_vec(), parent_b.subset.mask().to_vec()),
    };
    Ok(Offspring {
        first: Chromosome::new(repair_cardinality(&a, config.subset_size, rng)?),
        second: Chromosome::new(repair_cardinality(&b, config.subset_size, rng)?),
        cut_point,
    })
}

/// Restores exactly `n_t` ones: surplus ones are cleared, or missing ones
/// set, at uniformly random positions.
pub fn repair_cardinality(mask: &[bool], n_t: usize, rng: &mut SimRng) -> Result<AntennaSubset> {
    let n_tx = mask.len();
    if n_t == 0 || n_t > n_tx {
        return Err(Error::config(format!("cannot repair to {n_t} of {n_tx} antennas")));
    }
    let (ones, zeros): (Vec<usize>, Vec<usize>) = (0..n_tx).partition(|&i| mask[i]);
    let mut repaired = mask.to_vec();
    if ones.len() > n_t {
        for k in index::sample(rng, ones.len(), ones.len() - n_t) {
            repaired[ones[k]] = false;
        }
    } else if ones.len() < n_t {
        for k in index::sample(rng, zeros.len(), n_t - ones.len()) {
            repaired[zeros[k]] = true;
        }
    }
    AntennaSubset::from_mask(repaired)
}

/// Positions of a chromosome's ones: where a mutation move may start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationPointSet {
    points: Vec<usize>,
}

impl MutationPointSet {
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }
}

pub fn feasible_points(chromosome: &Chromosome) -> MutationPointSet {
    MutationPointSet {
        points: chromosome.subset.positions().to_vec(),
    }
}

/// One uniformly random selected antenna is swapped for one uniformly random
/// unselected antenna. Identity when every antenna is selected.
pub fn plain_mutation(chromosome: &Chromosome, rng: &mut SimRng) -> Chromosome {
    let zeros = chromosome.subset.unselected();
    if zeros.is_empty() {
        return chromosome.clone();
    }
    let ones = chromosome.subset.positions();
    let off = ones[rng.random_range(0..ones.len())];
    let on = zeros[rng.random_range(0..zeros.len())];
    let subset = chromosome
        .subset
        .swapped(off, on)
        .expect("swap of a selected and an unselected antenna");
    Chromosome::new(subset)
}

/// Scores one candidate move per feasible point and returns the best-scoring
/// candidate, or the input when it beats every candidate.
///
/// At each feasible point the selected antenna is swapped out for a partner:
/// a random unselected antenna in [`PartnerMode::RandomZero`], or the best of
/// all unselected antennas in [`PartnerMode::BestSwap`]. Ties go to the lowest
/// point, then the lowest partner. The input must already carry its fitness.
pub fn adaptive_mutation(
    chromosome: &Chromosome,
    evaluator: &mut FitnessEvaluator<'_>,
    mode: PartnerMode,
    rng: &mut SimRng,
) -> Result<Chromosome> {
    let original = chromosome.scored()?;
    let zeros = chromosome.subset.unselected();
    if zeros.is_empty() {
        return Ok(chromosome.clone());
    }
    let mut best: Option<(f64, AntennaSubset)> = None;
    let mut consider = |off: usize, on: usize, evaluator: &mut FitnessEvaluator<'_>| -> Result<()> {
        let candidate = chromosome.subset.swapped(off, on)?;
        let fitness = evaluator.fitness(&candidate)?;
        if best.as_ref().is_none_or(|(f, _)| fitness > *f) {
            best = Some((fitness, candidate));
        }
        Ok(())
    };
    for &point in feasible_points(chromosome).points() {
        match mode {
            PartnerMode::BestSwap => {
                for &on in &zeros {
                    consider(point, on, evaluator)?;
                }
            }
            PartnerMode::RandomZero => {
                let on = zeros[rng.random_range(0..zeros.len())];
                consider(point, on, evaluator)?;
            }
        }
    }
    let (fitness, subset) = best.expect("at least one feasible point");
    if original > fitness {
        return Ok(chromosome.clone());
    }
    Ok(Chromosome {
        subset,
        fitness: Some(fitness),
    })
}

/// Best `population_size` of parents followed by children, by descending
/// fitness. The sort is stable, so ties keep parents ahead of children and
/// lower indices ahead of higher ones.
pub fn select_next_generation(
    parents: Vec<Chromosome>,
    children: Vec<Chromosome>,
    population_size: usize,
) -> Result<Vec<Chromosome>> {
    let mut pool: Vec<(f64, Chromosome)> = parents
        .into_iter()
        .chain(children)
        .map(|c| c.scored().map(|f| (f, c)))
        .collect::<Result<_>>()?;
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    pool.truncate(population_size);
    Ok(pool.into_iter().map(|(_, c)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{ergodic_capacity, Snr};
    use crate::channel::{
        frequency_response, generate_batch, CMatrix, ChannelConfig, RealizationBatch, TapSet,
    };
    use num_complex::Complex64;

    fn mask(bits: &str) -> Vec<bool> {
        bits.chars().map(|c| c == '1').collect()
    }

    fn chrom(bits: &str) -> Chromosome {
        Chromosome::new(AntennaSubset::from_mask(mask(bits)).unwrap())
    }

    fn scored(bits: &str, f: f64) -> Chromosome {
        Chromosome {
            fitness: Some(f),
            ..chrom(bits)
        }
    }

    fn bits(s: &AntennaSubset) -> String {
        s.mask().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    fn cfg(n_t: usize) -> GaConfig {
        GaConfig {
            subset_size: n_t,
            ..GaConfig::default()
        }
    }

    #[test]
    fn init_full_subset() {
        let pop = init_population(&cfg(10), 10, &mut SimRng::new(1)).unwrap();
        assert!(pop.iter().all(|c| c.subset.len() == 10));
    }

    #[test]
    fn init_cardinality() {
        let pop = init_population(&cfg(2), 10, &mut SimRng::new(1)).unwrap();
        assert_eq!(pop.len(), 20);
        assert!(pop.iter().all(|c| c.subset.len() == 2 && c.fitness.is_none()));
        assert!(matches!(init_population(&cfg(11), 10, &mut SimRng::new(1)), Err(Error::Config(_))));
    }

    #[test]
    fn init_is_uniform() {
        let mut rng = SimRng::new(2);
        let c = GaConfig {
            subset_size: 3,
            population_size: 2,
            ..GaConfig::default()
        };
        let mut counts = [0usize; 6];
        let mut total = 0usize;
        for _ in 0..5_000 {
            for ch in init_population(&c, 6, &mut rng).unwrap() {
                for &p in ch.subset.positions() {
                    counts[p] += 1;
                }
                total += 1;
            }
        }
        for n in counts {
            let freq = n as f64 / total as f64;
            assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn tail_swap() {
        let (a, b) = crossover_masks(&mask("1100"), &mask("0011"), 1);
        assert_eq!((a, b), (mask("1011"), mask("0100")));
        let mut rng = SimRng::new(3);
        let ra = repair_cardinality(&mask("1011"), 2, &mut rng).unwrap();
        let rb = repair_cardinality(&mask("0100"), 2, &mut rng).unwrap();
        assert_eq!(ra.len(), 2);
        assert!(ra.positions().iter().all(|p| [0, 2, 3].contains(p)));
        assert_eq!(rb.len(), 2);
        assert!(rb.contains(1));
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let p = chrom("0110100");
        let c = GaConfig {
            crossover_rate: 1.0,
            ..cfg(3)
        };
        let mut rng = SimRng::new(4);
        for _ in 0..50 {
            let off = crossover(&p, &p, &c, &mut rng).unwrap();
            assert!(off.cut_point.is_some());
            assert_eq!(off.first.subset, p.subset);
            assert_eq!(off.second.subset, p.subset);
        }
    }

    #[test]
    fn crossover_rate_is_respected() {
        let (a, b) = (chrom("1100"), chrom("0011"));
        let c = cfg(2);
        let mut rng = SimRng::new(5);
        let crossed = (0..10_000)
            .filter(|_| crossover(&a, &b, &c, &mut rng).unwrap().cut_point.is_some())
            .count();
        let frac = crossed as f64 / 10_000.0;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn crossover_rejects_mismatch() {
        let r = crossover(&chrom("110"), &chrom("1100"), &cfg(2), &mut SimRng::new(0));
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn repair_cases() {
        let mut rng = SimRng::new(6);
        assert_eq!(bits(&repair_cardinality(&mask("0110"), 2, &mut rng).unwrap()), "0110");
        let r = repair_cardinality(&mask("1111"), 2, &mut rng).unwrap();
        assert_eq!(r.len(), 2);
        let r = repair_cardinality(&mask("0000"), 3, &mut rng).unwrap();
        assert_eq!(r.len(), 3);
        assert!(matches!(repair_cardinality(&mask("11"), 3, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn repair_removes_uniformly() {
        let mut rng = SimRng::new(7);
        let mut survive = [0usize; 3];
        for _ in 0..10_000 {
            let r = repair_cardinality(&mask("1110"), 2, &mut rng).unwrap();
            assert!(!r.contains(3));
            for (i, s) in survive.iter_mut().enumerate() {
                *s += r.contains(i) as usize;
            }
        }
        for s in survive {
            let freq = s as f64 / 10_000.0;
            assert!((freq - 2.0 / 3.0).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn feasible_point_reads() {
        assert_eq!(feasible_points(&chrom("0101")).points(), &[1, 3]);
        assert_eq!(feasible_points(&chrom("1111")).points(), &[0, 1, 2, 3]);
        let c = chrom("0011010");
        assert_eq!(feasible_points(&c).count(), c.subset.len());
    }

    #[test]
    fn plain_mutation_cases() {
        let mut rng = SimRng::new(8);
        assert_eq!(plain_mutation(&chrom("111"), &mut rng).subset, chrom("111").subset);
        for _ in 0..20 {
            assert_eq!(bits(&plain_mutation(&chrom("10"), &mut rng).subset), "01");
        }
    }

    #[test]
    fn plain_mutation_is_uniform() {
        let mut rng = SimRng::new(9);
        let parent = chrom("1100");
        let outcomes = ["1010", "1001", "0110", "0101"];
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let b = bits(&plain_mutation(&parent, &mut rng).subset);
            let k = outcomes.iter().position(|o| *o == b).expect("legal swap");
            counts[k] += 1;
        }
        for n in counts {
            let freq = n as f64 / 10_000.0;
            assert!((freq - 0.25).abs() < 0.02, "freq {freq}");
        }
    }

    fn config(n_tx: usize, n_rx: usize, n_subcarriers: usize, n_taps: usize) -> ChannelConfig {
        ChannelConfig {
            n_tx,
            n_rx,
            n_subcarriers,
            n_taps,
            seed: 0,
        }
    }

    /// Diagonal single-tap channels where column 2 carries the most energy.
    fn dominant_column_batch() -> RealizationBatch {
        let c = config(4, 4, 2, 1);
        let gains = [[1.0, 0.5, 3.0, 0.2], [0.3, 1.2, 2.0, 1.1], [0.9, 0.1, 1.5, 0.4]];
        let realizations = gains
            .iter()
            .map(|g| {
                let tap = CMatrix::from_fn(4, 4, |r, t| {
                    Complex64::new(if r == t { g[t] } else { 0.0 }, 0.0)
                });
                frequency_response(TapSet::new(vec![tap]).unwrap(), 2).unwrap()
            })
            .collect();
        RealizationBatch::from_realizations(c, 0, realizations).unwrap()
    }

    #[test]
    fn adaptive_full_subset_is_identity() {
        let batch = generate_batch(&config(3, 3, 2, 1), 3, 1).unwrap();
        let mut ev = FitnessEvaluator::new(&batch, Snr::from_db(10.0).unwrap());
        let mut c = chrom("111");
        ev.evaluate(&mut c).unwrap();
        let out = adaptive_mutation(&c, &mut ev, PartnerMode::BestSwap, &mut SimRng::new(0)).unwrap();
        assert_eq!(out, c);
        assert_eq!(ev.evaluations(), 1);
    }

    #[test]
    fn adaptive_requires_fitness() {
        let batch = generate_batch(&config(3, 3, 2, 1), 1, 1).unwrap();
        let mut ev = FitnessEvaluator::new(&batch, Snr::from_db(10.0).unwrap());
        let r = adaptive_mutation(&chrom("100"), &mut ev, PartnerMode::BestSwap, &mut SimRng::new(0));
        assert!(matches!(r, Err(Error::Internal(_))));
    }

    #[test]
    fn adaptive_finds_dominant_antenna() {
        let batch = dominant_column_batch();
        let snr = Snr::from_db(10.0).unwrap();
        // exhaustive check that antenna 2 is the unique best single antenna
        let caps: Vec<f64> = (0..4)
            .map(|a| {
                let s = AntennaSubset::from_positions(4, &[a]).unwrap();
                ergodic_capacity(&batch, &s, snr).unwrap().bits_per_s_per_hz
            })
            .collect();
        assert!(caps.iter().enumerate().all(|(a, &c)| a == 2 || c < caps[2]));

        for start in ["1000", "0100", "0010", "0001"] {
            let mut ev = FitnessEvaluator::new(&batch, snr);
            let mut c = chrom(start);
            ev.evaluate(&mut c).unwrap();
            let out = adaptive_mutation(&c, &mut ev, PartnerMode::BestSwap, &mut SimRng::new(0)).unwrap();
            assert_eq!(bits(&out.subset), "0010");
        }
    }

    #[test]
    fn adaptive_best_swap_is_neighborhood_max() {
        let batch = generate_batch(&config(6, 4, 8, 3), 20, 11).unwrap();
        let snr = Snr::from_db(15.0).unwrap();
        let mut rng = SimRng::new(12);
        for _ in 0..10 {
            let mut ev = FitnessEvaluator::new(&batch, snr);
            let mut c = init_population(&GaConfig { population_size: 2, ..cfg(2) }, 6, &mut rng)
                .unwrap()
                .remove(0);
            let own = ev.evaluate(&mut c).unwrap();
            let out = adaptive_mutation(&c, &mut ev, PartnerMode::BestSwap, &mut rng).unwrap();
            // brute force over all 2 × 4 single swaps
            let mut neighbors = Vec::new();
            for &off in c.subset.positions() {
                for on in c.subset.unselected() {
                    let s = c.subset.swapped(off, on).unwrap();
                    neighbors.push(ergodic_capacity(&batch, &s, snr).unwrap().bits_per_s_per_hz);
                }
            }
            assert_eq!(neighbors.len(), 8);
            let best = neighbors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(out.fitness, Some(best.max(own)));
            assert_eq!(ev.evaluations(), 1 + 8);
        }
    }

    #[test]
    fn adaptive_random_zero_keeps_cardinality() {
        let batch = generate_batch(&config(6, 4, 4, 2), 5, 2).unwrap();
        let mut ev = FitnessEvaluator::new(&batch, Snr::from_db(5.0).unwrap());
        let mut rng = SimRng::new(13);
        let mut c = chrom("110100");
        ev.evaluate(&mut c).unwrap();
        let out = adaptive_mutation(&c, &mut ev, PartnerMode::RandomZero, &mut rng).unwrap();
        assert_eq!(out.subset.len(), 3);
        assert!(out.fitness.unwrap() >= c.fitness.unwrap());
        assert_eq!(ev.evaluations(), 1 + 3);
    }

    #[test]
    fn keep_original_when_every_candidate_is_worse() {
        let batch = dominant_column_batch();
        let mut ev = FitnessEvaluator::new(&batch, Snr::from_db(10.0).unwrap());
        let mut c = chrom("0010");
        ev.evaluate(&mut c).unwrap();
        let out = adaptive_mutation(&c, &mut ev, PartnerMode::RandomZero, &mut SimRng::new(3)).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn selection_cases() {
        let parents = vec![scored("1100", 4.0), scored("0110", 3.0)];
        let worse = vec![scored("0011", 1.0), scored("1001", 2.0)];
        let better = vec![scored("0011", 5.0), scored("1001", 6.0)];
        let next = select_next_generation(parents.clone(), worse, 2).unwrap();
        assert_eq!(next, parents);
        let next = select_next_generation(parents.clone(), better.clone(), 2).unwrap();
        assert_eq!(next, vec![better[1].clone(), better[0].clone()]);

        let next = select_next_generation(
            vec![scored("1100", 5.0), scored("0110", 3.0)],
            vec![scored("0011", 9.0), scored("1001", 1.0)],
            2,
        )
        .unwrap();
        let f: Vec<f64> = next.iter().map(|c| c.fitness.unwrap()).collect();
        assert_eq!(f, vec![9.0, 5.0]);
    }

    #[test]
    fn selection_ties_prefer_parents() {
        let next = select_next_generation(
            vec![scored("1100", 2.0), scored("0110", 1.0)],
            vec![scored("0011", 2.0), scored("1001", 2.0)],
            2,
        )
        .unwrap();
        assert_eq!(bits(&next[0].subset), "1100");
        assert_eq!(bits(&next[1].subset), "0011");
    }

    #[test]
    fn selection_rejects_unscored() {
        let r = select_next_generation(vec![chrom("10")], vec![], 1);
        assert!(matches!(r, Err(Error::Internal(_))));
    }
}
