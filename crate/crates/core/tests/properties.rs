//! Property tests for the capacity kernel, channel model, GA and oracle.

use antsel_core::capacity::{ergodic_capacity, subcarrier_capacity, AntennaSubset, Snr};
use antsel_core::channel::{frequency_response, generate_batch, CMatrix, ChannelConfig, TapSet};
use antsel_core::ga::{run_on_batch, GaConfig, MutationStrategy};
use antsel_core::oracle::{binomial, exhaustive_search, exhaustive_search_with, OracleOptions};
use itertools::Itertools;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols)
        .prop_map(move |v| CMatrix::from_iterator(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
}

fn sized_matrix() -> impl Strategy<Value = CMatrix> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(r, c)| complex_matrix(r, c))
}

fn small_channel() -> impl Strategy<Value = ChannelConfig> {
    (2usize..=6, 1usize..=4, 1usize..=3, any::<u64>()).prop_map(|(n_tx, n_rx, n_taps, seed)| ChannelConfig {
        n_tx,
        n_rx,
        n_subcarriers: 4,
        n_taps,
        seed,
    })
}

fn subset_of(n_tx: usize, pick: &[bool]) -> AntennaSubset {
    let mut mask: Vec<bool> = pick.iter().copied().take(n_tx).collect();
    mask.resize(n_tx, false);
    if !mask.contains(&true) {
        mask[0] = true;
    }
    AntennaSubset::from_mask(mask).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn capacity_is_nonnegative(h in sized_matrix(), db in -30.0f64..40.0) {
        let c = subcarrier_capacity(&h, Snr::from_db(db).unwrap(), h.ncols()).unwrap();
        prop_assert!(c >= 0.0);
    }

    #[test]
    fn log_det_matches_eigenvalues(h in sized_matrix(), rho in 0.1f64..100.0) {
        let n_t = h.ncols();
        let got = subcarrier_capacity(&h, Snr::from_linear(rho).unwrap(), n_t).unwrap();
        let eig = SymmetricEigen::new(h.adjoint() * &h);
        let want: f64 = eig.eigenvalues.iter().map(|&l| (1.0 + rho / n_t as f64 * l.max(0.0)).log2()).sum();
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1e-300), "{got} vs {want}");
    }

    #[test]
    fn column_order_does_not_matter(h in (1usize..=6, 2usize..=6).prop_flat_map(|(r, c)| complex_matrix(r, c)), seed in any::<u64>()) {
        let n = h.ncols();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left((seed as usize) % n);
        if seed & 1 == 1 {
            order.reverse();
        }
        let permuted = h.select_columns(&order);
        let snr = Snr::from_db(10.0).unwrap();
        let a = subcarrier_capacity(&h, snr, n).unwrap();
        let b = subcarrier_capacity(&permuted, snr, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn position_order_does_not_change_capacity(cfg in small_channel(), pick in proptest::collection::vec(any::<bool>(), 6)) {
        let batch = generate_batch(&cfg, 2, cfg.seed).unwrap();
        let subset = subset_of(cfg.n_tx, &pick);
        let mut reversed = subset.positions().to_vec();
        reversed.reverse();
        let again = AntennaSubset::from_positions(cfg.n_tx, &reversed).unwrap();
        let snr = Snr::from_db(5.0).unwrap();
        prop_assert_eq!(
            ergodic_capacity(&batch, &subset, snr).unwrap().bits_per_s_per_hz,
            ergodic_capacity(&batch, &again, snr).unwrap().bits_per_s_per_hz
        );
    }

    #[test]
    fn capacity_increases_with_snr(cfg in small_channel(), pick in proptest::collection::vec(any::<bool>(), 6)) {
        let batch = generate_batch(&cfg, 3, cfg.seed).unwrap();
        let subset = subset_of(cfg.n_tx, &pick);
        let caps: Vec<f64> = [-10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0]
            .iter()
            .map(|&db| ergodic_capacity(&batch, &subset, Snr::from_db(db).unwrap()).unwrap().bits_per_s_per_hz)
            .collect();
        prop_assert!(caps.windows(2).all(|w| w[1] > w[0]), "{caps:?}");
    }

    #[test]
    fn dft_matches_direct_sum_and_preserves_energy(
        (taps, n_s) in (1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(r, c, l)| (proptest::collection::vec(complex_matrix(r, c), l), l..=16))
    ) {
        let real = frequency_response(TapSet::new(taps.clone()).unwrap(), n_s).unwrap();
        for (i, ci) in real.freq_response().iter().enumerate() {
            let mut direct = CMatrix::zeros(ci.nrows(), ci.ncols());
            for (j, tap) in taps.iter().enumerate() {
                let angle = -2.0 * std::f64::consts::PI * (i * j) as f64 / n_s as f64;
                direct += tap * Complex64::from_polar(1.0, angle);
            }
            prop_assert!((ci - direct).iter().all(|d| d.norm() <= 1e-12));
        }
        let tap_energy: f64 = taps.iter().map(|t| t.norm_squared()).sum();
        let freq_energy = real.freq_response().iter().map(|c| c.norm_squared()).sum::<f64>() / n_s as f64;
        prop_assert!((freq_energy - tap_energy).abs() <= 1e-9 * tap_energy.max(1e-300));
    }

    #[test]
    fn ga_respects_cardinality_monotonicity_and_budget(
        cfg in small_channel(),
        n_t_seed in any::<usize>(),
        half_pop in 1usize..=4,
        gens in 0usize..=6,
        plain in any::<bool>(),
        rate in 0.0f64..=1.0,
    ) {
        let n_t = 1 + n_t_seed % cfg.n_tx;
        let batch = generate_batch(&cfg, 2, cfg.seed).unwrap();
        let ga = GaConfig {
            population_size: 2 * half_pop,
            subset_size: n_t,
            crossover_rate: rate,
            max_generations: gens,
            mutation_strategy: if plain { MutationStrategy::Plain } else { MutationStrategy::Adaptive },
            seed: cfg.seed,
            fitness_batch_size: 2,
            ..GaConfig::default()
        };
        let snr = Snr::from_db(10.0).unwrap();
        let out = run_on_batch(&batch, &ga, snr).unwrap();
        prop_assert_eq!(out.best.subset.len(), n_t);
        prop_assert_eq!(out.trace.per_generation().len(), gens);
        let mut last = out.trace.initial().best_fitness;
        for g in out.trace.per_generation() {
            prop_assert!(g.best_fitness >= last);
            prop_assert!(g.mean_fitness <= g.best_fitness * (1.0 + 1e-12));
            prop_assert_eq!(g.best_subset.len(), n_t);
            last = g.best_fitness;
        }
        prop_assert_eq!(out.trace.evaluations(), ga.expected_evaluations(cfg.n_tx));

        let oracle = exhaustive_search(&batch, n_t, snr).unwrap();
        prop_assert!(oracle.best_capacity >= out.best.fitness.unwrap());
    }

    #[test]
    fn ranked_oracle_is_complete(cfg in small_channel(), n_t_seed in any::<usize>()) {
        let n_t = 1 + n_t_seed % cfg.n_tx;
        let batch = generate_batch(&cfg, 1, cfg.seed).unwrap();
        let opts = OracleOptions { ranked: true, ..OracleOptions::default() };
        let res = exhaustive_search_with(&batch, n_t, Snr::from_db(0.0).unwrap(), opts).unwrap();
        let ranked = res.ranked.unwrap();
        prop_assert_eq!(ranked.len() as u128, binomial(cfg.n_tx, n_t));
        prop_assert!(ranked.iter().map(|r| r.subset.positions().to_vec()).all_unique());
        prop_assert!(ranked.windows(2).all(|w| w[0].capacity >= w[1].capacity));
        prop_assert_eq!(ranked[0].capacity, res.best_capacity);
    }
}

#[test]
fn full_array_dominates_every_proper_subset_on_average() {
    let cfg = ChannelConfig {
        n_tx: 5,
        n_rx: 4,
        n_subcarriers: 4,
        n_taps: 2,
        seed: 0,
    };
    let batch = generate_batch(&cfg, 500, 0x00d0_0500).unwrap();
    for db in [5.0, 15.0, 25.0] {
        let snr = Snr::from_db(db).unwrap();
        let full = ergodic_capacity(&batch, &AntennaSubset::full(5).unwrap(), snr).unwrap().bits_per_s_per_hz;
        for n_t in 1..5 {
            for positions in (0..5).combinations(n_t) {
                let subset = AntennaSubset::from_positions(5, &positions).unwrap();
                let c = ergodic_capacity(&batch, &subset, snr).unwrap().bits_per_s_per_hz;
                assert!(full >= c, "{db} dB: full {full} < {positions:?} {c}");
            }
        }
    }
}

#[test]
fn adaptive_is_not_worse_than_plain_on_average() {
    let cfg = ChannelConfig {
        n_tx: 10,
        n_rx: 10,
        n_subcarriers: 16,
        n_taps: 3,
        seed: 0,
    };
    let batch = generate_batch(&cfg, 50, 0x00ad_0050).unwrap();
    let snr = Snr::from_db(15.0).unwrap();
    let mean_final = |strategy| {
        (0..50u64)
            .map(|seed| {
                let ga = GaConfig {
                    subset_size: 8,
                    mutation_strategy: strategy,
                    seed,
                    fitness_batch_size: 50,
                    ..GaConfig::default()
                };
                run_on_batch(&batch, &ga, snr).unwrap().trace.final_fitness()
            })
            .sum::<f64>()
            / 50.0
    };
    let adaptive = mean_final(MutationStrategy::Adaptive);
    let plain = mean_final(MutationStrategy::Plain);
    assert!(adaptive >= plain, "adaptive {adaptive} < plain {plain}");
}
