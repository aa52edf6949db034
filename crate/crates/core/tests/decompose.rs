mod common;

use common::random_3sat;
use ising_sat::circuit::{semiprime_catalog, semiprime_instance, EncodingOption};
use ising_sat::cnf::{evaluate, Cnf};
use ising_sat::decompose::{
    build_vig, freeze_and_extract, iterate, select, spin_cost, update_global, FilterState,
    GlobalState, IterateConfig, Strategy,
};
use ising_sat::preprocess::run_ladder;
use ising_sat::solver::Backend;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn falsified(cnf: &Cnf, values: &[bool]) -> usize {
    cnf.num_clauses() - cnf.count_satisfied(values)
}

fn min_qubo_energy(q: &ising_sat::qubo::QuboModel, source: &[bool]) -> f64 {
    let extra = q.num_vars - source.len();
    (0..1u32 << extra)
        .map(|m| {
            let mut x = source.to_vec();
            x.extend((0..extra).map(|i| m >> i & 1 == 1));
            q.energy(&x)
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selections_fit_the_budget(
        n in 10u32..80, ratio in 2.0f64..5.0, budget in 3usize..=45,
        seed in any::<u64>(), strategy in prop_oneof![Just(Strategy::Bfs), Just(Strategy::Dfs)]
    ) {
        let cnf = random_3sat(n, (ratio * n as f64) as usize, seed);
        let vig = build_vig(&cnf);
        let global = GlobalState::random(&cnf, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = rng.gen_range(1..=n);
        let filter = FilterState::new(n, 5);
        let sel = select(&vig, &cnf, budget, start, &filter, strategy, &mut rng);
        prop_assert!(!sel.is_empty());
        prop_assert!(sel.windows(2).all(|w| w[0] < w[1]));
        let cost = spin_cost(&cnf, &sel);
        prop_assert!(cost <= budget);
        let sub = freeze_and_extract(&cnf, &sel, &global).unwrap();
        prop_assert_eq!(sub.spin_cost, cost);
        prop_assert_eq!(sub.qubo.num_vars, cost);
    }

    #[test]
    fn frozen_energy_counts_falsified_clauses_of_the_whole_formula(
        n in 6u32..30, ratio in 2.0f64..5.0, budget in 3usize..=12, seed in any::<u64>()
    ) {
        let cnf = random_3sat(n, (ratio * n as f64) as usize, seed);
        let vig = build_vig(&cnf);
        let global = GlobalState::random(&cnf, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let start = rng.gen_range(1..=n);
        let sel = select(&vig, &cnf, budget, start, &FilterState::new(n, 5), Strategy::Dfs, &mut rng);
        let sub = freeze_and_extract(&cnf, &sel, &global).unwrap();
        prop_assert_eq!(
            sub.satisfied_by_frozen + sub.falsified_by_frozen + sub.sub_cnf.num_clauses(),
            cnf.num_clauses()
        );
        let k = sel.len();
        for m in 0..1u32 << k {
            let x: Vec<bool> = (0..k).map(|i| m >> i & 1 == 1).collect();
            let merged = sub.merge(&global.values, &x);
            prop_assert_eq!(min_qubo_energy(&sub.qubo, &x), falsified(&cnf, &merged) as f64);
        }
    }

    #[test]
    fn global_best_never_decreases(n in 6u32..40, seed in any::<u64>(), rounds in 1usize..30) {
        let cnf = random_3sat(n, 4 * n as usize, seed);
        let vig = build_vig(&cnf);
        let mut global = GlobalState::random(&cnf, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut best = global.best_satisfied;
        for _ in 0..rounds {
            let start = rng.gen_range(1..=n);
            let sel = select(&vig, &cnf, 10, start, &FilterState::new(n, 5), Strategy::Bfs, &mut rng);
            let sub = freeze_and_extract(&cnf, &sel, &global).unwrap();
            let x: Vec<bool> = (0..sel.len()).map(|_| rng.gen()).collect();
            let accepted = update_global(&cnf, &mut global, &sub, &x);
            let count = cnf.count_satisfied(&sub.merge(&global.values, &x));
            prop_assert!(global.best_satisfied >= best);
            prop_assert_eq!(cnf.count_satisfied(&global.values), global.best_satisfied);
            if accepted {
                prop_assert_eq!(count, global.best_satisfied);
            }
            best = global.best_satisfied;
        }
    }

    #[test]
    fn filter_cools_after_a_full_window(window in 1usize..8, n in 2u32..20) {
        let mut filter = FilterState::new(n, window);
        let all: Vec<u32> = (1..=n).collect();
        for k in 0..window {
            prop_assert!(!filter.is_cooling(1));
            prop_assert_eq!(filter.streak(1), k);
            filter.update(&all);
        }
        for _ in 0..window {
            prop_assert!(filter.is_cooling(1));
            prop_assert_eq!(filter.streak(1), 0);
            filter.update(&[]);
        }
        prop_assert!(!filter.is_cooling(1));
    }
}

#[test]
fn a_fully_reduced_instance_needs_no_solver_calls() {
    let entry = semiprime_catalog(4).unwrap()[0];
    let cnf = semiprime_instance(&entry, EncodingOption::Option1);
    let ladder = run_ladder(&cnf, 7, 0);
    let out = iterate(&ladder, &cnf, &IterateConfig::default()).unwrap();
    assert!(out.solved && out.verified);
    assert_eq!(out.solver_calls, 0);
    let a = out.assignment.unwrap();
    assert!(evaluate(&cnf, &a).unwrap().all_satisfied);
}

#[test]
fn unsat_ladder_result_closes_the_branch() {
    let cnf = Cnf::from_dimacs_clauses(2, &[&[1, 2], &[-1], &[-2]]).unwrap();
    let ladder = run_ladder(&cnf, 2, 0);
    assert!(ladder.is_unsat());
    let out = iterate(&ladder, &cnf, &IterateConfig::default()).unwrap();
    assert!(out.closed_branch);
    assert!(!out.solved);
    assert_eq!(out.iterations, 0);
}

#[test]
fn unreduced_semiprime_is_solved_and_verified() {
    // level 0 leaves the whole circuit, well over one subproblem
    let entry = semiprime_catalog(5).unwrap()[0];
    let cnf = semiprime_instance(&entry, EncodingOption::Option1);
    let ladder = run_ladder(&cnf, 0, 0);
    for strategy in [Strategy::Bfs, Strategy::Dfs] {
        for backend in [Backend::Emulator, Backend::Tabu] {
            let cfg = IterateConfig {
                strategy,
                backend,
                record_history: true,
                ..IterateConfig::default()
            };
            let out = iterate(&ladder, &cnf, &cfg).unwrap();
            assert!(out.solved, "{strategy} {backend}");
            assert!(out.verified);
            assert_eq!(out.history.len(), out.iterations);
            assert!(out.history.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn iterate_is_deterministic() {
    let entry = semiprime_catalog(7).unwrap()[1];
    let cnf = semiprime_instance(&entry, EncodingOption::Option1);
    let ladder = run_ladder(&cnf, 6, 3);
    let cfg = IterateConfig {
        seed: 11,
        cap: 200,
        record_history: true,
        ..IterateConfig::default()
    };
    let a = iterate(&ladder, &cnf, &cfg).unwrap();
    let b = iterate(&ladder, &cnf, &cfg).unwrap();
    assert_eq!(a, b);
}
