#![allow(dead_code)]

use std::collections::BTreeSet;

use ising_sat::cnf::{brute_force_solutions, Assignment, Clause, Cnf, Literal};
use ising_sat::preprocess::{compact, expand, run_ladder_with, LadderConfig, LadderResult};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random 3SAT over distinct variables.
pub fn random_3sat(n: u32, m: usize, seed: u64) -> Cnf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            sample(&mut rng, n as usize, 3)
                .into_iter()
                .map(|i| Literal::new(i as u32 + 1, rng.gen_bool(0.5)))
                .collect::<Clause>()
        })
        .collect();
    Cnf::new(n, clauses).unwrap()
}

/// Models of a reduced formula, lifted back to the original variables.
/// Returns `None` if two reduced models map to the same original model.
pub fn lifted_models(original: &Cnf, ladder: &LadderResult) -> Option<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    if ladder.is_unsat() {
        return Some(out);
    }
    let free = ladder.free_vars();
    let small = compact(&ladder.cnf, &free);
    for a in brute_force_solutions(&small, 64).unwrap().assignments() {
        let reduced = expand(&a, &free, original.num_vars());
        let full = ladder.reconstruct(&reduced).unwrap();
        if !out.insert(full.to_mask().expect("reconstruction is complete")) {
            return None;
        }
    }
    Some(out)
}

/// Lifted models of the ladder at `level`; at the branching level the
/// models of both guess values are merged. `None` on a non-injective lift
/// or when the two branches overlap.
pub fn ladder_models(cnf: &Cnf, level: u8, pure_literal: bool) -> Option<BTreeSet<u64>> {
    let run = |guess: Option<bool>| {
        run_ladder_with(
            cnf,
            &LadderConfig {
                level,
                seed: 0,
                forced_guess: guess,
                pure_literal,
                ..LadderConfig::default()
            },
        )
    };
    let first = run(Some(true));
    let mut models = lifted_models(cnf, &first)?;
    if !first.branch.guesses.is_empty() {
        let other = lifted_models(cnf, &run(Some(false)))?;
        let before = models.len();
        models.extend(other.iter().copied());
        if models.len() != before + other.len() {
            return None;
        }
    }
    Some(models)
}

pub fn original_models(cnf: &Cnf) -> BTreeSet<u64> {
    brute_force_solutions(cnf, 64)
        .unwrap()
        .masks
        .into_iter()
        .collect()
}

pub fn satisfies(cnf: &Cnf, mask: u64) -> bool {
    let a = Assignment::from_mask(cnf.num_vars(), mask);
    cnf.clauses()
        .iter()
        .all(|c| c.is_satisfied_by(|v| a.get(v).unwrap()))
}
