//! Budgeted subproblem selection on the variable interaction graph, freezing
//! of the remaining variables at their best-known values, and the
//! select → solve → merge loop.
//!
//! The loop works on a compact copy of the reduced formula (free variables
//! renumbered `1..=k`); the selection, global state and subproblems all use
//! that numbering.

mod select;
mod vig;

pub use select::{select, select_bfs, select_dfs, spin_cost, FilterState, Strategy};
pub use vig::{build_vig, Vig};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{evaluate, Assignment, Clause, Cnf, Literal};
use crate::error::DecomposeError;
use crate::preprocess::{compact, expand, LadderResult};
use crate::qubo::{cnf_to_qubo, qubo_to_ising, scale_to_chip, ChipProfile, QuboModel};
use crate::solver::{solve, AnnealSchedule, Backend, SolveRequest, TabuConfig, TracePoint};

/// Best-known assignment of the (compact) formula being decomposed.
#[derive(Debug, Clone)]
pub struct GlobalState {
    /// `values[v - 1]` is variable `v`.
    pub values: Vec<bool>,
    pub best_satisfied: usize,
    pub iteration: usize,
    pub rng: ChaCha8Rng,
}

impl GlobalState {
    /// Uniformly random start.
    pub fn random(cnf: &Cnf, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<bool> = (0..cnf.num_vars()).map(|_| rng.gen_bool(0.5)).collect();
        let best_satisfied = cnf.count_satisfied(&values);
        GlobalState {
            values,
            best_satisfied,
            iteration: 0,
            rng,
        }
    }

    pub fn is_solved(&self, cnf: &Cnf) -> bool {
        self.best_satisfied == cnf.num_clauses()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    /// Ascending; local variable `i + 1` is `selected_vars[i]`.
    pub selected_vars: Vec<u32>,
    pub sub_cnf: Cnf,
    /// Clauses already satisfied by frozen values (dropped).
    pub satisfied_by_frozen: usize,
    /// Clauses falsified by frozen values alone; added to the QUBO offset.
    pub falsified_by_frozen: usize,
    pub qubo: QuboModel,
    pub spin_cost: usize,
}

impl Subproblem {
    /// Writes a QUBO solution (first `selected_vars.len()` entries) over the
    /// frozen values.
    pub fn merge(&self, global: &[bool], x: &[bool]) -> Vec<bool> {
        let mut out = global.to_vec();
        for (i, &v) in self.selected_vars.iter().enumerate() {
            out[v as usize - 1] = x[i];
        }
        out
    }
}

/// Substitutes the global values of all unselected variables. True literals
/// drop their clause, false literals are deleted, and nothing else is
/// simplified: duplicates, conflicting units and subsumed clauses all stay.
/// The QUBO energy of a sub-assignment equals the number of clauses of
/// `cnf` it leaves falsified.
pub fn freeze_and_extract(
    cnf: &Cnf,
    selected: &[u32],
    global: &GlobalState,
) -> Result<Subproblem, DecomposeError> {
    if selected.is_empty() {
        return Err(DecomposeError::EmptySelection);
    }
    let mut selected_vars = selected.to_vec();
    selected_vars.sort_unstable();
    selected_vars.dedup();
    let mut local = vec![0u32; cnf.num_vars() as usize + 1];
    for (i, &v) in selected_vars.iter().enumerate() {
        local[v as usize] = i as u32 + 1;
    }
    let mut clauses = Vec::new();
    let mut satisfied_by_frozen = 0;
    let mut falsified_by_frozen = 0;
    'clauses: for c in cnf.clauses() {
        let mut lits = Vec::with_capacity(c.width());
        for l in c.lits() {
            let idx = local[l.var() as usize];
            if idx > 0 {
                lits.push(Literal::new(idx, l.is_positive()));
            } else if l.eval(global.values[l.var() as usize - 1]) {
                satisfied_by_frozen += 1;
                continue 'clauses;
            }
        }
        if lits.is_empty() {
            falsified_by_frozen += 1;
        } else {
            clauses.push(Clause::new(lits));
        }
    }
    let sub_cnf = Cnf::new(selected_vars.len() as u32, clauses)?;
    let mut qubo = cnf_to_qubo(&sub_cnf)?;
    qubo.offset += falsified_by_frozen as f64;
    let spin_cost = qubo.num_vars;
    Ok(Subproblem {
        selected_vars,
        sub_cnf,
        satisfied_by_frozen,
        falsified_by_frozen,
        qubo,
        spin_cost,
    })
}

/// Overwrites the selected variables with the sub-solution and keeps the
/// result unless it satisfies fewer clauses of `cnf` than the current best.
/// Returns whether the candidate was accepted.
pub fn update_global(cnf: &Cnf, global: &mut GlobalState, sub: &Subproblem, x: &[bool]) -> bool {
    let candidate = sub.merge(&global.values, x);
    let count = cnf.count_satisfied(&candidate);
    global.iteration += 1;
    if count >= global.best_satisfied {
        global.values = candidate;
        global.best_satisfied = count;
        true
    } else {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterateConfig {
    pub strategy: Strategy,
    pub backend: Backend,
    pub profile: ChipProfile,
    pub cap: usize,
    pub filter_window: usize,
    pub seed: u64,
    pub schedule: AnnealSchedule,
    pub tabu: TabuConfig,
    pub num_samples: usize,
    /// Keep the best satisfied count after every iteration.
    pub record_history: bool,
    /// Keep the anneal trace of the first solver call.
    pub trace_first_call: bool,
}

impl Default for IterateConfig {
    fn default() -> Self {
        IterateConfig {
            strategy: Strategy::Dfs,
            backend: Backend::Emulator,
            profile: ChipProfile::default(),
            cap: 5000,
            filter_window: 5,
            seed: 0,
            schedule: AnnealSchedule::default(),
            tabu: TabuConfig::default(),
            num_samples: 1,
            record_history: false,
            trace_first_call: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateOutcome {
    pub solved: bool,
    /// Loop iterations executed (one solver call each).
    pub iterations: usize,
    pub solver_calls: usize,
    pub best_satisfied: usize,
    pub num_clauses: usize,
    /// The preprocessing made the formula unsatisfiable (wrong branch guess).
    pub closed_branch: bool,
    /// Reconstructed full assignment satisfies the original formula.
    pub verified: bool,
    pub assignment: Option<Assignment>,
    pub history: Vec<usize>,
    pub first_trace: Vec<TracePoint>,
}

/// Runs the decomposition loop on a preprocessed formula until every clause
/// is satisfied or `cfg.cap` iterations pass. A success is reconstructed
/// through the condition list and checked against `original`.
pub fn iterate(
    ladder: &LadderResult,
    original: &Cnf,
    cfg: &IterateConfig,
) -> Result<IterateOutcome, DecomposeError> {
    let mut outcome = IterateOutcome {
        solved: false,
        iterations: 0,
        solver_calls: 0,
        best_satisfied: 0,
        num_clauses: ladder.cnf.num_clauses(),
        closed_branch: false,
        verified: false,
        assignment: None,
        history: Vec::new(),
        first_trace: Vec::new(),
    };
    if ladder.cnf.is_unsat() {
        outcome.closed_branch = true;
        return Ok(outcome);
    }
    let free = ladder.free_vars();
    let cnf = compact(&ladder.cnf, &free);
    let vig = build_vig(&cnf);
    let mut global = GlobalState::random(&cnf, cfg.seed);
    let mut filter = FilterState::new(cnf.num_vars(), cfg.filter_window);
    let budget = cfg.profile.spin_budget;

    while !global.is_solved(&cnf) && outcome.iterations < cfg.cap {
        let start = pick_start(&cnf, &global, &filter);
        let selected = select(&vig, &cnf, budget, start, &filter, cfg.strategy, &mut global.rng);
        let sub = freeze_and_extract(&cnf, &selected, &global)?;
        if sub.spin_cost > budget {
            return Err(DecomposeError::OverBudget {
                cost: sub.spin_cost,
                budget,
            });
        }
        let ising = qubo_to_ising(&sub.qubo);
        let model = match cfg.backend {
            Backend::Emulator => scale_to_chip(&ising, &cfg.profile)?.0,
            Backend::Tabu => ising,
        };
        let request = SolveRequest {
            model,
            backend: cfg.backend,
            seed: global.rng.gen(),
            num_samples: cfg.num_samples,
            schedule: cfg.schedule,
            tabu: cfg.tabu,
            profile: cfg.profile,
            trace: cfg.trace_first_call && outcome.solver_calls == 0,
        };
        let result = solve(&request)?;
        if request.trace {
            outcome.first_trace = result.trace.clone();
        }
        outcome.solver_calls += 1;
        let x: Vec<bool> = result.spins.iter().map(|&s| s > 0).collect();
        update_global(&cnf, &mut global, &sub, &x);
        filter.update(&sub.selected_vars);
        outcome.iterations += 1;
        if cfg.record_history {
            outcome.history.push(global.best_satisfied);
        }
    }

    outcome.best_satisfied = global.best_satisfied;
    if global.is_solved(&cnf) {
        let reduced = expand(&Assignment::from_bools(&global.values), &free, original.num_vars());
        let full = ladder.reconstruct(&reduced)?;
        outcome.verified = evaluate(original, &full)?.all_satisfied;
        outcome.solved = outcome.verified;
        outcome.assignment = Some(full);
    }
    Ok(outcome)
}

/// A variable of a random falsified clause, avoiding cooled-down variables
/// when possible.
fn pick_start(cnf: &Cnf, global: &GlobalState, filter: &FilterState) -> u32 {
    let mut rng = global.rng.clone();
    let unsat: Vec<&Clause> = cnf
        .clauses()
        .iter()
        .filter(|c| !c.is_satisfied_by(|v| global.values[v as usize - 1]))
        .collect();
    let clause = unsat.choose(&mut rng).expect("called only while unsolved");
    let vars = clause.var_set();
    let fresh: Vec<u32> = vars.iter().copied().filter(|&v| !filter.is_cooling(v)).collect();
    *fresh.choose(&mut rng).unwrap_or_else(|| vars.choose(&mut rng).expect("non-empty clause"))
}
