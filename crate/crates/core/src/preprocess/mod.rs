//! CNF simplification ladder. Each pass takes a formula and a
//! [`ConditionList`] and records what it removed so that any model of the
//! reduced formula can be extended to a model of the input.
//!
//! Levels are cumulative:
//! 0. nothing
//! 1. re-encode complete AND/OR gate groups in implication form
//! 2. unit propagation
//! 3. 2SAT conditioning (NOT/BUFFER pairs, forced pairs)
//! 4. replaced-value propagation
//! 5. clause cleaning
//! 6. subsumption and pure-literal elimination
//! 7. one random guess on a high-degree variable
//!
//! Passes of levels 2 to 6 are repeated until none of them changes anything.
//! Reduced formulas keep the original variable numbering.

mod condition;
mod conditions;
mod gates;
mod propagate;
mod simplify;

pub use condition::{condition_2sat, ConditionStats};
pub use conditions::{ConditionList, FixedEntry, Relation, VarRole};
pub use gates::{detect_gate_groups, reencode_option2, GateGroup};
pub use propagate::propagate_1sat;
pub use simplify::{clean_clauses, eliminate_pure_literals, subsume};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Clause, Cnf, Literal};
use crate::decompose::build_vig;
use crate::error::PreprocessError;

pub const MAX_LEVEL: u8 = 7;

/// Degree multiple over the mean a variable needs before it is branched on.
pub const BRANCH_DEGREE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassReport {
    pub pass: String,
    pub vars_before: usize,
    pub vars_after: usize,
    pub clauses_before: usize,
    pub clauses_after: usize,
    pub new_unit_clauses: usize,
    pub conditions_added: usize,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchGuess {
    pub var: u32,
    pub value: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub guesses: Vec<BranchGuess>,
    /// The guesses made the formula unsatisfiable by propagation.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub level: u8,
    pub seed: u64,
    /// Overrides the random branch value.
    pub forced_guess: Option<bool>,
    /// Whether level 6 runs pure-literal elimination (subsumption always
    /// runs). Turning it off keeps the reduced solution set in bijection
    /// with the original one.
    pub pure_literal: bool,
    pub max_branch_vars: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            level: MAX_LEVEL,
            seed: 0,
            forced_guess: None,
            pure_literal: true,
            max_branch_vars: 1,
        }
    }
}

impl LadderConfig {
    pub fn level(level: u8) -> Self {
        LadderConfig {
            level,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub cnf: Cnf,
    pub cond: ConditionList,
    pub branch: BranchRecord,
    pub reports: Vec<PassReport>,
}

impl LadderResult {
    pub fn is_unsat(&self) -> bool {
        self.cnf.is_unsat()
    }

    /// Variables still occurring in the reduced formula.
    pub fn remaining_vars(&self) -> usize {
        self.cnf.num_occurring_vars()
    }

    /// Variables a reduced model must assign: everything neither fixed nor
    /// replaced, including variables that no longer occur anywhere.
    pub fn free_vars(&self) -> Vec<u32> {
        self.cond.free_vars()
    }

    pub fn reconstruct(&self, reduced: &Assignment) -> Result<Assignment, PreprocessError> {
        reconstruct(reduced, &self.cond, &self.branch)
    }
}

/// Extends a model of the reduced formula (indexed by original variable
/// numbers; only free variables are read) to every original variable.
pub fn reconstruct(
    reduced: &Assignment,
    cond: &ConditionList,
    branch: &BranchRecord,
) -> Result<Assignment, PreprocessError> {
    let mut full = cond.reconstruct(reduced)?;
    for g in &branch.guesses {
        full.set(g.var, g.value);
    }
    Ok(full)
}

/// Renumbers `vars` to `1..=vars.len()` and restricts the formula to them.
/// Returns the compact formula; `vars[i]` is compact variable `i + 1`.
pub fn compact(cnf: &Cnf, vars: &[u32]) -> Cnf {
    let mut map = vec![0u32; cnf.num_vars() as usize + 1];
    for (i, &v) in vars.iter().enumerate() {
        map[v as usize] = i as u32 + 1;
    }
    let clauses = cnf
        .clauses()
        .iter()
        .map(|c| {
            c.lits()
                .iter()
                .map(|l| {
                    let m = map[l.var() as usize];
                    assert!(m > 0, "variable {} is not in the compact set", l.var());
                    Literal::new(m, l.is_positive())
                })
                .collect::<Clause>()
        })
        .collect();
    Cnf::new(vars.len() as u32, clauses).expect("compact indices in range")
}

/// Lifts a compact assignment back to original numbering.
pub fn expand(compact_values: &Assignment, vars: &[u32], num_vars: u32) -> Assignment {
    let mut out = Assignment::empty(num_vars);
    for (i, &v) in vars.iter().enumerate() {
        if let Some(b) = compact_values.get(i as u32 + 1) {
            out.set(v, b);
        }
    }
    out
}

/// Variable chosen for branching: highest VIG degree, lowest index on ties,
/// and at least [`BRANCH_DEGREE_FACTOR`] times the mean degree.
pub fn tight_variable(cnf: &Cnf) -> Option<u32> {
    let vig = build_vig(cnf);
    let v = vig.max_degree_node()?;
    let mean = vig.mean_degree();
    (vig.degree(v) > 0 && vig.degree(v) as f64 >= BRANCH_DEGREE_FACTOR * mean).then_some(v)
}

/// Guesses values for up to `max_vars` tight variables (re-selected after
/// each guess is propagated). The guess is `forced` if given, else drawn from
/// a generator seeded with `seed`.
pub fn branch_tight_variable(
    cnf: &Cnf,
    cond: &mut ConditionList,
    seed: u64,
    forced: Option<bool>,
    max_vars: usize,
) -> (Cnf, BranchRecord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut record = BranchRecord::default();
    let mut current = cnf.with_clauses(cnf.clauses().to_vec());
    for _ in 0..max_vars {
        if current.is_unsat() {
            break;
        }
        let Some(var) = tight_variable(&current) else {
            break;
        };
        let value = forced.unwrap_or_else(|| rng.gen_bool(0.5));
        record.guesses.push(BranchGuess { var, value });
        let mut clauses = current.clauses().to_vec();
        clauses.push(Clause::unit(Literal::new(var, value)));
        current = propagate_1sat(&current.with_clauses(clauses), cond);
    }
    record.closed = current.is_unsat();
    (current, record)
}

struct Ladder {
    cnf: Cnf,
    cond: ConditionList,
    reports: Vec<PassReport>,
}

impl Ladder {
    /// Runs one pass, appends its report, and tells whether it changed the
    /// formula or the condition list.
    fn step(&mut self, name: &str, pass: impl FnOnce(&Cnf, &mut ConditionList) -> Cnf) -> bool {
        let start = Instant::now();
        let cond_before = self.cond.len();
        let next = pass(&self.cnf, &mut self.cond);
        let report = PassReport {
            pass: name.to_string(),
            vars_before: self.cnf.num_occurring_vars(),
            vars_after: next.num_occurring_vars(),
            clauses_before: self.cnf.num_clauses(),
            clauses_after: next.num_clauses(),
            new_unit_clauses: next.clauses().iter().filter(|c| c.is_unit()).count(),
            conditions_added: self.cond.len() - cond_before,
            wall_time: start.elapsed().as_secs_f64(),
        };
        let changed = next.clauses() != self.cnf.clauses() || self.cond.len() != cond_before;
        self.reports.push(report);
        self.cnf = next;
        changed
    }

    fn simplify_to_fixpoint(&mut self, cfg: &LadderConfig) {
        let level = cfg.level;
        if level < 2 {
            return;
        }
        loop {
            let mut changed = self.step("unit_propagation", propagate_1sat);
            if level >= 3 {
                let conditioned = self.step("2sat_conditioning", |c, cond| condition_2sat(c, cond).0);
                if conditioned {
                    changed = true;
                    self.step("unit_propagation", propagate_1sat);
                }
            }
            if level >= 4 {
                changed |= self.step("replaced_value_propagation", |c, cond| {
                    cond.propagate_replaced_values();
                    c.with_clauses(c.clauses().to_vec())
                });
            }
            if level >= 5 && self.step("clause_cleaning", |c, _| clean_clauses(c)) {
                changed = true;
                self.step("unit_propagation", propagate_1sat);
            }
            if level >= 6 {
                changed |= self.step("subsumption", |c, _| subsume(c));
                if cfg.pure_literal && self.step("pure_literal", eliminate_pure_literals) {
                    changed = true;
                    self.step("unit_propagation", propagate_1sat);
                }
            }
            if !changed || self.cnf.is_unsat() {
                break;
            }
        }
    }
}

/// Runs the cumulative ladder up to `level` with default options.
pub fn run_ladder(cnf: &Cnf, level: u8, seed: u64) -> LadderResult {
    run_ladder_with(
        cnf,
        &LadderConfig {
            level,
            seed,
            ..Default::default()
        },
    )
}

pub fn run_ladder_with(cnf: &Cnf, cfg: &LadderConfig) -> LadderResult {
    let level = cfg.level.min(MAX_LEVEL);
    let mut ladder = Ladder {
        cnf: cnf.with_clauses(cnf.clauses().to_vec()),
        cond: ConditionList::new(cnf.num_vars()),
        reports: Vec::new(),
    };
    if level == 0 {
        ladder.step("none", |c, _| c.with_clauses(c.clauses().to_vec()));
    } else {
        ladder.step("gate_reencoding", |c, _| reencode_option2(c));
    }
    ladder.simplify_to_fixpoint(cfg);
    let mut branch = BranchRecord::default();
    if level >= 7 && !ladder.cnf.is_unsat() {
        ladder.step("branching", |c, cond| {
            let (next, record) =
                branch_tight_variable(c, cond, cfg.seed, cfg.forced_guess, cfg.max_branch_vars);
            branch = record;
            next
        });
        ladder.simplify_to_fixpoint(cfg);
        branch.closed = ladder.cnf.is_unsat();
    }
    ladder.cond.collapse_chains();
    LadderResult {
        cnf: ladder.cnf,
        cond: ladder.cond,
        branch,
        reports: ladder.reports,
    }
}
