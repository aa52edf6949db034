use rayon::prelude::*;

use super::{Assignment, Cnf};
use crate::error::CnfError;

pub const DEFAULT_ORACLE_CAP: u32 = 26;

/// Variables branched on before the search is split across threads.
const SPLIT_DEPTH: u32 = 4;

/// Every satisfying complete assignment of a formula, as sorted bitmasks
/// (bit `i` = variable `i + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub num_vars: u32,
    pub masks: Vec<u64>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains(&self, assignment: &Assignment) -> bool {
        assignment
            .to_mask()
            .is_some_and(|m| self.masks.binary_search(&m).is_ok())
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.masks
            .iter()
            .map(|&m| Assignment::from_mask(self.num_vars, m))
    }

    /// Variables that take the same value in every solution, with that value.
    pub fn backbone(&self) -> Vec<(u32, bool)> {
        let Some(&first) = self.masks.first() else {
            return Vec::new();
        };
        let and = self.masks.iter().fold(u64::MAX, |acc, m| acc & m);
        let or = self.masks.iter().fold(0, |acc, m| acc | m);
        (0..self.num_vars)
            .filter(|&i| (and >> i & 1) == (or >> i & 1))
            .map(|i| (i + 1, first >> i & 1 == 1))
            .collect()
    }
}

struct PackedClause {
    pos: u64,
    neg: u64,
}

impl PackedClause {
    fn satisfied(&self, mask: u64) -> bool {
        (mask & self.pos) != 0 || (!mask & self.neg) != 0
    }
}

/// Enumerates all models by exhaustive search over `1..=n` in index order.
/// A branch is cut only once some clause has all of its variables assigned
/// and is false, so the result is the exact solution set.
pub fn brute_force_solutions(cnf: &Cnf, var_cap: u32) -> Result<SolutionSet, CnfError> {
    let n = cnf.num_vars();
    if n > var_cap || n > 64 {
        return Err(CnfError::TooManyVars {
            num_vars: n,
            cap: var_cap.min(64),
        });
    }
    if cnf.is_unsat() {
        return Ok(SolutionSet {
            num_vars: n,
            masks: vec![],
        });
    }
    // buckets[v] holds the clauses whose highest variable is v.
    let mut buckets: Vec<Vec<PackedClause>> = (0..=n).map(|_| Vec::new()).collect();
    for clause in cnf.clauses() {
        let mut packed = PackedClause { pos: 0, neg: 0 };
        let mut top = 0;
        for l in clause.lits() {
            let bit = 1u64 << (l.var() - 1);
            if l.is_positive() {
                packed.pos |= bit;
            } else {
                packed.neg |= bit;
            }
            top = top.max(l.var());
        }
        buckets[top as usize].push(packed);
    }

    let split = SPLIT_DEPTH.min(n);
    let prefixes: Vec<u64> = (0..1u64 << split)
        .filter(|&prefix| (1..=split).all(|v| bucket_ok(&buckets, v, prefix)))
        .collect();
    let mut masks: Vec<u64> = prefixes
        .par_iter()
        .flat_map_iter(|&prefix| {
            let mut out = Vec::new();
            extend(&buckets, n, split + 1, prefix, &mut out);
            out
        })
        .collect();
    masks.sort_unstable();
    Ok(SolutionSet { num_vars: n, masks })
}

fn bucket_ok(buckets: &[Vec<PackedClause>], var: u32, mask: u64) -> bool {
    buckets[var as usize].iter().all(|c| c.satisfied(mask))
}

fn extend(buckets: &[Vec<PackedClause>], n: u32, var: u32, mask: u64, out: &mut Vec<u64>) {
    if var > n {
        out.push(mask);
        return;
    }
    for value in [false, true] {
        let next = if value { mask | 1 << (var - 1) } else { mask };
        if bucket_ok(buckets, var, next) {
            extend(buckets, n, var + 1, next, out);
        }
    }
}
