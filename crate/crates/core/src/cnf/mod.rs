//! CNF formulas over 1-indexed variables, DIMACS I/O, assignment evaluation
//! and an exhaustive solution enumerator used as a verification oracle.

mod dimacs;
mod oracle;

pub use dimacs::{parse_dimacs, parse_dimacs_detailed, write_dimacs, DimacsWarning};
pub use oracle::{brute_force_solutions, SolutionSet, DEFAULT_ORACLE_CAP};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CnfError;

/// A possibly negated variable, stored in DIMACS form (`v` or `-v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Literal(i32);

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1 && var <= i32::MAX as u32, "variable index out of range: {var}");
        let v = var as i32;
        Literal(if positive { v } else { -v })
    }

    pub fn pos(var: u32) -> Self {
        Self::new(var, true)
    }

    pub fn neg(var: u32) -> Self {
        Self::new(var, false)
    }

    /// `None` for 0, which DIMACS reserves as the clause terminator.
    pub fn from_dimacs(value: i32) -> Option<Self> {
        (value != 0 && value != i32::MIN).then_some(Literal(value))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }

    /// The value the variable must take for this literal to be true.
    pub fn satisfying_value(self) -> bool {
        self.is_positive()
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(-self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var())
        } else {
            write!(f, "¬x{}", self.var())
        }
    }
}

/// Disjunction of literals. The empty clause is the falsified clause and
/// marks an unsatisfiable formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(lits: Vec<Literal>) -> Self {
        Clause { lits }
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn unit(lit: Literal) -> Self {
        Clause { lits: vec![lit] }
    }

    /// Builds a clause from DIMACS integers. Panics on 0.
    pub fn from_dimacs(lits: &[i32]) -> Self {
        Clause {
            lits: lits
                .iter()
                .map(|&l| Literal::from_dimacs(l).expect("zero literal"))
                .collect(),
        }
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.lits.len() == 1
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn negative_count(&self) -> usize {
        self.lits.iter().filter(|l| !l.is_positive()).count()
    }

    /// Sorted, deduplicated variable set.
    pub fn var_set(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self.vars().collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Sorted, deduplicated literal set.
    pub fn lit_set(&self) -> Vec<Literal> {
        let mut lits = self.lits.clone();
        lits.sort_unstable();
        lits.dedup();
        lits
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.iter().any(|&l| self.lits.contains(&!l))
    }

    pub fn is_satisfied_by(&self, value_of: impl Fn(u32) -> bool) -> bool {
        self.lits.iter().any(|l| l.eval(value_of(l.var())))
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.contains(&lit)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Clause>,
    /// Free-text tag naming the generator or benchmark source.
    pub provenance: String,
    /// Additional `c` comment lines, kept verbatim for round-tripping.
    pub comments: Vec<String>,
}

impl Cnf {
    /// Checks that every literal references a variable in `1..=num_vars`.
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for (idx, c) in clauses.iter().enumerate() {
            if let Some(l) = c.lits().iter().find(|l| l.var() > num_vars) {
                return Err(CnfError::VarOutOfRange {
                    clause: idx,
                    var: l.var(),
                    num_vars,
                });
            }
        }
        Ok(Cnf {
            num_vars,
            clauses,
            provenance: String::new(),
            comments: Vec::new(),
        })
    }

    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i32]]) -> Result<Self, CnfError> {
        Cnf::new(num_vars, clauses.iter().map(|c| Clause::from_dimacs(c)).collect())
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// Same header and metadata, different clause list. Used by passes, which
    /// never introduce new variables.
    pub(crate) fn with_clauses(&self, clauses: Vec<Clause>) -> Cnf {
        debug_assert!(clauses
            .iter()
            .all(|c| c.vars().all(|v| v >= 1 && v <= self.num_vars)));
        Cnf {
            num_vars: self.num_vars,
            clauses,
            provenance: self.provenance.clone(),
            comments: self.comments.clone(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// A formula containing the empty clause has no model.
    pub fn is_unsat(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Histogram of clause widths, index = width.
    pub fn width_histogram(&self) -> Vec<usize> {
        let max = self.clauses.iter().map(Clause::width).max().unwrap_or(0);
        let mut hist = vec![0; max + 1];
        for c in &self.clauses {
            hist[c.width()] += 1;
        }
        hist
    }

    /// Variables that occur in at least one clause, ascending.
    pub fn occurring_vars(&self) -> Vec<u32> {
        let mut seen = vec![false; self.num_vars as usize + 1];
        for c in &self.clauses {
            for v in c.vars() {
                seen[v as usize] = true;
            }
        }
        (1..=self.num_vars).filter(|&v| seen[v as usize]).collect()
    }

    pub fn num_occurring_vars(&self) -> usize {
        self.occurring_vars().len()
    }

    /// Satisfied-clause count for a dense 0-indexed value slice
    /// (`values[v - 1]` is variable `v`).
    pub fn count_satisfied(&self, values: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.is_satisfied_by(|v| values[v as usize - 1]))
            .count()
    }
}

/// Per-variable values for a formula. `values[v - 1]` holds variable `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(num_vars: u32) -> Self {
        Assignment {
            values: vec![None; num_vars as usize],
        }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Assignment {
            values: values.iter().map(|&b| Some(b)).collect(),
        }
    }

    /// Bit `i` of `mask` is variable `i + 1`.
    pub fn from_mask(num_vars: u32, mask: u64) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| Some(mask >> i & 1 == 1)).collect(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values.get(var as usize - 1).copied().flatten()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = Some(value);
    }

    pub fn unset(&mut self, var: u32) {
        self.values[var as usize - 1] = None;
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn assigned_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Dense values; `None` if incomplete.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        self.values.iter().copied().collect()
    }

    /// Packs a complete assignment of at most 64 variables into a bitmask.
    pub fn to_mask(&self) -> Option<u64> {
        if self.values.len() > 64 {
            return None;
        }
        let mut mask = 0u64;
        for (i, v) in self.values.iter().enumerate() {
            if (*v)? {
                mask |= 1 << i;
            }
        }
        Some(mask)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Option<bool>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (i as u32 + 1, *v))
    }
}

/// Outcome of [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub satisfied_count: usize,
    pub all_satisfied: bool,
}

/// Counts satisfied clauses under a complete assignment.
pub fn evaluate(cnf: &Cnf, assignment: &Assignment) -> Result<Evaluation, CnfError> {
    if assignment.num_vars() < cnf.num_vars() {
        return Err(CnfError::IncompleteAssignment {
            missing: cnf.num_vars() - assignment.num_vars(),
        });
    }
    let missing = (1..=cnf.num_vars())
        .filter(|&v| assignment.get(v).is_none())
        .count() as u32;
    if missing > 0 {
        return Err(CnfError::IncompleteAssignment { missing });
    }
    let satisfied_count = cnf
        .clauses()
        .iter()
        .filter(|c| c.is_satisfied_by(|v| assignment.get(v).unwrap()))
        .count();
    Ok(Evaluation {
        satisfied_count,
        all_satisfied: satisfied_count == cnf.num_clauses(),
    })
}
