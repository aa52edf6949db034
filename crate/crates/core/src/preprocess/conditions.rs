use serde::{Deserialize, Serialize};

use crate::cnf::Assignment;
use crate::error::PreprocessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedEntry {
    pub var: u32,
    pub value: bool,
}

/// `replaced == master` when `same_sign`, else `replaced == ¬master`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub replaced: u32,
    pub master: u32,
    pub same_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Free,
    Fixed(bool),
    Replaced { master: u32, same_sign: bool },
}

#[derive(Serialize, Deserialize)]
struct RawConditionList {
    num_vars: u32,
    fixed: Vec<FixedEntry>,
    relations: Vec<Relation>,
}

/// Everything the ladder removed from the formula, in the order it was
/// decided: fixed values and replaced-variable relations. Relations always
/// point at a variable that is not itself replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConditionList", into = "RawConditionList")]
pub struct ConditionList {
    num_vars: u32,
    fixed: Vec<FixedEntry>,
    relations: Vec<Relation>,
    roles: Vec<VarRole>,
}

impl TryFrom<RawConditionList> for ConditionList {
    type Error = PreprocessError;

    fn try_from(raw: RawConditionList) -> Result<Self, Self::Error> {
        let mut cond = ConditionList::new(raw.num_vars);
        let check = |var: u32| {
            if var == 0 || var > raw.num_vars {
                Err(PreprocessError::BadCondition {
                    var,
                    num_vars: raw.num_vars,
                })
            } else {
                Ok(())
            }
        };
        for r in raw.relations {
            check(r.replaced)?;
            check(r.master)?;
            cond.relations.push(r);
        }
        for f in raw.fixed {
            check(f.var)?;
            cond.fixed.push(f);
        }
        cond.rebuild_roles();
        Ok(cond)
    }
}

impl From<ConditionList> for RawConditionList {
    fn from(c: ConditionList) -> Self {
        RawConditionList {
            num_vars: c.num_vars,
            fixed: c.fixed,
            relations: c.relations,
        }
    }
}

impl ConditionList {
    pub fn new(num_vars: u32) -> Self {
        ConditionList {
            num_vars,
            fixed: Vec::new(),
            relations: Vec::new(),
            roles: vec![VarRole::Free; num_vars as usize + 1],
        }
    }

    fn rebuild_roles(&mut self) {
        self.roles = vec![VarRole::Free; self.num_vars as usize + 1];
        for r in &self.relations {
            self.roles[r.replaced as usize] = VarRole::Replaced {
                master: r.master,
                same_sign: r.same_sign,
            };
        }
        for f in &self.fixed {
            self.roles[f.var as usize] = VarRole::Fixed(f.value);
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn fixed(&self) -> &[FixedEntry] {
        &self.fixed
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Number of recorded entries of either kind.
    pub fn len(&self) -> usize {
        self.fixed.len() + self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn role(&self, var: u32) -> VarRole {
        self.roles[var as usize]
    }

    pub fn is_master(&self, var: u32) -> bool {
        self.relations.iter().any(|r| r.master == var)
    }

    /// Records a fixed value. Re-fixing a variable to the same value is a
    /// no-op; a replaced variable keeps its relation entry for provenance.
    pub fn fix(&mut self, var: u32, value: bool) {
        if let VarRole::Fixed(_) = self.roles[var as usize] {
            return;
        }
        self.fixed.push(FixedEntry { var, value });
        self.roles[var as usize] = VarRole::Fixed(value);
    }

    /// Adds `replaced = master` (or its negation). `master` must not be
    /// replaced itself; call [`ConditionList::collapse_chains`] after a batch
    /// that may have re-parented existing masters.
    pub(crate) fn add_relation(&mut self, replaced: u32, master: u32, same_sign: bool) {
        self.relations.push(Relation {
            replaced,
            master,
            same_sign,
        });
        self.roles[replaced as usize] = VarRole::Replaced { master, same_sign };
    }

    /// Re-points every relation at its ultimate master so that no replaced
    /// variable appears as a master.
    pub fn collapse_chains(&mut self) {
        for i in 0..self.relations.len() {
            let (master, same) = self.resolve(self.relations[i].master);
            let rel = &mut self.relations[i];
            rel.same_sign = rel.same_sign == same;
            rel.master = master;
            if let VarRole::Replaced { .. } = self.roles[rel.replaced as usize] {
                self.roles[rel.replaced as usize] = VarRole::Replaced {
                    master,
                    same_sign: rel.same_sign,
                };
            }
        }
    }

    /// Follows relations to the first non-replaced variable. The flag is
    /// true when `var` equals that variable (rather than its negation).
    pub fn resolve(&self, var: u32) -> (u32, bool) {
        let mut v = var;
        let mut same = true;
        let mut hops = 0;
        while let VarRole::Replaced { master, same_sign } = self.roles[v as usize] {
            same = same == same_sign;
            v = master;
            hops += 1;
            assert!(hops <= self.num_vars, "cyclic condition list at {var}");
        }
        (v, same)
    }

    /// Variables the reduced formula still has to decide.
    pub fn free_vars(&self) -> Vec<u32> {
        (1..=self.num_vars)
            .filter(|&v| self.roles[v as usize] == VarRole::Free)
            .collect()
    }

    /// Value implied for `var` by fixed entries alone, following relations.
    pub fn implied_value(&self, var: u32) -> Option<bool> {
        match self.roles[var as usize] {
            VarRole::Fixed(b) => Some(b),
            VarRole::Free => None,
            VarRole::Replaced { .. } => {
                let (m, same) = self.resolve(var);
                match self.roles[m as usize] {
                    VarRole::Fixed(b) => Some(b == same),
                    _ => None,
                }
            }
        }
    }

    /// Replaced-value propagation: every replaced variable whose master is
    /// fixed becomes fixed itself. Clauses are never consulted. Returns the
    /// number of newly fixed variables.
    pub fn propagate_replaced_values(&mut self) -> usize {
        let mut added = 0;
        loop {
            let mut changed = false;
            for i in 0..self.relations.len() {
                let r = self.relations[i];
                if !matches!(self.roles[r.replaced as usize], VarRole::Replaced { .. }) {
                    continue;
                }
                if let VarRole::Fixed(b) = self.roles[r.master as usize] {
                    self.fixed.push(FixedEntry {
                        var: r.replaced,
                        value: b == r.same_sign,
                    });
                    self.roles[r.replaced as usize] = VarRole::Fixed(b == r.same_sign);
                    added += 1;
                    changed = true;
                }
            }
            if !changed {
                return added;
            }
        }
    }

    /// Extends an assignment of the free variables to all variables.
    pub fn reconstruct(&self, reduced: &Assignment) -> Result<Assignment, PreprocessError> {
        let mut out = Assignment::empty(self.num_vars);
        let free_value = |v: u32| -> Result<bool, PreprocessError> {
            if v <= reduced.num_vars() {
                reduced.get(v).ok_or(PreprocessError::MissingValue(v))
            } else {
                Err(PreprocessError::MissingValue(v))
            }
        };
        for v in 1..=self.num_vars {
            let value = match self.roles[v as usize] {
                VarRole::Fixed(b) => b,
                VarRole::Free => free_value(v)?,
                VarRole::Replaced { .. } => {
                    let (m, same) = self.resolve(v);
                    let mv = match self.roles[m as usize] {
                        VarRole::Fixed(b) => b,
                        _ => free_value(m)?,
                    };
                    mv == same
                }
            };
            out.set(v, value);
        }
        Ok(out)
    }
}
