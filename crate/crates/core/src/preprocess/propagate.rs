use super::ConditionList;
use crate::cnf::{Clause, Cnf, Literal};

/// Unit propagation to fixpoint. Every forced value is recorded in `cond`;
/// satisfied clauses are dropped and false literals removed. A clause is
/// treated as unit when it has a single distinct unassigned literal. On
/// conflict the result is the formula holding only the empty clause.
pub fn propagate_1sat(cnf: &Cnf, cond: &mut ConditionList) -> Cnf {
    if cnf.is_unsat() {
        return unsat_like(cnf);
    }
    let n = cnf.num_vars() as usize;
    let mut values: Vec<Option<bool>> = vec![None; n + 1];
    let mut order: Vec<Literal> = Vec::new();
    loop {
        let mut progressed = false;
        for c in cnf.clauses() {
            let mut unassigned: Option<Literal> = None;
            let mut open = 0;
            let mut satisfied = false;
            for &l in c.lits() {
                match values[l.var() as usize] {
                    Some(v) if l.eval(v) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        if unassigned != Some(l) {
                            if unassigned.is_some() {
                                open = 2;
                            } else {
                                unassigned = Some(l);
                                open = 1;
                            }
                        }
                    }
                }
                if open > 1 {
                    break;
                }
            }
            if satisfied || open > 1 {
                continue;
            }
            match unassigned {
                None => {
                    for l in &order {
                        cond.fix(l.var(), l.satisfying_value());
                    }
                    return unsat_like(cnf);
                }
                Some(l) => {
                    values[l.var() as usize] = Some(l.satisfying_value());
                    order.push(l);
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    if order.is_empty() {
        return cnf.with_clauses(cnf.clauses().to_vec());
    }
    for l in &order {
        cond.fix(l.var(), l.satisfying_value());
    }
    let clauses = cnf
        .clauses()
        .iter()
        .filter(|c| {
            !c.lits()
                .iter()
                .any(|l| values[l.var() as usize].is_some_and(|v| l.eval(v)))
        })
        .map(|c| {
            c.lits()
                .iter()
                .copied()
                .filter(|l| values[l.var() as usize].is_none())
                .collect::<Clause>()
        })
        .collect();
    cnf.with_clauses(clauses)
}

pub(crate) fn unsat_like(cnf: &Cnf) -> Cnf {
    cnf.with_clauses(vec![Clause::empty()])
}
