use super::ConditionList;
use crate::cnf::{Clause, Cnf, Literal};

/// Removes repeated literals (keeping first occurrences) and drops
/// tautologies.
pub fn clean_clauses(cnf: &Cnf) -> Cnf {
    let clauses = cnf
        .clauses()
        .iter()
        .filter(|c| !c.is_tautology())
        .map(|c| {
            let mut seen: Vec<Literal> = Vec::with_capacity(c.width());
            for &l in c.lits() {
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
            Clause::new(seen)
        })
        .collect();
    cnf.with_clauses(clauses)
}

/// Drops every clause whose literal set contains another clause's literal
/// set. Of several identical clauses the first is kept.
pub fn subsume(cnf: &Cnf) -> Cnf {
    let sets: Vec<Vec<Literal>> = cnf.clauses().iter().map(Clause::lit_set).collect();
    let mut order: Vec<usize> = (0..sets.len()).collect();
    // Shorter clauses first so each clause is only tested against
    // candidates that could subsume it.
    order.sort_by_key(|&i| (sets[i].len(), i));
    let mut kept: Vec<usize> = Vec::new();
    let mut keep = vec![false; sets.len()];
    for &i in &order {
        let subsumed = kept
            .iter()
            .any(|&j| sets[j].len() <= sets[i].len() && is_subset(&sets[j], &sets[i]));
        if !subsumed {
            keep[i] = true;
            kept.push(i);
        }
    }
    let clauses = cnf
        .clauses()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(c, _)| c.clone())
        .collect();
    cnf.with_clauses(clauses)
}

fn is_subset(small: &[Literal], big: &[Literal]) -> bool {
    let mut it = big.iter();
    small.iter().all(|l| it.any(|b| b == l))
}

/// Fixes every variable that occurs with a single polarity to the value
/// satisfying its occurrences, removes the clauses it satisfies, and repeats
/// until no pure literal remains.
///
/// This preserves satisfiability but not the solution set: models where a
/// pure variable takes the other value are discarded.
pub fn eliminate_pure_literals(cnf: &Cnf, cond: &mut ConditionList) -> Cnf {
    if cnf.is_unsat() {
        return cnf.with_clauses(cnf.clauses().to_vec());
    }
    let n = cnf.num_vars() as usize;
    let mut clauses: Vec<Clause> = cnf.clauses().to_vec();
    loop {
        let mut pos = vec![false; n + 1];
        let mut neg = vec![false; n + 1];
        for c in &clauses {
            for l in c.lits() {
                if l.is_positive() {
                    pos[l.var() as usize] = true;
                } else {
                    neg[l.var() as usize] = true;
                }
            }
        }
        let pure: Vec<Literal> = (1..=n as u32)
            .filter(|&v| pos[v as usize] != neg[v as usize])
            .map(|v| Literal::new(v, pos[v as usize]))
            .collect();
        if pure.is_empty() {
            break;
        }
        for l in &pure {
            cond.fix(l.var(), l.satisfying_value());
        }
        clauses.retain(|c| !c.lits().iter().any(|l| pure.contains(l)));
    }
    cnf.with_clauses(clauses)
}
