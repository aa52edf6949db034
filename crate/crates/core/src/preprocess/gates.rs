use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::GateKind;
use crate::cnf::{Clause, Cnf, Literal};

/// Clauses sharing one variable set, with their sorted negative-literal
/// counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateGroup {
    pub var_set: Vec<u32>,
    pub clause_ids: Vec<usize>,
    pub signature: Vec<usize>,
    /// Gate recognised from the signature and a truth-table check.
    pub kind: Option<GateKind>,
    /// Output variable when `kind` is a 2-input gate.
    pub output: Option<u32>,
}

/// Groups clauses (width ≥ 2, distinct variables) by variable set. Only
/// groups with at least two clauses are returned, in order of first
/// occurrence.
pub fn detect_gate_groups(cnf: &Cnf) -> Vec<GateGroup> {
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
    for (i, c) in cnf.clauses().iter().enumerate() {
        let vars = c.var_set();
        if vars.len() < 2 || vars.len() != c.width() {
            continue;
        }
        let slot = *index.entry(vars.clone()).or_insert_with(|| {
            groups.push((vars, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(i);
    }
    groups
        .into_iter()
        .filter(|(_, ids)| ids.len() >= 2)
        .map(|(var_set, clause_ids)| {
            let clauses: Vec<&Clause> = clause_ids.iter().map(|&i| &cnf.clauses()[i]).collect();
            let mut signature: Vec<usize> = clauses.iter().map(|c| c.negative_count()).collect();
            signature.sort_unstable();
            let (kind, output) = classify(&var_set, &clauses);
            GateGroup {
                var_set,
                clause_ids,
                signature,
                kind,
                output,
            }
        })
        .collect()
}

/// Rows (bitmask over `vars`, bit i = vars[i]) falsified by the clauses.
fn excluded_rows(vars: &[u32], clauses: &[&Clause]) -> u32 {
    let mut excluded = 0u32;
    for row in 0..1u32 << vars.len() {
        let value = |v: u32| {
            let i = vars.iter().position(|&x| x == v).expect("var in group");
            row >> i & 1 == 1
        };
        if clauses.iter().any(|c| !c.is_satisfied_by(value)) {
            excluded |= 1 << row;
        }
    }
    excluded
}

fn classify(vars: &[u32], clauses: &[&Clause]) -> (Option<GateKind>, Option<u32>) {
    let excluded = excluded_rows(vars, clauses);
    match vars.len() {
        2 => {
            // rows: bit0 = first var, bit1 = second var
            let kind = match excluded {
                0b1001 => Some(GateKind::Not),    // forbids 00 and 11
                0b0110 => Some(GateKind::Buffer), // forbids 01 and 10
                _ => None,
            };
            (kind, kind.map(|_| vars[1]))
        }
        3 => {
            if excluded.count_ones() != 4 {
                return (None, None);
            }
            // Prefer the highest index as output, which is what a generator
            // numbering gates after their inputs produces.
            for out_pos in (0..3).rev() {
                if let Some(kind) = functional_kind(excluded, out_pos) {
                    return (Some(kind), Some(vars[out_pos]));
                }
            }
            (None, None)
        }
        _ => (None, None),
    }
}

/// If the variable at `out_pos` is a function of the other two (first
/// remaining var = input 0), returns the plain gate computing it.
fn functional_kind(excluded: u32, out_pos: usize) -> Option<GateKind> {
    let ins: Vec<usize> = (0..3).filter(|&p| p != out_pos).collect();
    let mut table = [false; 4];
    for (idx, slot) in table.iter_mut().enumerate() {
        let a = idx >> 1 & 1 == 1;
        let b = idx & 1 == 1;
        let row = |o: bool| (a as u32) << ins[0] | (b as u32) << ins[1] | (o as u32) << out_pos;
        match (excluded >> row(false) & 1 == 1, excluded >> row(true) & 1 == 1) {
            (true, false) => *slot = true,
            (false, true) => *slot = false,
            _ => return None,
        }
    }
    [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
    ]
    .into_iter()
    .find(|k| {
        (0..4).all(|idx| k.eval(&[idx >> 1 & 1 == 1, idx & 1 == 1]) == table[idx])
    })
}

/// Replaces each complete 4-clause AND/OR/NAND/NOR group by its 3-clause
/// implication form, in place of the group's first clause. Other clauses keep
/// their order.
pub fn reencode_option2(cnf: &Cnf) -> Cnf {
    let mut replacement: HashMap<usize, Vec<Clause>> = HashMap::new();
    let mut dropped = vec![false; cnf.num_clauses()];
    for g in detect_gate_groups(cnf) {
        let (Some(kind), Some(out)) = (g.kind, g.output) else {
            continue;
        };
        if !kind.has_option2() || g.clause_ids.len() != 4 {
            continue;
        }
        let distinct: std::collections::HashSet<Vec<Literal>> = g
            .clause_ids
            .iter()
            .map(|&i| cnf.clauses()[i].lit_set())
            .collect();
        if distinct.len() != 4 {
            continue;
        }
        let ins: Vec<u32> = g.var_set.iter().copied().filter(|&v| v != out).collect();
        let clauses = crate::circuit::option2_clauses(kind, &ins, out).expect("AND-type gate");
        for &i in &g.clause_ids {
            dropped[i] = true;
        }
        replacement.insert(g.clause_ids[0], clauses);
    }
    if replacement.is_empty() {
        return cnf.with_clauses(cnf.clauses().to_vec());
    }
    let mut out = Vec::with_capacity(cnf.num_clauses());
    for (i, c) in cnf.clauses().iter().enumerate() {
        if let Some(rep) = replacement.remove(&i) {
            out.extend(rep);
        } else if !dropped[i] {
            out.push(c.clone());
        }
    }
    cnf.with_clauses(out)
}
