use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::propagate::unsat_like;
use super::ConditionList;
use crate::cnf::{Clause, Cnf, Literal};

/// Counters from one conditioning call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionStats {
    /// Full passes over the clause list (always 2).
    pub traversals: u32,
    pub not_pairs: usize,
    pub buffer_pairs: usize,
    /// Two clauses sharing one literal, `(l∨x)(l∨¬x)`, turned into `(l)`.
    pub resolved_pairs: usize,
    /// Three distinct 2-clauses over one pair, turned into two units.
    pub triples: usize,
    pub relations_added: usize,
    pub unsat: bool,
}

/// Literal patterns of 2-clauses over (lo, hi): bit `2*lo_pos + hi_pos`
/// where `pos` = literal is positive.
#[derive(Default)]
struct PairGroup {
    patterns: u8,
}

/// Union-find over variables with the parity of each node to its parent
/// (`false` = same value).
struct SignedForest {
    parent: Vec<u32>,
    odd: Vec<bool>,
    has_children: Vec<bool>,
}

impl SignedForest {
    fn find(&mut self, v: u32) -> (u32, bool) {
        let p = self.parent[v as usize];
        if p == v {
            return (v, false);
        }
        let (root, parity) = self.find(p);
        let total = parity ^ self.odd[v as usize];
        self.parent[v as usize] = root;
        self.odd[v as usize] = total;
        (root, total)
    }

    /// Records `a == b` (`odd = false`) or `a == ¬b`. Returns false on a
    /// contradiction with earlier relations.
    fn union(&mut self, a: u32, b: u32, odd: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == odd;
        }
        // An existing master keeps its role; otherwise the lower index wins.
        let ma = self.has_children[ra as usize];
        let mb = self.has_children[rb as usize];
        let (root, child) = match (ma, mb) {
            (true, false) => (ra, rb),
            (false, true) => (rb, ra),
            _ => (ra.min(rb), ra.max(rb)),
        };
        self.parent[child as usize] = root;
        self.odd[child as usize] = pa ^ pb ^ odd;
        self.has_children[root as usize] = true;
        true
    }
}

/// Two-pass 2SAT conditioning.
///
/// The first traversal groups 2-literal clauses by variable pair and
/// classifies each group: `(a∨b)(¬a∨¬b)` is a NOT pair, `(a∨¬b)(¬a∨b)` a
/// BUFFER pair, `(a∨b)(a∨¬b)` forces `(a)`, three distinct clauses force
/// two units and all four are contradictory. NOT/BUFFER relations are merged with signs, chaining
/// through variables already acting as masters. The second traversal drops
/// the classified groups, rewrites every remaining literal of a replaced
/// variable in terms of its master, and appends the queued units.
pub fn condition_2sat(cnf: &Cnf, cond: &mut ConditionList) -> (Cnf, ConditionStats) {
    let mut stats = ConditionStats::default();
    if cnf.is_unsat() {
        stats.unsat = true;
        return (unsat_like(cnf), stats);
    }
    let n = cnf.num_vars();

    // traversal 1
    stats.traversals += 1;
    let mut groups: HashMap<(u32, u32), PairGroup> = HashMap::new();
    let mut first_seen: Vec<(u32, u32)> = Vec::new();
    for c in cnf.clauses() {
        if let Some((key, bit)) = pair_pattern(c) {
            let g = groups.entry(key).or_insert_with(|| {
                first_seen.push(key);
                PairGroup::default()
            });
            g.patterns |= bit;
        }
    }

    let mut forest = SignedForest {
        parent: (0..=n).collect(),
        odd: vec![false; n as usize + 1],
        has_children: (0..=n).map(|v| v > 0 && cond.is_master(v)).collect(),
    };
    let mut consumed: HashMap<(u32, u32), ()> = HashMap::new();
    let mut units: Vec<Literal> = Vec::new();
    for key in first_seen {
        let (lo, hi) = key;
        let patterns = groups[&key].patterns;
        let ok = match patterns.count_ones() {
            2 if patterns == 0b1001 => {
                // (¬lo∨¬hi)(lo∨hi)
                stats.not_pairs += 1;
                forest.union(lo, hi, true)
            }
            2 if patterns == 0b0110 => {
                stats.buffer_pairs += 1;
                forest.union(lo, hi, false)
            }
            2 => {
                stats.resolved_pairs += 1;
                let b1 = patterns.trailing_zeros() as u8;
                let b2 = 7 - patterns.leading_zeros() as u8;
                if b1 ^ b2 == 1 {
                    // same `lo` literal in both clauses
                    units.push(Literal::new(lo, b1 >> 1 & 1 == 1));
                } else {
                    units.push(Literal::new(hi, b1 & 1 == 1));
                }
                true
            }
            3 => {
                stats.triples += 1;
                let missing = (0..4u8).find(|b| patterns >> b & 1 == 0).unwrap();
                // The only model falsifies the missing clause's literals.
                units.push(Literal::new(lo, missing >> 1 & 1 == 0));
                units.push(Literal::new(hi, missing & 1 == 0));
                true
            }
            4 => false,
            _ => continue,
        };
        if !ok {
            stats.unsat = true;
            stats.traversals += 1;
            return (unsat_like(cnf), stats);
        }
        consumed.insert(key, ());
    }

    let mut rewrite: Vec<Option<(u32, bool)>> = vec![None; n as usize + 1];
    for v in 1..=n {
        let (root, odd) = forest.find(v);
        if root != v {
            rewrite[v as usize] = Some((root, odd));
            cond.add_relation(v, root, !odd);
            stats.relations_added += 1;
        }
    }
    if stats.relations_added > 0 {
        cond.collapse_chains();
    }
    let map = |l: Literal| match rewrite[l.var() as usize] {
        Some((root, odd)) => Literal::new(root, l.is_positive() != odd),
        None => l,
    };

    // traversal 2
    stats.traversals += 1;
    let mut clauses = Vec::with_capacity(cnf.num_clauses() + units.len());
    for c in cnf.clauses() {
        if let Some((key, _)) = pair_pattern(c) {
            if consumed.contains_key(&key) {
                continue;
            }
        }
        clauses.push(c.lits().iter().map(|&l| map(l)).collect::<Clause>());
    }
    clauses.extend(units.into_iter().map(|l| Clause::unit(map(l))));
    (cnf.with_clauses(clauses), stats)
}

/// For a 2-literal clause over two distinct variables, the ordered pair and
/// its pattern bit.
fn pair_pattern(c: &Clause) -> Option<((u32, u32), u8)> {
    let [x, y] = c.lits() else {
        return None;
    };
    if x.var() == y.var() {
        return None;
    }
    let (lo, hi) = if x.var() < y.var() { (x, y) } else { (y, x) };
    let bit = 1u8 << ((lo.is_positive() as u8) << 1 | hi.is_positive() as u8);
    Some(((lo.var(), hi.var()), bit))
}
