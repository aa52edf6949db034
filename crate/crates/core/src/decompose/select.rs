use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Vig;
use crate::cnf::Cnf;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Bfs,
    /// Depth-first; the lowest-degree unvisited neighbor is explored first.
    #[default]
    Dfs,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Bfs => "bfs",
            Strategy::Dfs => "dfs",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" => Ok(Strategy::Bfs),
            "dfs" => Ok(Strategy::Dfs),
            _ => Err(format!("unknown strategy `{s}` (expected bfs or dfs)")),
        }
    }
}

/// Cooldown bookkeeping: a variable selected `window` iterations in a row
/// is kept out of the next `window` selections unless nothing else is left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterState {
    window: usize,
    streak: Vec<usize>,
    cooldown: Vec<usize>,
}

impl FilterState {
    pub fn new(num_vars: u32, window: usize) -> Self {
        FilterState {
            window,
            streak: vec![0; num_vars as usize + 1],
            cooldown: vec![0; num_vars as usize + 1],
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_cooling(&self, v: u32) -> bool {
        self.cooldown[v as usize] > 0
    }

    pub fn streak(&self, v: u32) -> usize {
        self.streak[v as usize]
    }

    /// Records one iteration's selection (sorted ascending).
    pub fn update(&mut self, selected: &[u32]) {
        for c in &mut self.cooldown {
            *c = c.saturating_sub(1);
        }
        let mut next = selected.iter().peekable();
        for v in 1..self.streak.len() as u32 {
            if next.peek() == Some(&&v) {
                next.next();
                self.streak[v as usize] += 1;
                if self.window > 0 && self.streak[v as usize] >= self.window {
                    self.cooldown[v as usize] = self.window;
                    self.streak[v as usize] = 0;
                }
            } else {
                self.streak[v as usize] = 0;
            }
        }
    }
}

/// Spins needed for a selection: one per variable plus one ancilla per
/// 3-literal clause whose variables are all selected.
pub fn spin_cost(cnf: &Cnf, selected: &[u32]) -> usize {
    let mut inside = vec![false; cnf.num_vars() as usize + 1];
    for &v in selected {
        inside[v as usize] = true;
    }
    let ancillas = cnf
        .clauses()
        .iter()
        .filter(|c| c.width() == 3 && c.lits().iter().all(|l| inside[l.var() as usize]))
        .count();
    inside.iter().filter(|&&b| b).count() + ancillas
}

/// Incremental spin cost during a traversal.
struct CostTracker<'a> {
    cnf: &'a Cnf,
    /// 3-literal clause ids per variable.
    wide: Vec<Vec<usize>>,
    inside: Vec<bool>,
    cost: usize,
}

impl<'a> CostTracker<'a> {
    fn new(cnf: &'a Cnf) -> Self {
        let mut wide = vec![Vec::new(); cnf.num_vars() as usize + 1];
        for (i, c) in cnf.clauses().iter().enumerate() {
            if c.width() == 3 {
                for v in c.var_set() {
                    wide[v as usize].push(i);
                }
            }
        }
        CostTracker {
            cnf,
            wide,
            inside: vec![false; cnf.num_vars() as usize + 1],
            cost: 0,
        }
    }

    fn added_cost(&self, v: u32) -> usize {
        let closes = self.wide[v as usize]
            .iter()
            .filter(|&&i| {
                self.cnf.clauses()[i]
                    .lits()
                    .iter()
                    .all(|l| l.var() == v || self.inside[l.var() as usize])
            })
            .count();
        1 + closes
    }

    fn add(&mut self, v: u32, added: usize) {
        self.inside[v as usize] = true;
        self.cost += added;
    }
}

/// Grows a selection from `start` over the interaction graph until the spin
/// budget is exhausted. Variables whose addition would exceed the budget are
/// skipped. An empty frontier restarts from a random unvisited variable;
/// cooled-down variables are taken only after everything else. Returns the
/// selection sorted ascending.
pub fn select<R: Rng>(
    vig: &Vig,
    cnf: &Cnf,
    budget: usize,
    start: u32,
    filter: &FilterState,
    strategy: Strategy,
    rng: &mut R,
) -> Vec<u32> {
    let n = vig.num_vars() as usize;
    let mut tracker = CostTracker::new(cnf);
    let mut visited = vec![false; n + 1];
    let mut frontier: VecDeque<u32> = VecDeque::new();
    let mut cooled: Vec<u32> = Vec::new();
    let mut selected = Vec::new();

    let mut restarts: Vec<u32> = vig.nodes().filter(|&v| !filter.is_cooling(v)).collect();
    restarts.shuffle(rng);
    // DFS marks variables when they are expanded, so a variable first seen
    // near the start can still be reached again along a longer path.
    let mark_on_pop = strategy == Strategy::Dfs;
    if !mark_on_pop {
        visited[start as usize] = true;
    }
    frontier.push_back(start);

    while tracker.cost < budget {
        let next = match strategy {
            Strategy::Bfs => frontier.pop_front(),
            Strategy::Dfs => frontier.pop_back(),
        };
        let v = match next {
            Some(v) if mark_on_pop && visited[v as usize] => continue,
            Some(v) if filter.is_cooling(v) && v != start => {
                cooled.push(v);
                continue;
            }
            Some(v) => v,
            None => match take_unvisited(&mut restarts, &mut visited) {
                Some(v) => v,
                // frontier and restarts exhausted: cooled-down variables
                None => match cooled.pop() {
                    Some(v) if mark_on_pop && visited[v as usize] => continue,
                    Some(v) => v,
                    None => break,
                },
            },
        };
        visited[v as usize] = true;
        let added = tracker.added_cost(v);
        if tracker.cost + added > budget {
            continue;
        }
        tracker.add(v, added);
        selected.push(v);

        let mut fresh: Vec<u32> = vig
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| !visited[u as usize])
            .collect();
        fresh.shuffle(rng);
        if strategy == Strategy::Dfs {
            // pushed last = popped first, so highest degree goes in first
            fresh.sort_by_key(|&u| std::cmp::Reverse(vig.degree(u)));
        }
        for u in fresh {
            if !mark_on_pop {
                visited[u as usize] = true;
            }
            frontier.push_back(u);
        }
    }
    selected.sort_unstable();
    selected
}

fn take_unvisited(pool: &mut Vec<u32>, visited: &mut [bool]) -> Option<u32> {
    while let Some(v) = pool.pop() {
        if !visited[v as usize] {
            visited[v as usize] = true;
            return Some(v);
        }
    }
    None
}

pub fn select_bfs<R: Rng>(
    vig: &Vig,
    cnf: &Cnf,
    budget: usize,
    start: u32,
    filter: &FilterState,
    rng: &mut R,
) -> Vec<u32> {
    select(vig, cnf, budget, start, filter, Strategy::Bfs, rng)
}

pub fn select_dfs<R: Rng>(
    vig: &Vig,
    cnf: &Cnf,
    budget: usize,
    start: u32,
    filter: &FilterState,
    rng: &mut R,
) -> Vec<u32> {
    select(vig, cnf, budget, start, filter, Strategy::Dfs, rng)
}
