//! Random 3SAT with a controlled backbone size, standing in for the
//! backbone benchmark family when its files are not available.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use varisat::{ExtendFormula, Lit, Solver};

use crate::cnf::{Clause, Cnf, Literal};
use crate::error::HarnessError;

pub const GRID_VARS: u32 = 100;
pub const GRID_CLAUSES: [usize; 8] = [403, 411, 418, 423, 429, 435, 441, 449];
pub const GRID_BACKBONE_PCT: [u32; 5] = [10, 30, 50, 70, 90];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackboneSpec {
    pub n: u32,
    pub m: usize,
    /// Backbone size as a percentage of `n`.
    pub backbone_pct: u32,
    /// Accept sizes outside the standard grid.
    #[serde(default)]
    pub force: bool,
}

impl BackboneSpec {
    pub fn new(n: u32, m: usize, backbone_pct: u32) -> Self {
        BackboneSpec {
            n,
            m,
            backbone_pct,
            force: false,
        }
    }

    pub fn forced(n: u32, m: usize, backbone_pct: u32) -> Self {
        BackboneSpec {
            force: true,
            ..BackboneSpec::new(n, m, backbone_pct)
        }
    }

    /// All grid points.
    pub fn grid() -> Vec<BackboneSpec> {
        GRID_CLAUSES
            .iter()
            .flat_map(|&m| {
                GRID_BACKBONE_PCT
                    .iter()
                    .map(move |&b| BackboneSpec::new(GRID_VARS, m, b))
            })
            .collect()
    }

    pub fn backbone_size(&self) -> usize {
        (self.backbone_pct as usize * self.n as usize).div_ceil(100)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let on_grid = self.n == GRID_VARS
            && GRID_CLAUSES.contains(&self.m)
            && GRID_BACKBONE_PCT.contains(&self.backbone_pct);
        let sane = self.n >= 3 && self.backbone_pct <= 100;
        if (on_grid || self.force) && sane {
            Ok(())
        } else {
            Err(HarnessError::OffGrid {
                n: self.n,
                m: self.m,
                pct: self.backbone_pct,
            })
        }
    }
}

/// Candidate formulas drawn before giving up on a spec.
const MAX_CANDIDATES: usize = 200_000;

/// Draws uniform random 3SAT formulas with `m` clauses over `n` variables
/// until one is satisfiable with a backbone of exactly the requested size.
pub fn generate_backbone_instance(spec: &BackboneSpec, seed: u64) -> Result<Cnf, HarnessError> {
    spec.validate()?;
    let n = spec.n as usize;
    let want = spec.backbone_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_CANDIDATES {
        let clauses: Vec<Clause> = (0..spec.m).map(|_| random_clause(&mut rng, n)).collect();
        if backbone_of(n, &clauses).is_some_and(|b| b.len() == want) {
            let cnf = Cnf::new(spec.n, clauses).expect("variables in range");
            return Ok(cnf.with_provenance(format!(
                "random 3sat with backbone n={} m={} b={}% seed={seed}",
                spec.n, spec.m, spec.backbone_pct
            )));
        }
    }
    Err(HarnessError::BackboneInfeasible(MAX_CANDIDATES))
}

/// Backbone literals of a formula, or `None` if it is unsatisfiable.
pub fn exact_backbone(cnf: &Cnf) -> Option<Vec<Literal>> {
    backbone_of(cnf.num_vars() as usize, cnf.clauses())
}

fn backbone_of(n: usize, clauses: &[Clause]) -> Option<Vec<Literal>> {
    let mut solver = Solver::new();
    for c in clauses {
        let lits: Vec<Lit> = c.lits().iter().map(|&l| to_lit(l)).collect();
        solver.add_clause(&lits);
    }
    let model = solve_model(&mut solver, n, &[])?;
    // every model disagreeing with the first one rules out the flipped variables
    let mut candidate = vec![true; n];
    let mut found = Vec::new();
    for v in 0..n {
        if !candidate[v] {
            continue;
        }
        let keep = Literal::new(v as u32 + 1, model[v]);
        match solve_model(&mut solver, n, &[to_lit(!keep)]) {
            Some(other) => {
                for (c, (a, b)) in candidate.iter_mut().zip(model.iter().zip(&other)) {
                    if a != b {
                        *c = false;
                    }
                }
            }
            None => found.push(keep),
        }
    }
    Some(found)
}

fn random_clause<R: Rng>(rng: &mut R, n: usize) -> Clause {
    sample(rng, n, 3)
        .into_iter()
        .map(|i| Literal::new(i as u32 + 1, rng.gen_bool(0.5)))
        .collect()
}

fn to_lit(l: Literal) -> Lit {
    Lit::from_dimacs(l.to_dimacs() as isize)
}

fn solve_model(solver: &mut Solver, n: usize, assume: &[Lit]) -> Option<Vec<bool>> {
    solver.assume(assume);
    if !solver.solve().unwrap_or(false) {
        return None;
    }
    let mut values = vec![false; n];
    for l in solver.model()? {
        values[l.index()] = l.is_positive();
    }
    Some(values)
}

/// Whether `cnf` has a model, via a CDCL solver.
pub fn is_satisfiable(cnf: &Cnf) -> bool {
    let mut solver = Solver::new();
    for c in cnf.clauses() {
        let lits: Vec<Lit> = c.lits().iter().map(|&l| to_lit(l)).collect();
        solver.add_clause(&lits);
    }
    solver.solve().unwrap_or(false)
}
