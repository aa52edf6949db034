//! CNF to QUBO penalty models, QUBO to Ising conversion, and scaling to the
//! integer coefficient range of a small all-to-all chip.
//!
//! QUBO index `i` stands for CNF variable `i + 1`; ancillas follow the
//! variables in clause order. Spins use `+1`/`-1` with `x = (1 + s) / 2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, Cnf};
use crate::error::QuboError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    pub num_vars: usize,
    pub linear: BTreeMap<usize, f64>,
    /// Keys satisfy `i < j`.
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    /// Number of leading indices that are CNF variables (index `i` is
    /// variable `i + 1`).
    pub num_source_vars: usize,
    /// `(clause index, qubo index)` for every ancilla.
    pub ancillas: Vec<(usize, usize)>,
}

impl QuboModel {
    pub fn new(num_vars: usize) -> Self {
        QuboModel {
            num_vars,
            num_source_vars: num_vars,
            ..Default::default()
        }
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        if c != 0.0 {
            *self.linear.entry(i).or_insert(0.0) += c;
        }
    }

    /// `x_i x_j`; the diagonal folds into the linear term since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        if i == j {
            self.add_linear(i, c);
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
    }

    /// Adds `c · Π f_k` where each factor is `x_i` (`true`) or `1 - x_i`.
    fn add_product(&mut self, c: f64, factors: &[(usize, bool)]) {
        // f = a + b·x
        let ab = |pos: bool| if pos { (0.0, 1.0) } else { (1.0, -1.0) };
        match factors {
            [] => self.offset += c,
            [(i, p)] => {
                let (a, b) = ab(*p);
                self.offset += c * a;
                self.add_linear(*i, c * b);
            }
            [(i, p), (j, q)] => {
                let (ai, bi) = ab(*p);
                let (aj, bj) = ab(*q);
                self.offset += c * ai * aj;
                self.add_linear(*j, c * ai * bj);
                self.add_linear(*i, c * bi * aj);
                self.add_quadratic(*i, *j, c * bi * bj);
            }
            _ => unreachable!("gadgets are at most quadratic"),
        }
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i])
            .map(|(_, c)| c)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] && x[j])
            .map(|(_, c)| c)
            .sum();
        self.offset + lin + quad
    }

    pub fn num_ancillas(&self) -> usize {
        self.ancillas.len()
    }

    /// Sparse `i j value` lines; diagonal entries carry the linear terms.
    /// The constant offset is written as a leading `#` comment.
    pub fn to_triplets(&self) -> String {
        let mut out = format!("# offset {}\n", self.offset);
        let mut entries: BTreeMap<(usize, usize), f64> = self.quadratic.clone();
        for (&i, &c) in &self.linear {
            entries.insert((i, i), c);
        }
        for ((i, j), c) in entries {
            let _ = writeln!(out, "{i} {j} {c}");
        }
        out
    }
}

/// Penalty terms for one clause. Width 3 allocates an ancilla `w` via
/// `next_index` and encodes `w ↔ (y1 ∨ y2)` plus `(w ∨ y3)`:
/// `1 + y1 + y2 - y3 + y1·y2 - 2w·y1 - 2w·y2 + w·y3`, with `y` the literal
/// values. Minimised over `w` this is 0 on satisfying rows and 1 on the
/// falsifying row.
pub fn clause_gadget(
    model: &mut QuboModel,
    clause_index: usize,
    clause: &Clause,
    next_index: &mut usize,
) -> Result<(), QuboError> {
    let lits: Vec<(usize, bool)> = clause
        .lits()
        .iter()
        .map(|l| (l.var() as usize - 1, l.is_positive()))
        .collect();
    match lits.as_slice() {
        // 1 - y
        [y] => {
            model.add_product(1.0, &[]);
            model.add_product(-1.0, &[*y]);
        }
        // (1 - y1)(1 - y2)
        [y1, y2] => {
            model.add_product(1.0, &[(y1.0, !y1.1), (y2.0, !y2.1)]);
        }
        [y1, y2, y3] => {
            let w = *next_index;
            *next_index += 1;
            model.num_vars = model.num_vars.max(w + 1);
            model.ancillas.push((clause_index, w));
            let wp = (w, true);
            model.add_product(1.0, &[]);
            model.add_product(1.0, &[*y1]);
            model.add_product(1.0, &[*y2]);
            model.add_product(-1.0, &[*y3]);
            model.add_product(1.0, &[*y1, *y2]);
            model.add_product(-2.0, &[wp, *y1]);
            model.add_product(-2.0, &[wp, *y2]);
            model.add_product(1.0, &[wp, *y3]);
        }
        _ => {
            return Err(QuboError::UnsupportedWidth {
                clause: clause_index,
                width: lits.len(),
            })
        }
    }
    Ok(())
}

/// Sum of clause gadgets. Uses `n + m₃` variables; the minimum energy equals
/// the minimum number of falsified clauses.
pub fn cnf_to_qubo(cnf: &Cnf) -> Result<QuboModel, QuboError> {
    let n = cnf.num_vars() as usize;
    let mut model = QuboModel::new(n);
    let mut next = n;
    for (idx, c) in cnf.clauses().iter().enumerate() {
        clause_gadget(&mut model, idx, c, &mut next)?;
    }
    model.num_vars = next;
    model.linear.retain(|_, c| *c != 0.0);
    model.quadratic.retain(|_, c| *c != 0.0);
    Ok(model)
}

/// Spin count of [`cnf_to_qubo`] without building it.
pub fn qubo_size(cnf: &Cnf) -> usize {
    cnf.num_vars() as usize + cnf.clauses().iter().filter(|c| c.width() == 3).count()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub num_spins: usize,
    pub h: BTreeMap<usize, f64>,
    /// Keys satisfy `i < j`.
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    /// `Σ J_ij s_i s_j + Σ h_i s_i + offset` for spins in `{-1, +1}`.
    pub fn energy(&self, s: &[i8]) -> f64 {
        let field: f64 = self.h.iter().map(|(&i, &h)| h * s[i] as f64).sum();
        let coupling: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &j)| j * (s[a] * s[b]) as f64)
            .sum();
        self.offset + field + coupling
    }

    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.h.values().chain(self.j.values()).copied()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients().fold(0.0, |m, c| m.max(c.abs()))
    }
}

pub fn spins_to_bits(s: &[i8]) -> Vec<bool> {
    s.iter().map(|&v| v > 0).collect()
}

pub fn bits_to_spins(x: &[bool]) -> Vec<i8> {
    x.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

/// Substitutes `x = (1 + s) / 2`; energies agree on every assignment.
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let mut m = IsingModel {
        num_spins: q.num_vars,
        offset: q.offset,
        ..Default::default()
    };
    for (&i, &a) in &q.linear {
        *m.h.entry(i).or_insert(0.0) += a / 2.0;
        m.offset += a / 2.0;
    }
    for (&(i, j), &c) in &q.quadratic {
        *m.j.entry((i, j)).or_insert(0.0) += c / 4.0;
        *m.h.entry(i).or_insert(0.0) += c / 4.0;
        *m.h.entry(j).or_insert(0.0) += c / 4.0;
        m.offset += c / 4.0;
    }
    m.h.retain(|_, c| *c != 0.0);
    m.j.retain(|_, c| *c != 0.0);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChipProfile {
    pub spin_budget: usize,
    pub coeff_min: i32,
    pub coeff_max: i32,
    pub all_to_all: bool,
}

impl Default for ChipProfile {
    fn default() -> Self {
        ChipProfile {
            spin_budget: 45,
            coeff_min: -14,
            coeff_max: 14,
            all_to_all: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub scale: f64,
    /// Largest `|rounded - scaled| / |scaled|` over nonzero coefficients.
    pub max_relative_error: f64,
    /// Distinct coefficients became equal, or a nonzero one became 0.
    pub levels_collapsed: bool,
    pub clamped: bool,
}

/// Maps the largest coefficient magnitude to `coeff_max`, rounds to the
/// nearest integer (ties away from zero) and clamps. Models that already
/// have integer coefficients in range are returned unchanged.
pub fn scale_to_chip(
    m: &IsingModel,
    profile: &ChipProfile,
) -> Result<(IsingModel, ScaleReport), QuboError> {
    if m.num_spins > profile.spin_budget {
        return Err(QuboError::TooManySpins {
            spins: m.num_spins,
            budget: profile.spin_budget,
        });
    }
    let (lo, hi) = (profile.coeff_min as f64, profile.coeff_max as f64);
    let fits = m
        .coefficients()
        .all(|c| c.fract() == 0.0 && (lo..=hi).contains(&c));
    let max = m.max_abs_coefficient();
    if fits || max == 0.0 {
        return Ok((
            m.clone(),
            ScaleReport {
                scale: 1.0,
                max_relative_error: 0.0,
                levels_collapsed: false,
                clamped: false,
            },
        ));
    }
    let scale = hi / max;
    let mut report = ScaleReport {
        scale,
        max_relative_error: 0.0,
        levels_collapsed: false,
        clamped: false,
    };
    let mut seen: BTreeMap<i64, BTreeSet<u64>> = BTreeMap::new();
    let mut convert = |c: f64| -> f64 {
        let scaled = c * scale;
        let mut r = scaled.round();
        if r < lo || r > hi {
            report.clamped = true;
            r = r.clamp(lo, hi);
        }
        if scaled != 0.0 {
            report.max_relative_error = report
                .max_relative_error
                .max((r - scaled).abs() / scaled.abs());
            if r == 0.0 {
                report.levels_collapsed = true;
            }
        }
        seen.entry(r as i64).or_default().insert(c.to_bits());
        r
    };
    let h: BTreeMap<usize, f64> = m.h.iter().map(|(&i, &c)| (i, convert(c))).collect();
    let j: BTreeMap<(usize, usize), f64> = m.j.iter().map(|(&k, &c)| (k, convert(c))).collect();
    if seen.values().any(|orig| orig.len() > 1) {
        report.levels_collapsed = true;
    }
    Ok((
        IsingModel {
            num_spins: m.num_spins,
            h,
            j,
            offset: m.offset * scale,
        },
        report,
    ))
}
