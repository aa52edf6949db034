//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so the verdict lines are always printed. The
//! solver-heavy criteria (5 to 7) run on a reduced instance set by default;
//! set `ISAT_ACCEPTANCE_SCALE=full` for the complete sweeps. The process
//! fails only on the exact criteria and on the exact parts of the ladder
//! criterion; statistical and reference-value comparisons are reported.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::time::Instant;

use common::{ladder_models, original_models, random_3sat};
use ising_sat::circuit::{
    option1_clauses, option2_clauses, semiprime_catalog, semiprime_instance, EncodingOption,
    GateKind,
};
use ising_sat::cnf::{brute_force_solutions, Clause, Cnf, Literal};
use ising_sat::decompose::Strategy;
use ising_sat::harness::{
    compute_tts, read_runs, run_experiment, BackboneSet, ExperimentConfig, InstanceSet,
    RunRecord, RunSettings,
};
use ising_sat::preprocess::{run_ladder_with, LadderConfig, MAX_LEVEL};
use ising_sat::qubo::{cnf_to_qubo, qubo_size};
use ising_sat::solver::Backend;

struct Verdict {
    pass: bool,
    /// Failing this criterion fails the process.
    hard: bool,
    detail: String,
}

fn line(id: u8, name: &str, v: &Verdict, secs: f64) {
    println!(
        "[{}] {id}. {name}: {} ({secs:.1} s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail
    );
}

fn full_scale() -> bool {
    std::env::var("ISAT_ACCEPTANCE_SCALE").is_ok_and(|s| s == "full")
}

fn all_patterns(width: usize) -> impl Iterator<Item = Clause> {
    (0..1u32 << width).map(move |signs| {
        (0..width)
            .map(|i| Literal::new(i as u32 + 1, signs >> i & 1 == 1))
            .collect()
    })
}

fn gadget_exhaustiveness() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for width in 1..=3 {
        for clause in all_patterns(width) {
            let cnf = Cnf::new(width as u32, vec![clause.clone()]).unwrap();
            let q = cnf_to_qubo(&cnf).unwrap();
            let extra = q.num_vars - width;
            for m in 0..1u32 << width {
                let x: Vec<bool> = (0..width).map(|i| m >> i & 1 == 1).collect();
                let penalty = (0..1u32 << extra)
                    .map(|a| {
                        let mut full = x.clone();
                        full.extend((0..extra).map(|i| a >> i & 1 == 1));
                        q.energy(&full)
                    })
                    .fold(f64::INFINITY, f64::min);
                let sat = clause.is_satisfied_by(|v| x[v as usize - 1]);
                checked += 1;
                if (sat && penalty != 0.0) || (!sat && penalty < 1.0) {
                    bad.push(format!("{clause:?} at {x:?}: {penalty}"));
                }
            }
        }
    }
    Verdict {
        pass: bad.is_empty(),
        hard: true,
        detail: format!("{checked} clause/assignment pairs, {} violations {bad:?}", bad.len()),
    }
}

fn encoding_equivalence() -> Verdict {
    let models = |clauses: Vec<Clause>| {
        brute_force_solutions(&Cnf::new(3, clauses).unwrap(), 26)
            .unwrap()
            .masks
    };
    let mut mismatched = Vec::new();
    for kind in [GateKind::Or, GateKind::And, GateKind::Nand, GateKind::Nor] {
        let one = models(option1_clauses(kind, &[1, 2], 3));
        let two = models(option2_clauses(kind, &[1, 2], 3).unwrap());
        if one != two {
            mismatched.push(format!("{kind:?}"));
        }
    }
    let size = |clauses| qubo_size(&Cnf::new(3, clauses).unwrap());
    let or1 = size(option1_clauses(GateKind::Or, &[1, 2], 3));
    let or2 = size(option2_clauses(GateKind::Or, &[1, 2], 3).unwrap());
    Verdict {
        pass: mismatched.is_empty() && or1 == 7 && or2 == 4,
        hard: true,
        detail: format!(
            "OR/AND/NAND/NOR solution sets {}; OR gate spins {or1} -> {or2}",
            if mismatched.is_empty() {
                "identical".to_string()
            } else {
                format!("differ for {mismatched:?}")
            }
        ),
    }
}

fn preprocessing_soundness() -> Verdict {
    let mut formulas: Vec<(String, Cnf)> = (0..200u64)
        .map(|k| {
            let n = 8 + (k % 17) as u32;
            let ratio = 3.0 + 0.25 * (k % 7) as f64;
            (format!("random-{k}"), random_3sat(n, (ratio * n as f64) as usize, k))
        })
        .collect();
    for bits in [4, 5] {
        for e in semiprime_catalog(bits).unwrap() {
            let cnf = semiprime_instance(&e, EncodingOption::Option1);
            formulas.push((format!("semiprime-{}", e.semiprime), cnf));
        }
    }
    let mut failures = Vec::new();
    let mut with_pure = Vec::new();
    let mut runs = 0;
    for (name, cnf) in &formulas {
        let original = original_models(cnf);
        for level in 0..=MAX_LEVEL {
            runs += 1;
            if ladder_models(cnf, level, false).as_ref() != Some(&original) {
                failures.push(format!("{name} level {level}"));
            }
            // pure-literal elimination drops models but must keep a model
            // whenever one exists
            match ladder_models(cnf, level, true) {
                Some(m) if m.is_subset(&original) && m.is_empty() == original.is_empty() => {}
                _ => with_pure.push(format!("{name} level {level}")),
            }
        }
    }
    let sat = formulas.iter().filter(|(_, c)| !original_models(c).is_empty()).count();
    Verdict {
        pass: failures.is_empty() && with_pure.is_empty(),
        hard: true,
        detail: format!(
            "{} formulas ({sat} satisfiable) x {} levels: {runs} ladder runs bijective except {failures:?}; \
             with pure literals, sound and satisfiability-preserving except {with_pure:?}",
            formulas.len(),
            MAX_LEVEL + 1
        ),
    }
}

/// Published average variable counts after each level, with the
/// subsumption-only step between levels 5 and 6.
const REFERENCE_LADDER: [(usize, [f64; 9]); 6] = [
    (4, [21.0, 21.0, 16.0, 7.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    (5, [37.0, 37.0, 29.0, 7.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    (7, [76.0, 76.0, 64.0, 41.0, 36.0, 36.0, 36.0, 35.0, 8.0]),
    (8, [94.0, 94.0, 81.0, 49.0, 45.0, 45.0, 45.0, 44.0, 7.0]),
    (10, [162.0, 162.0, 145.0, 90.0, 83.0, 83.0, 83.0, 82.0, 40.0]),
    (11, [190.0, 190.0, 172.0, 123.0, 119.0, 119.0, 119.0, 118.0, 73.0]),
];

const STEP_NAMES: [&str; 9] = ["0", "1", "2", "3", "4", "5", "6-subsumption", "6", "7"];

/// Seeds averaged over at the branching level.
const BRANCH_SEEDS: u64 = 10;

fn ladder_shape() -> Verdict {
    let mut exact_ok = true;
    let mut within = true;
    let mut notes = Vec::new();
    for (bits, reference) in REFERENCE_LADDER {
        let cnfs: Vec<Cnf> = semiprime_catalog(bits)
            .unwrap()
            .iter()
            .map(|e| semiprime_instance(e, EncodingOption::Option1))
            .collect();
        let steps: [(u8, bool); 9] = [
            (0, true),
            (1, true),
            (2, true),
            (3, true),
            (4, true),
            (5, true),
            (6, false),
            (6, true),
            (7, true),
        ];
        let avg: Vec<f64> = steps
            .iter()
            .map(|&(level, pure_literal)| {
                let seeds = if level == 7 { BRANCH_SEEDS } else { 1 };
                let mut total = 0usize;
                for cnf in &cnfs {
                    for seed in 0..seeds {
                        let cfg = LadderConfig {
                            level,
                            seed,
                            pure_literal,
                            ..LadderConfig::default()
                        };
                        total += run_ladder_with(cnf, &cfg).remaining_vars();
                    }
                }
                total as f64 / (cnfs.len() as u64 * seeds) as f64
            })
            .collect();
        if bits <= 5 {
            let zero = avg[4..].iter().all(|&v| v == 0.0);
            exact_ok &= zero;
            notes.push(format!(
                "{bits}-bit zero from level 4: {}",
                if zero { "yes" } else { "NO" }
            ));
            continue;
        }
        let monotone = avg.windows(2).all(|w| w[1] <= w[0]);
        exact_ok &= monotone;
        let devs: Vec<String> = avg
            .iter()
            .zip(reference)
            .zip(STEP_NAMES)
            .map(|((&got, want), step)| {
                let dev = (got - want) / want;
                within &= dev.abs() <= 0.20;
                format!("{step}:{got:.1}/{want:.0}({:+.0}%)", 100.0 * dev)
            })
            .collect();
        notes.push(format!(
            "{bits}-bit {}monotone [{}]",
            if monotone { "" } else { "NOT " },
            devs.join(" ")
        ));
    }
    Verdict {
        pass: exact_ok && within,
        hard: !exact_ok,
        detail: format!(
            "exact parts {}; within 20% of reference at every level: {}; {}",
            if exact_ok { "hold" } else { "FAIL" },
            if within { "yes" } else { "no" },
            notes.join("; ")
        ),
    }
}

fn experiment(
    name: &str,
    instances: InstanceSet,
    levels: Vec<u8>,
    strategies: Vec<Strategy>,
    repeats: u64,
    out: &Path,
) -> Vec<RunRecord> {
    let cfg = ExperimentConfig {
        name: name.into(),
        output_dir: None,
        instances,
        levels,
        strategies,
        backends: vec![Backend::Emulator],
        repeats,
        base_seed: 0,
        settings: RunSettings::default(),
    };
    run_experiment(&cfg, out).unwrap();
    read_runs(&out.join("runs.jsonl")).unwrap()
}

fn semiprimes(bits: Vec<usize>, max_per_bits: Option<usize>) -> InstanceSet {
    InstanceSet {
        semiprime_bits: bits,
        max_per_bits,
        ..InstanceSet::default()
    }
}

fn end_to_end(out: &Path) -> Verdict {
    let large = if full_scale() { None } else { Some(2) };
    let mut runs = experiment("small", semiprimes(vec![4, 5, 7, 8], None), vec![7], vec![Strategy::Dfs], 20, out);
    runs.extend(experiment("large", semiprimes(vec![10, 11], large), vec![7], vec![Strategy::Dfs], 20, &out.join("large")));
    let unverified = runs.iter().filter(|r| r.solved && !r.verified).count();
    let mut by_family: BTreeMap<&str, BTreeMap<&str, bool>> = BTreeMap::new();
    for r in &runs {
        *by_family
            .entry(&r.family)
            .or_default()
            .entry(&r.instance)
            .or_default() |= r.solved;
    }
    let mut pass = unverified == 0;
    let mut notes = Vec::new();
    for (family, inst) in &by_family {
        let solved = inst.values().filter(|&&s| s).count();
        let pct = 100.0 * solved as f64 / inst.len() as f64;
        let bits: usize = family
            .trim_start_matches("semiprime-")
            .trim_end_matches('b')
            .parse()
            .unwrap();
        let need = if bits <= 8 { 100.0 } else { 95.0 };
        pass &= pct >= need;
        let fam_runs: Vec<RunRecord> = runs.iter().filter(|r| r.family == *family).cloned().collect();
        let tts = compute_tts(&fam_runs).unwrap();
        notes.push(format!(
            "{bits}-bit {solved}/{} instances (repeat p={:.2}, TTS {tts})",
            inst.len(),
            tts.p
        ));
    }
    Verdict {
        pass,
        hard: false,
        detail: format!(
            "{} scale, 20 repeats, {unverified} unverified successes; {}",
            if full_scale() { "full" } else { "reduced (2 instances per 10/11-bit width)" },
            notes.join("; ")
        ),
    }
}

fn dfs_vs_bfs(out: &Path) -> Verdict {
    let (per_bits, repeats) = if full_scale() { (None, 20) } else { (Some(5), 5) };
    let runs = experiment(
        "ordering",
        semiprimes(vec![10, 11], per_bits),
        vec![0, 1],
        vec![Strategy::Dfs, Strategy::Bfs],
        repeats,
        out,
    );
    let pct = |s: Strategy| {
        let sel: Vec<&RunRecord> = runs.iter().filter(|r| r.strategy == s).collect();
        100.0 * sel.iter().filter(|r| r.solved).count() as f64 / sel.len() as f64
    };
    let (dfs, bfs) = (pct(Strategy::Dfs), pct(Strategy::Bfs));
    Verdict {
        pass: dfs >= bfs,
        hard: false,
        detail: format!(
            "levels 0-1, 10/11-bit, {repeats} repeats{}: DFS {dfs:.1}% vs BFS {bfs:.1}% solved repeats",
            per_bits.map_or(String::new(), |k| format!(", {k} instances per width"))
        ),
    }
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0 + 1.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn backbone_trend(out: &Path) -> Verdict {
    let (per_cell, repeats) = if full_scale() { (20, 10) } else { (10, 5) };
    let pcts = vec![10, 30, 50, 70, 90];
    let set = InstanceSet {
        backbone: Some(BackboneSet {
            n: BACKBONE_VARS,
            m: vec![BACKBONE_CLAUSES],
            backbone_pct: pcts.clone(),
            per_cell,
            seed: 1,
            force: false,
        }),
        ..InstanceSet::default()
    };
    let runs = experiment("backbone", set, vec![BACKBONE_LEVEL], vec![Strategy::Dfs], repeats, out);
    let counts: Vec<f64> = pcts
        .iter()
        .map(|p| {
            let family = format!("backbone-m{BACKBONE_CLAUSES}-b{p}");
            runs.iter().filter(|r| r.family == family && r.solved).count() as f64
        })
        .collect();
    let b: Vec<f64> = pcts.iter().map(|&p| p as f64).collect();
    let rho = spearman(&b, &counts);
    Verdict {
        pass: rho <= -0.8,
        hard: false,
        detail: format!(
            "n={BACKBONE_VARS} m={BACKBONE_CLAUSES} level {BACKBONE_LEVEL}, {} repeats per b; \
             successful repeats {:?} for b={pcts:?}; Spearman {rho:.3}",
            per_cell as u64 * repeats,
            counts
        ),
    }
}

const BACKBONE_VARS: u32 = 100;
const BACKBONE_CLAUSES: usize = 429;
// The level-7 guess would fail outright whenever it lands on a backbone
// variable with the wrong value, which swamps the solver effect.
const BACKBONE_LEVEL: u8 = 6;

fn tts_arithmetic() -> Verdict {
    // (solved, total, mean iterations of solved repeats)
    let table: [(usize, usize, f64); 10] = [
        (20, 20, 12.0),
        (10, 20, 12.0),
        (1, 20, 12.0),
        (0, 20, 0.0),
        (19, 20, 8.0),
        (18, 20, 100.0),
        (3, 4, 1.0),
        (1, 3, 250.0),
        (99, 100, 5000.0),
        (8, 40, 33.25),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (solved, total, t) in table {
        let records: Vec<RunRecord> = (0..total)
            .map(|i| {
                let hit = i < solved;
                RunRecord {
                    instance: "case".into(),
                    family: "case".into(),
                    strategy: Strategy::Dfs,
                    level: 7,
                    backend: Backend::Emulator,
                    seed: i as u64,
                    solved: hit,
                    verified: hit,
                    closed_branch: false,
                    iterations_used: if hit { 0 } else { 5000 },
                    solver_calls: 0,
                    solver_time_ms: 0.0,
                    remaining_vars: 0,
                    num_clauses: 0,
                    best_satisfied: 0,
                    history: None,
                }
            })
            .collect();
        // spread the solved iterations so their mean is exactly t
        let mut records = records;
        let per = (t * solved as f64).round() as usize;
        if solved > 0 {
            for (k, r) in records.iter_mut().take(solved).enumerate() {
                r.iterations_used = per / solved + usize::from(k < per % solved);
            }
        }
        assert_eq!(per as f64, t * solved as f64, "mean must be representable");
        let p = solved as f64 / total as f64;
        let want = if solved == 0 {
            None
        } else if p >= 0.95 {
            Some(t)
        } else {
            Some(t * (0.05f64).ln() / (1.0 - p).ln())
        };
        let got = compute_tts(&records).unwrap().tts;
        match (got, want) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            _ => ok = false,
        }
    }
    Verdict {
        pass: ok && worst <= 1e-9,
        hard: true,
        detail: format!("10 cases, max abs error {worst:.2e}"),
    }
}

fn determinism(out: &Path) -> Verdict {
    let set = InstanceSet {
        semiprime_bits: vec![5, 8],
        max_per_bits: Some(1),
        backbone: Some(BackboneSet {
            n: 40,
            m: vec![170],
            backbone_pct: vec![50],
            per_cell: 1,
            seed: 3,
            force: true,
        }),
        ..InstanceSet::default()
    };
    let cfg = ExperimentConfig {
        name: "determinism".into(),
        output_dir: None,
        instances: set,
        levels: vec![0, 7],
        strategies: vec![Strategy::Dfs, Strategy::Bfs],
        backends: vec![Backend::Emulator, Backend::Tabu],
        repeats: 2,
        base_seed: 5,
        settings: RunSettings {
            iterate: ising_sat::decompose::IterateConfig {
                cap: 300,
                record_history: true,
                ..Default::default()
            },
            ..RunSettings::default()
        },
    };
    let a = out.join("a");
    let b = out.join("b");
    run_experiment(&cfg, &a).unwrap();
    run_experiment(&cfg, &b).unwrap();
    let ra = fs::read(a.join("runs.jsonl")).unwrap();
    let rb = fs::read(b.join("runs.jsonl")).unwrap();
    let lines = ra.iter().filter(|&&c| c == b'\n').count();
    let solved = read_runs(&a.join("runs.jsonl")).unwrap().iter().filter(|r| r.solved).count();
    Verdict {
        pass: ra == rb && lines > 0,
        hard: true,
        detail: format!(
            "{lines} records ({solved} solved) over two backends, strategies and levels: {}",
            if ra == rb { "byte-identical" } else { "DIFFER" }
        ),
    }
}

fn main() {
    let args: BTreeSet<String> = std::env::args().skip(1).collect();
    // `cargo test -- --list` and friends
    if args.contains("--list") {
        return;
    }
    let selected = |id: u8| {
        let ids: Vec<u8> = args.iter().filter_map(|a| a.parse().ok()).collect();
        ids.is_empty() || ids.contains(&id)
    };
    let dir = tempfile::tempdir().unwrap();
    let criteria: [(u8, &str, Box<dyn Fn() -> Verdict>); 9] = [
        (1, "gadget exhaustiveness", Box::new(gadget_exhaustiveness)),
        (2, "encoding equivalence", Box::new(encoding_equivalence)),
        (3, "preprocessing soundness", Box::new(preprocessing_soundness)),
        (4, "ladder shape", Box::new(ladder_shape)),
        (5, "end-to-end solvability", Box::new(|| end_to_end(&dir.path().join("c5")))),
        (6, "DFS vs BFS ordering", Box::new(|| dfs_vs_bfs(&dir.path().join("c6")))),
        (7, "backbone trend", Box::new(|| backbone_trend(&dir.path().join("c7")))),
        (8, "TTS arithmetic", Box::new(tts_arithmetic)),
        (9, "determinism", Box::new(|| determinism(&dir.path().join("c9")))),
    ];
    let mut hard_failures = Vec::new();
    for (id, name, check) in &criteria {
        if !selected(*id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        line(*id, name, &v, start.elapsed().as_secs_f64());
        if v.hard && !v.pass {
            hard_failures.push(*id);
        }
    }
    if !hard_failures.is_empty() {
        eprintln!("exact criteria failed: {hard_failures:?}");
        std::process::exit(1);
    }
}
