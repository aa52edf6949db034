use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    compute_tts, generate_backbone_instance, run_repeat, BackboneSpec, Instance, RunKey,
    RunRecord, RunSettings, TimingRecord,
};
use crate::circuit::{semiprime_catalog, semiprime_instance, EncodingOption};
use crate::cnf::parse_dimacs;
use crate::decompose::Strategy;
use crate::error::HarnessError;
use crate::solver::Backend;

/// Overrides the output directory of experiments.
pub const RESULTS_DIR_ENV: &str = "ISAT_RESULTS_DIR";

/// Output directory: the environment override, else `configured`, else
/// `results`.
pub fn results_dir(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(RESULTS_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.map_or_else(|| PathBuf::from("results"), Path::to_path_buf),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSet {
    pub n: u32,
    pub m: Vec<usize>,
    pub backbone_pct: Vec<u32>,
    /// Instances per (m, b) cell.
    pub per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSet {
    /// Generated semiprime factoring instances of these product widths.
    pub semiprime_bits: Vec<usize>,
    /// Keep only the first k catalog entries per width.
    pub max_per_bits: Option<usize>,
    pub encoding: EncodingOption,
    /// DIMACS files, or directories whose `*.cnf` files are all used.
    pub dimacs: Vec<PathBuf>,
    pub backbone: Option<BackboneSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub instances: InstanceSet,
    pub levels: Vec<u8>,
    pub strategies: Vec<Strategy>,
    pub backends: Vec<Backend>,
    pub repeats: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub settings: RunSettings,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        let set = &self.instances;
        if set.semiprime_bits.is_empty() && set.dimacs.is_empty() && set.backbone.is_none() {
            return bad("no instances selected");
        }
        if self.levels.is_empty() || self.strategies.is_empty() || self.backends.is_empty() {
            return bad("levels, strategies and backends must be non-empty");
        }
        if let Some(&l) = self.levels.iter().find(|&&l| l > crate::preprocess::MAX_LEVEL) {
            return Err(HarnessError::Config(format!("level {l} is above the maximum")));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.settings.iterate.profile.spin_budget == 0 {
            return bad("spin budget must be at least 1");
        }
        Ok(())
    }

    /// Seed of repeat `r`.
    pub fn seed(&self, r: u64) -> u64 {
        self.base_seed.wrapping_add(r)
    }
}

/// Materializes the configured instances in a fixed order.
pub fn load_instances(set: &InstanceSet) -> Result<Vec<Instance>, HarnessError> {
    let mut out = Vec::new();
    for &bits in &set.semiprime_bits {
        let catalog = semiprime_catalog(bits)?;
        let take = set.max_per_bits.unwrap_or(catalog.len());
        for entry in catalog.iter().take(take) {
            out.push(Instance {
                id: format!("sp{bits}-{}", entry.semiprime),
                family: format!("semiprime-{bits}b"),
                cnf: semiprime_instance(entry, set.encoding),
            });
        }
    }
    for path in &set.dimacs {
        let mut files = if path.is_dir() {
            fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|p| p.extension().is_some_and(|e| e == "cnf"))
                .collect()
        } else {
            vec![path.clone()]
        };
        files.sort();
        for file in files {
            let text = fs::read_to_string(&file)?;
            let cnf = parse_dimacs(&text).map_err(|source| HarnessError::Instance {
                path: file.display().to_string(),
                source,
            })?;
            let family = file
                .parent()
                .and_then(|p| p.file_name())
                .map_or_else(|| "dimacs".to_string(), |s| s.to_string_lossy().into_owned());
            let stem = file.file_stem().unwrap_or_default().to_string_lossy();
            out.push(Instance {
                id: format!("{family}/{stem}"),
                family,
                cnf,
            });
        }
    }
    if let Some(bb) = &set.backbone {
        for &m in &bb.m {
            for &pct in &bb.backbone_pct {
                let spec = BackboneSpec {
                    n: bb.n,
                    m,
                    backbone_pct: pct,
                    force: bb.force,
                };
                for k in 0..bb.per_cell {
                    let seed = bb
                        .seed
                        .wrapping_mul(1_000_003)
                        .wrapping_add((m as u64) << 24 | (pct as u64) << 16 | k as u64);
                    out.push(Instance {
                        id: format!("bb-n{}-m{m}-b{pct}-{k}", bb.n),
                        family: format!("backbone-m{m}-b{pct}"),
                        cnf: generate_backbone_instance(&spec, seed)?,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub out_dir: PathBuf,
    pub total_runs: usize,
    pub executed: usize,
    pub skipped: usize,
    pub aggregates: Vec<AggregateRow>,
}

/// Repeats executed between two appends to the result files.
const CHUNK: usize = 32;

/// Runs the full factorial sweep, appending to `runs.jsonl` and
/// `timings.jsonl` in `out_dir`. Repeats already present in `runs.jsonl`
/// are skipped, so an interrupted sweep resumes where it stopped. Finishes
/// by rewriting `aggregates.csv`, `runtime.csv` and `plotdata/`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentSummary, HarnessError> {
    cfg.validate()?;
    let instances = load_instances(&cfg.instances)?;
    fs::create_dir_all(out_dir)?;
    let runs_path = out_dir.join("runs.jsonl");
    let timings_path = out_dir.join("timings.jsonl");
    repair_tail(&runs_path)?;
    repair_tail(&timings_path)?;
    let done: HashSet<RunKey> = read_runs(&runs_path)?.iter().map(RunRecord::key).collect();

    let mut tasks = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for &level in &cfg.levels {
            for &strategy in &cfg.strategies {
                for &backend in &cfg.backends {
                    for r in 0..cfg.repeats {
                        let seed = cfg.seed(r);
                        let key = RunKey {
                            instance: inst.id.clone(),
                            strategy,
                            level,
                            backend,
                            seed,
                        };
                        if !done.contains(&key) {
                            tasks.push((i, level, strategy, backend, seed));
                        }
                    }
                }
            }
        }
    }
    let total_runs = instances.len()
        * cfg.levels.len()
        * cfg.strategies.len()
        * cfg.backends.len()
        * cfg.repeats as usize;
    let executed = tasks.len();
    log::info!(
        "{}: {} of {} repeats to run",
        if cfg.name.is_empty() { "experiment" } else { &cfg.name },
        executed,
        total_runs
    );

    let mut runs = OpenOptions::new().create(true).append(true).open(&runs_path)?;
    let mut timings = OpenOptions::new().create(true).append(true).open(&timings_path)?;
    for (n, chunk) in tasks.chunks(CHUNK).enumerate() {
        let results: Vec<Result<(RunRecord, TimingRecord), HarnessError>> = chunk
            .par_iter()
            .map(|&(i, level, strategy, backend, seed)| {
                run_repeat(&instances[i], level, strategy, backend, seed, &cfg.settings)
            })
            .collect();
        let mut run_lines = String::new();
        let mut timing_lines = String::new();
        for res in results {
            let (record, timing) = res?;
            run_lines += &serde_json::to_string(&record)?;
            run_lines.push('\n');
            timing_lines += &serde_json::to_string(&timing)?;
            timing_lines.push('\n');
        }
        runs.write_all(run_lines.as_bytes())?;
        timings.write_all(timing_lines.as_bytes())?;
        log::debug!("chunk {} of {} written", n + 1, tasks.len().div_ceil(CHUNK));
    }
    drop(runs);
    drop(timings);

    let aggregates = write_reports(out_dir)?;
    Ok(ExperimentSummary {
        out_dir: out_dir.to_path_buf(),
        total_runs,
        executed,
        skipped: total_runs - executed,
        aggregates,
    })
}

/// Drops a partially written last line left by an interrupted run.
fn repair_tail(path: &Path) -> Result<(), HarnessError> {
    let Ok(text) = fs::read_to_string(path) else {
        return Ok(());
    };
    if !text.is_empty() && !text.ends_with('\n') {
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        fs::write(path, &text[..keep])?;
    }
    Ok(())
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    read_jsonl(path)
}

pub fn read_timings(path: &Path) -> Result<Vec<TimingRecord>, HarnessError> {
    read_jsonl(path)
}

/// Solved rates and TTS for one (family, level, strategy, backend) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub family: String,
    pub level: u8,
    pub strategy: Strategy,
    pub backend: Backend,
    pub instances: usize,
    pub repeats: usize,
    pub solved_repeats: usize,
    pub solved_pct: f64,
    /// Instances with at least one solved repeat.
    pub instances_solved: usize,
    pub instances_solved_pct: f64,
    /// Mean iterations over solved repeats.
    pub mean_iterations: f64,
    /// Mean per-instance TTS over instances with a finite value.
    pub mean_tts: Option<f64>,
    pub instances_without_tts: usize,
}

type CellKey = (String, u8, Strategy, Backend);

/// Groups records by (family, level, strategy, backend) and summarizes each
/// group; rows come out sorted by that key.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<CellKey, BTreeMap<&str, Vec<RunRecord>>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.family.clone(), r.level, r.strategy, r.backend))
            .or_default()
            .entry(&r.instance)
            .or_default()
            .push(r.clone());
    }
    cells
        .into_iter()
        .map(|((family, level, strategy, backend), per_instance)| {
            let all: Vec<&RunRecord> = per_instance.values().flatten().collect();
            let solved: Vec<&&RunRecord> = all.iter().filter(|r| r.solved).collect();
            let instances_solved = per_instance
                .values()
                .filter(|rs| rs.iter().any(|r| r.solved))
                .count();
            let tts: Vec<f64> = per_instance
                .values()
                .filter_map(|rs| compute_tts(rs).ok().and_then(|t| t.tts))
                .collect();
            AggregateRow {
                family,
                level,
                strategy,
                backend,
                instances: per_instance.len(),
                repeats: all.len(),
                solved_repeats: solved.len(),
                solved_pct: pct(solved.len(), all.len()),
                instances_solved,
                instances_solved_pct: pct(instances_solved, per_instance.len()),
                mean_iterations: if solved.is_empty() {
                    0.0
                } else {
                    solved.iter().map(|r| r.iterations_used as f64).sum::<f64>()
                        / solved.len() as f64
                },
                mean_tts: (!tts.is_empty()).then(|| tts.iter().sum::<f64>() / tts.len() as f64),
                instances_without_tts: per_instance.len() - tts.len(),
            }
        })
        .collect()
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

/// Preprocessing against solver time per (family, level, backend).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub family: String,
    pub level: u8,
    pub backend: Backend,
    pub runs: usize,
    pub mean_preprocess_ms: f64,
    pub mean_solver_calls: f64,
    pub mean_solver_time_ms: f64,
}

/// Joins runs with their timings. Runs without a timing entry count as zero
/// preprocessing time.
pub fn runtime_report(records: &[RunRecord], timings: &[TimingRecord]) -> Vec<RuntimeRow> {
    let pre: BTreeMap<RunKey, f64> = timings
        .iter()
        .map(|t| {
            (
                RunKey {
                    instance: t.instance.clone(),
                    strategy: t.strategy,
                    level: t.level,
                    backend: t.backend,
                    seed: t.seed,
                },
                t.preprocess_ms,
            )
        })
        .collect();
    let mut cells: BTreeMap<(String, u8, Backend), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in records {
        let p = pre.get(&r.key()).copied().unwrap_or(0.0);
        cells
            .entry((r.family.clone(), r.level, r.backend))
            .or_default()
            .push((p, r.solver_calls as f64, r.solver_time_ms));
    }
    cells
        .into_iter()
        .map(|((family, level, backend), v)| {
            let n = v.len() as f64;
            RuntimeRow {
                family,
                level,
                backend,
                runs: v.len(),
                mean_preprocess_ms: v.iter().map(|x| x.0).sum::<f64>() / n,
                mean_solver_calls: v.iter().map(|x| x.1).sum::<f64>() / n,
                mean_solver_time_ms: v.iter().map(|x| x.2).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Rebuilds `aggregates.csv`, `runtime.csv` and the `plotdata/` tables from
/// the result files in `dir`.
pub fn write_reports(dir: &Path) -> Result<Vec<AggregateRow>, HarnessError> {
    let records = read_runs(&dir.join("runs.jsonl"))?;
    let timings = read_timings(&dir.join("timings.jsonl"))?;
    let rows = aggregate(&records);
    let runtime = runtime_report(&records, &timings);
    write_csv(&dir.join("aggregates.csv"), &rows)?;
    write_csv(&dir.join("runtime.csv"), &runtime)?;

    let plot = dir.join("plotdata");
    fs::create_dir_all(&plot)?;
    #[derive(Serialize)]
    struct SolvedPoint<'a> {
        family: &'a str,
        strategy: Strategy,
        backend: Backend,
        level: u8,
        solved_pct: f64,
        instances_solved_pct: f64,
    }
    #[derive(Serialize)]
    struct TtsPoint<'a> {
        family: &'a str,
        strategy: Strategy,
        backend: Backend,
        level: u8,
        mean_tts: Option<f64>,
        instances_without_tts: usize,
    }
    #[derive(Serialize)]
    struct RuntimePoint<'a> {
        family: &'a str,
        backend: Backend,
        level: u8,
        preprocess_ms: f64,
        solver_ms: f64,
    }
    write_csv(
        &plot.join("solved_by_level.csv"),
        &rows
            .iter()
            .map(|r| SolvedPoint {
                family: &r.family,
                strategy: r.strategy,
                backend: r.backend,
                level: r.level,
                solved_pct: r.solved_pct,
                instances_solved_pct: r.instances_solved_pct,
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &plot.join("tts_by_level.csv"),
        &rows
            .iter()
            .map(|r| TtsPoint {
                family: &r.family,
                strategy: r.strategy,
                backend: r.backend,
                level: r.level,
                mean_tts: r.mean_tts,
                instances_without_tts: r.instances_without_tts,
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &plot.join("runtime_by_level.csv"),
        &runtime
            .iter()
            .map(|r| RuntimePoint {
                family: &r.family,
                backend: r.backend,
                level: r.level,
                preprocess_ms: r.mean_preprocess_ms,
                solver_ms: r.mean_solver_time_ms,
            })
            .collect::<Vec<_>>(),
    )?;
    Ok(rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::Io(io),
        other => HarnessError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
