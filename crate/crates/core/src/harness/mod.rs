//! Experiment orchestration: instance sets, repeated runs, result files and
//! aggregate metrics.

mod backbone;
mod experiment;
mod tts;

pub use backbone::{
    exact_backbone, generate_backbone_instance, is_satisfiable, BackboneSpec, GRID_BACKBONE_PCT, GRID_CLAUSES,
    GRID_VARS,
};
pub use experiment::{
    aggregate, load_instances, read_runs, read_timings, results_dir, run_experiment,
    runtime_report, write_reports, AggregateRow, BackboneSet, ExperimentConfig, ExperimentSummary,
    InstanceSet, RuntimeRow, RESULTS_DIR_ENV,
};
pub use tts::{compute_tts, TtsEstimate, TTS_TARGET};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cnf::Cnf;
use crate::decompose::{iterate, IterateConfig, Strategy};
use crate::error::HarnessError;
use crate::preprocess::{run_ladder_with, LadderConfig};
use crate::solver::Backend;

/// A benchmark formula with a stable id and the family it is aggregated in.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub family: String,
    pub cnf: Cnf,
}

/// Deterministic outcome of one repeat. Wall-clock measurements go to
/// [`TimingRecord`] so that reruns reproduce this record exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub family: String,
    pub strategy: Strategy,
    pub level: u8,
    pub backend: Backend,
    pub seed: u64,
    pub solved: bool,
    pub verified: bool,
    /// Preprocessing refuted the branch guess.
    pub closed_branch: bool,
    pub iterations_used: usize,
    pub solver_calls: usize,
    /// `solver_calls × call_budget_ms`.
    pub solver_time_ms: f64,
    pub remaining_vars: usize,
    pub num_clauses: usize,
    pub best_satisfied: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<usize>>,
}

impl RunRecord {
    /// Identity of a repeat inside an experiment.
    pub fn key(&self) -> RunKey {
        RunKey {
            instance: self.instance.clone(),
            strategy: self.strategy,
            level: self.level,
            backend: self.backend,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunKey {
    pub instance: String,
    pub strategy: Strategy,
    pub level: u8,
    pub backend: Backend,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub instance: String,
    pub strategy: Strategy,
    pub level: u8,
    pub backend: Backend,
    pub seed: u64,
    pub preprocess_ms: f64,
    pub loop_ms: f64,
}

/// Everything about a repeat except the instance, strategy, level, backend
/// and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub iterate: IterateConfig,
    pub pure_literal: bool,
    /// Charged per solver call when computing solver time.
    pub call_budget_ms: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            iterate: IterateConfig::default(),
            pure_literal: true,
            call_budget_ms: 5.0,
        }
    }
}

/// Preprocesses to `level` and runs the decomposition loop once.
pub fn run_repeat(
    instance: &Instance,
    level: u8,
    strategy: Strategy,
    backend: Backend,
    seed: u64,
    settings: &RunSettings,
) -> Result<(RunRecord, TimingRecord), HarnessError> {
    let t0 = Instant::now();
    let ladder = run_ladder_with(
        &instance.cnf,
        &LadderConfig {
            level,
            seed,
            pure_literal: settings.pure_literal,
            ..LadderConfig::default()
        },
    );
    let preprocess_ms = t0.elapsed().as_secs_f64() * 1e3;
    let cfg = IterateConfig {
        strategy,
        backend,
        seed,
        ..settings.iterate.clone()
    };
    let t1 = Instant::now();
    let outcome = iterate(&ladder, &instance.cnf, &cfg)?;
    let loop_ms = t1.elapsed().as_secs_f64() * 1e3;
    let record = RunRecord {
        instance: instance.id.clone(),
        family: instance.family.clone(),
        strategy,
        level,
        backend,
        seed,
        solved: outcome.solved,
        verified: outcome.verified,
        closed_branch: outcome.closed_branch,
        iterations_used: outcome.iterations,
        solver_calls: outcome.solver_calls,
        solver_time_ms: outcome.solver_calls as f64 * settings.call_budget_ms,
        remaining_vars: ladder.remaining_vars(),
        num_clauses: outcome.num_clauses,
        best_satisfied: outcome.best_satisfied,
        history: cfg.record_history.then_some(outcome.history),
    };
    let timing = TimingRecord {
        instance: instance.id.clone(),
        strategy,
        level,
        backend,
        seed,
        preprocess_ms,
        loop_ms,
    };
    Ok((record, timing))
}
