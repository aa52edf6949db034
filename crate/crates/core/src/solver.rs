//! Subproblem solvers behind one request/result contract: a simulated
//! annealer that enforces the chip's size and coefficient limits, and a
//! software tabu search on the unscaled model.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::qubo::{ChipProfile, IsingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Emulator,
    Tabu,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Emulator => "emulator",
            Backend::Tabu => "tabu",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emulator" => Ok(Backend::Emulator),
            "tabu" => Ok(Backend::Tabu),
            _ => Err(format!("unknown backend `{s}` (expected emulator or tabu)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOrder {
    /// Spins visited in index order.
    #[default]
    Sequential,
    /// `n` uniformly drawn spins per sweep.
    Random,
}

/// Geometric cooling from `t_initial` to `t_final` over `sweeps` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: usize,
    pub order: SweepOrder,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t_initial: 10.0,
            t_final: 0.05,
            sweeps: 500,
            order: SweepOrder::Sequential,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.sweeps == 0 {
            return Err(SolverError::Schedule("sweeps must be at least 1".into()));
        }
        if !(self.t_final > 0.0 && self.t_initial > self.t_final) {
            return Err(SolverError::Schedule(format!(
                "need t_initial > t_final > 0 (got {} and {})",
                self.t_initial, self.t_final
            )));
        }
        Ok(())
    }

    pub fn temperature(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.t_initial;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabuConfig {
    pub tenure: usize,
    /// Moves per restart.
    pub max_steps: usize,
    /// Optional wall-clock cap per request. Makes results depend on machine
    /// speed, so it is off by default.
    pub timeout_ms: Option<f64>,
}

impl Default for TabuConfig {
    fn default() -> Self {
        TabuConfig {
            tenure: 10,
            max_steps: 1000,
            timeout_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub model: IsingModel,
    pub backend: Backend,
    pub seed: u64,
    pub num_samples: usize,
    pub schedule: AnnealSchedule,
    pub tabu: TabuConfig,
    pub profile: ChipProfile,
    /// Record a per-sweep trace of the first emulator sample.
    pub trace: bool,
}

impl SolveRequest {
    pub fn new(model: IsingModel, backend: Backend, seed: u64) -> Self {
        SolveRequest {
            model,
            backend,
            seed,
            num_samples: 1,
            schedule: AnnealSchedule::default(),
            tabu: TabuConfig::default(),
            profile: ChipProfile::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub spins: Vec<i8>,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sweep: usize,
    pub temperature: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub spins: Vec<i8>,
    pub energy: f64,
    pub samples: Vec<Sample>,
    /// Seconds; the only field that varies between identical requests.
    pub wall_time: f64,
    pub backend: Backend,
    pub trace: Vec<TracePoint>,
}

impl SolveResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &SolveResult) -> bool {
        self.spins == other.spins
            && self.energy.to_bits() == other.energy.to_bits()
            && self.samples == other.samples
            && self.backend == other.backend
            && self.trace == other.trace
    }
}

/// Writes a trace as `sweep,temperature,best_energy` CSV.
pub fn write_trace_csv(trace: &[TracePoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "sweep,temperature,best_energy")?;
    for p in trace {
        writeln!(out, "{},{},{}", p.sweep, p.temperature, p.best_energy)?;
    }
    Ok(())
}

/// Dense form used by both backends.
struct Dense {
    h: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Dense {
    fn new(m: &IsingModel) -> Self {
        let mut h = vec![0.0; m.num_spins];
        for (&i, &v) in &m.h {
            h[i] = v;
        }
        let mut adj = vec![Vec::new(); m.num_spins];
        for (&(i, j), &v) in &m.j {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        Dense { h, adj }
    }

    fn local_fields(&self, s: &[i8]) -> Vec<f64> {
        (0..s.len())
            .map(|i| self.h[i] + self.adj[i].iter().map(|&(j, v)| v * s[j] as f64).sum::<f64>())
            .collect()
    }

    fn flip(&self, s: &mut [i8], field: &mut [f64], i: usize) {
        s[i] = -s[i];
        let d = 2.0 * s[i] as f64;
        for &(j, v) in &self.adj[i] {
            field[j] += v * d;
        }
    }
}

fn random_spins(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()
}

fn check_chip(m: &IsingModel, profile: &ChipProfile) -> Result<(), SolverError> {
    if m.num_spins > profile.spin_budget {
        return Err(SolverError::Capacity {
            spins: m.num_spins,
            capacity: profile.spin_budget,
        });
    }
    let range = profile.coeff_min as f64..=profile.coeff_max as f64;
    let bad = m
        .h
        .iter()
        .map(|(i, &v)| (format!("h[{i}]"), v))
        .chain(m.j.iter().map(|((a, b), &v)| (format!("J[{a},{b}]"), v)))
        .find(|(_, v)| v.fract() != 0.0 || !range.contains(v));
    if let Some((site, value)) = bad {
        return Err(SolverError::CoefficientRange {
            site,
            value,
            min: profile.coeff_min,
            max: profile.coeff_max,
        });
    }
    Ok(())
}

fn finish(m: &IsingModel, samples: Vec<Sample>, start: Instant, backend: Backend, trace: Vec<TracePoint>) -> SolveResult {
    let best = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy).then(a.0.cmp(&b.0)))
        .map(|(_, s)| s.clone())
        .unwrap_or(Sample {
            spins: Vec::new(),
            energy: m.offset,
        });
    SolveResult {
        spins: best.spins,
        energy: best.energy,
        samples,
        wall_time: start.elapsed().as_secs_f64(),
        backend,
        trace,
    }
}

/// Metropolis single-flip annealing under the chip's constraints. Returns the
/// lowest-energy state seen in each sample; the result is the best sample.
pub fn solve_emulator(req: &SolveRequest) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    check_chip(&req.model, &req.profile)?;
    req.schedule.validate()?;
    let n = req.model.num_spins;
    let dense = Dense::new(&req.model);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut samples = Vec::with_capacity(req.num_samples.max(1));
    let mut trace = Vec::new();
    for sample in 0..req.num_samples.max(1) {
        let mut s = random_spins(&mut rng, n);
        let mut field = dense.local_fields(&s);
        let mut energy = req.model.energy(&s);
        let mut best = (energy, s.clone());
        for sweep in 0..req.schedule.sweeps {
            let t = req.schedule.temperature(sweep);
            for k in 0..n {
                let i = match req.schedule.order {
                    SweepOrder::Sequential => k,
                    SweepOrder::Random => rng.gen_range(0..n),
                };
                let delta = -2.0 * s[i] as f64 * field[i];
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                    dense.flip(&mut s, &mut field, i);
                    energy += delta;
                    if energy < best.0 {
                        best = (energy, s.clone());
                    }
                }
            }
            if req.trace && sample == 0 {
                trace.push(TracePoint {
                    sweep,
                    temperature: t,
                    best_energy: best.0,
                });
            }
        }
        let exact = req.model.energy(&best.1);
        samples.push(Sample {
            spins: best.1,
            energy: exact,
        });
    }
    Ok(finish(&req.model, samples, start, Backend::Emulator, trace))
}

/// Steepest-descent single-flip tabu search with aspiration, restarted from
/// a random state for each sample. No chip limits apply.
pub fn solve_tabu(req: &SolveRequest) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let deadline = req
        .tabu
        .timeout_ms
        .map(|ms| start + Duration::from_secs_f64(ms / 1000.0));
    let n = req.model.num_spins;
    let dense = Dense::new(&req.model);
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut samples = Vec::with_capacity(req.num_samples.max(1));
    for _ in 0..req.num_samples.max(1) {
        let mut s = random_spins(&mut rng, n);
        let mut field = dense.local_fields(&s);
        let mut energy = req.model.energy(&s);
        let mut best = (energy, s.clone());
        let mut tabu_until = vec![0usize; n];
        for step in 1..=req.tabu.max_steps {
            if n == 0 || deadline.is_some_and(|d| Instant::now() >= d) {
                break;
            }
            let mut choice: Option<(f64, usize)> = None;
            for i in 0..n {
                let delta = -2.0 * s[i] as f64 * field[i];
                let allowed = tabu_until[i] < step || energy + delta < best.0;
                if allowed && choice.map_or(true, |(d, _)| delta < d) {
                    choice = Some((delta, i));
                }
            }
            let Some((delta, i)) = choice else {
                continue;
            };
            dense.flip(&mut s, &mut field, i);
            energy += delta;
            tabu_until[i] = step + req.tabu.tenure;
            if energy < best.0 {
                best = (energy, s.clone());
            }
        }
        let exact = req.model.energy(&best.1);
        samples.push(Sample {
            spins: best.1,
            energy: exact,
        });
    }
    Ok(finish(&req.model, samples, start, Backend::Tabu, Vec::new()))
}

pub fn solve(req: &SolveRequest) -> Result<SolveResult, SolverError> {
    match req.backend {
        Backend::Emulator => solve_emulator(req),
        Backend::Tabu => solve_tabu(req),
    }
}

/// Solves requests in parallel; result `i` belongs to request `i`.
pub fn batch_solve(requests: &[SolveRequest]) -> Vec<Result<SolveResult, SolverError>> {
    requests.par_iter().map(solve).collect()
}
