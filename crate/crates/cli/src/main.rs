use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ising_sat::circuit::{semiprime_catalog, semiprime_instance, EncodingOption};
use ising_sat::cnf::{parse_dimacs, write_dimacs, Cnf};
use ising_sat::decompose::Strategy;
use ising_sat::harness::{
    compute_tts, generate_backbone_instance, read_runs, results_dir, run_experiment, run_repeat,
    write_reports, BackboneSpec, ExperimentConfig, Instance, RunRecord, RunSettings,
};
use ising_sat::preprocess::{run_ladder_with, LadderConfig, PassReport};
use ising_sat::qubo::cnf_to_qubo;
use ising_sat::solver::{write_trace_csv, Backend};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "isat", version, about = "SAT solving through budgeted Ising subproblems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write benchmark instances as DIMACS.
    #[command(subcommand)]
    Generate(Generate),
    /// Run the reduction ladder and write the reduced formula, condition
    /// list and pass reports.
    Preprocess(PreprocessArgs),
    /// Solve one instance with repeated decomposition runs.
    Solve(SolveArgs),
    /// Run an experiment sweep from a TOML config.
    Bench(BenchArgs),
    /// Time-to-solution per instance and configuration from a runs file.
    Tts(TtsArgs),
    /// Rebuild aggregate and runtime tables in a results directory.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum Generate {
    /// Multiplier circuits for products of two odd primes.
    Semiprime {
        #[arg(long)]
        bits: usize,
        /// Catalog position; all entries when omitted.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, value_enum, default_value_t = Encoding::Option1)]
        encoding: Encoding,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Random 3SAT with a given backbone size.
    Backbone {
        #[arg(long, default_value_t = 100)]
        n: u32,
        #[arg(long)]
        m: usize,
        /// Backbone size in percent of n.
        #[arg(long)]
        b: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow sizes outside the standard grid.
        #[arg(long)]
        force: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Option1,
    Option2,
}

impl From<Encoding> for EncodingOption {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Option1 => EncodingOption::Option1,
            Encoding::Option2 => EncodingOption::Option2,
        }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 7)]
    level: u8,
    /// Seeds the branch guess at level 7.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force the branch guess instead of drawing it.
    #[arg(long)]
    guess: Option<bool>,
    #[arg(long)]
    no_pure_literal: bool,
    /// Output directory for reduced.cnf, cond.json and report.json.
    #[arg(short, long)]
    out: PathBuf,
    /// Also export the reduced formula's QUBO as `i j value` triplets.
    #[arg(long)]
    qubo: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_strategy, default_value = "dfs")]
    strategy: Strategy,
    #[arg(long, value_parser = parse_backend, default_value = "emulator")]
    backend: Backend,
    #[arg(long, default_value_t = 7)]
    level: u8,
    /// Spins per subproblem.
    #[arg(long, default_value_t = 45)]
    budget: usize,
    #[arg(long, default_value_t = 5000)]
    cap: usize,
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML file with run settings (schedule, tabu, filter window, ...).
    #[arg(long)]
    settings: Option<PathBuf>,
    /// Record the satisfied count after every iteration.
    #[arg(long)]
    history: bool,
    /// Write the anneal trace of the first solver call as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long, default_value = "runs.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(short, long)]
    config: PathBuf,
    /// Results directory; defaults to the environment override, then the
    /// config's `output_dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TtsArgs {
    #[arg(default_value = "runs.jsonl")]
    runs: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(default_value = "results")]
    dir: PathBuf,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate(g) => generate(g),
        Command::Preprocess(a) => preprocess(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Tts(a) => tts(a),
        Command::Report(a) => report(a),
    }
}

fn read_cnf(path: &Path) -> Result<Cnf> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn generate(g: Generate) -> Result<()> {
    match g {
        Generate::Semiprime {
            bits,
            index,
            encoding,
            out,
        } => {
            let catalog = semiprime_catalog(bits)?;
            let picked: Vec<_> = match index {
                Some(i) => vec![catalog
                    .get(i)
                    .with_context(|| format!("{bits}-bit catalog has {} entries", catalog.len()))?],
                None => catalog.iter().collect(),
            };
            fs::create_dir_all(&out)?;
            for entry in picked {
                let cnf = semiprime_instance(entry, encoding.into());
                let path = out.join(format!("sp{bits}-{}.cnf", entry.semiprime));
                fs::write(&path, write_dimacs(&cnf))?;
                println!(
                    "{}  {} = {} x {}  vars {} clauses {}",
                    path.display(),
                    entry.semiprime,
                    entry.p,
                    entry.q,
                    cnf.num_vars(),
                    cnf.num_clauses()
                );
            }
        }
        Generate::Backbone {
            n,
            m,
            b,
            seed,
            force,
            out,
        } => {
            let spec = BackboneSpec {
                n,
                m,
                backbone_pct: b,
                force,
            };
            let cnf = generate_backbone_instance(&spec, seed)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&out, write_dimacs(&cnf))?;
            println!("{}  vars {} clauses {}", out.display(), n, m);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PreprocessReport<'a> {
    level: u8,
    seed: u64,
    vars_before: u32,
    clauses_before: usize,
    remaining_vars: usize,
    free_vars: usize,
    clauses_after: usize,
    unsat: bool,
    branch: &'a ising_sat::preprocess::BranchRecord,
    passes: &'a [PassReport],
}

fn preprocess(a: PreprocessArgs) -> Result<()> {
    let cnf = read_cnf(&a.input)?;
    let ladder = run_ladder_with(
        &cnf,
        &LadderConfig {
            level: a.level,
            seed: a.seed,
            forced_guess: a.guess,
            pure_literal: !a.no_pure_literal,
            ..LadderConfig::default()
        },
    );
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("reduced.cnf"), write_dimacs(&ladder.cnf))?;
    fs::write(
        a.out.join("cond.json"),
        serde_json::to_string_pretty(&ladder.cond)?,
    )?;
    let report = PreprocessReport {
        level: a.level,
        seed: a.seed,
        vars_before: cnf.num_vars(),
        clauses_before: cnf.num_clauses(),
        remaining_vars: ladder.remaining_vars(),
        free_vars: ladder.free_vars().len(),
        clauses_after: ladder.cnf.num_clauses(),
        unsat: ladder.is_unsat(),
        branch: &ladder.branch,
        passes: &ladder.reports,
    };
    fs::write(a.out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = &a.qubo {
        if ladder.is_unsat() {
            bail!("reduced formula is unsatisfiable; no QUBO to export");
        }
        fs::write(path, cnf_to_qubo(&ladder.cnf)?.to_triplets())?;
    }
    println!("{:<28} {:>6} {:>8}", "pass", "vars", "clauses");
    for p in &ladder.reports {
        println!("{:<28} {:>6} {:>8}", p.pass, p.vars_after, p.clauses_after);
    }
    println!(
        "level {}: {} -> {} variables{}",
        a.level,
        cnf.num_occurring_vars(),
        ladder.remaining_vars(),
        if ladder.is_unsat() { " (unsatisfiable)" } else { "" }
    );
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let cnf = read_cnf(&a.input)?;
    let mut settings = match &a.settings {
        Some(path) => toml::from_str::<RunSettings>(&fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => RunSettings::default(),
    };
    settings.iterate.profile.spin_budget = a.budget;
    settings.iterate.cap = a.cap;
    settings.iterate.record_history = a.history;
    settings.iterate.trace_first_call = a.trace.is_some();
    let stem = a.input.file_stem().unwrap_or_default().to_string_lossy();
    let instance = Instance {
        id: stem.to_string(),
        family: "cli".into(),
        cnf,
    };
    let mut out = fs::File::create(&a.out)?;
    let mut records = Vec::new();
    for r in 0..a.repeats {
        let seed = a.seed.wrapping_add(r);
        let (record, timing) =
            run_repeat(&instance, a.level, a.strategy, a.backend, seed, &settings)?;
        if r == 0 {
            if let Some(path) = &a.trace {
                write_trace(path, &instance, &a, seed, &settings)?;
            }
        }
        writeln!(out, "{}", serde_json::to_string(&record)?)?;
        println!(
            "seed {seed}: {} after {} iterations ({} vars left, {:.1} ms preprocessing, {:.0} ms loop)",
            if record.solved { "solved" } else if record.closed_branch { "closed branch" } else { "unsolved" },
            record.iterations_used,
            record.remaining_vars,
            timing.preprocess_ms,
            timing.loop_ms
        );
        records.push(record);
    }
    let est = compute_tts(&records)?;
    println!("p = {:.3}, tts = {est} iterations", est.p);
    Ok(())
}

fn write_trace(
    path: &Path,
    instance: &Instance,
    a: &SolveArgs,
    seed: u64,
    settings: &RunSettings,
) -> Result<()> {
    let ladder = run_ladder_with(
        &instance.cnf,
        &LadderConfig {
            level: a.level,
            seed,
            pure_literal: settings.pure_literal,
            ..LadderConfig::default()
        },
    );
    let cfg = ising_sat::decompose::IterateConfig {
        strategy: a.strategy,
        backend: a.backend,
        seed,
        cap: 1,
        trace_first_call: true,
        ..settings.iterate.clone()
    };
    let outcome = ising_sat::decompose::iterate(&ladder, &instance.cnf, &cfg)?;
    write_trace_csv(&outcome.first_trace, fs::File::create(path)?)?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config)
        .with_context(|| format!("reading {}", a.config.display()))?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let dir = match a.out {
        Some(d) => d,
        None => results_dir(cfg.output_dir.as_deref()),
    };
    let summary = run_experiment(&cfg, &dir)?;
    println!(
        "{}: ran {} repeats, {} already present",
        dir.display(),
        summary.executed,
        summary.skipped
    );
    print_aggregates(&summary.aggregates);
    Ok(())
}

fn print_aggregates(rows: &[ising_sat::harness::AggregateRow]) {
    println!(
        "{:<22} {:>5} {:>4} {:>9} {:>8} {:>10} {:>9} {:>10}",
        "family", "level", "strat", "backend", "solved%", "instances%", "mean_it", "tts"
    );
    for r in rows {
        println!(
            "{:<22} {:>5} {:>4} {:>9} {:>8.1} {:>10.1} {:>9.1} {:>10}",
            r.family,
            r.level,
            r.strategy,
            r.backend,
            r.solved_pct,
            r.instances_solved_pct,
            r.mean_iterations,
            r.mean_tts.map_or("inf".to_string(), |t| format!("{t:.1}"))
        );
    }
}

fn tts(a: TtsArgs) -> Result<()> {
    let records = read_runs(&a.runs)?;
    if records.is_empty() {
        bail!("{} has no run records", a.runs.display());
    }
    let mut groups: std::collections::BTreeMap<_, Vec<RunRecord>> = Default::default();
    for r in records {
        groups
            .entry((r.instance.clone(), r.level, r.strategy, r.backend))
            .or_default()
            .push(r);
    }
    println!(
        "{:<28} {:>5} {:>8} {:>9} {:>7} {:>7} {:>9} {:>10}",
        "instance", "level", "strategy", "backend", "repeats", "p", "t", "tts"
    );
    for ((instance, level, strategy, backend), rs) in &groups {
        let est = compute_tts(rs)?;
        println!(
            "{:<28} {:>5} {:>8} {:>9} {:>7} {:>7.3} {:>9.1} {:>10}",
            instance,
            level,
            strategy,
            backend,
            rs.len(),
            est.p,
            est.t,
            est.to_string()
        );
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let rows = write_reports(&a.dir)?;
    if rows.is_empty() {
        bail!("{} has no run records", a.dir.display());
    }
    print_aggregates(&rows);
    println!(
        "wrote aggregates.csv, runtime.csv and plotdata/ in {}",
        a.dir.display()
    );
    Ok(())
}
