//! `radsum`: batch driver for oracle queries, table builds, searches,
//! certificate reproduction and the summary report.
//!
//! Exit status: 0 pass, 1 fail, 2 usage or input error, 3 inconclusive.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use radsum_core::certs::report::render_text;
use radsum_core::certs::{render_summary, summarize_dir, write_report, Step, StepVerdict};
use radsum_core::dp::{build_initial, cache_path, refine_with, RefinePlan};
use radsum_core::interval::Interval;
use radsum_core::prawitz::optimize_prawitz;
use radsum_core::surd::parse_rational;
use radsum_core::{
    feedback_iterate, run_case, tail_probability, CaseContext, CaseFile, CaseId, CaseReport, DPGrid, GridSpec,
    PrawitzConfig, Surd, Verdict, WeightVector,
};

use config::{FileConfig, RunConfig, Scale};

#[derive(Parser)]
#[command(name = "radsum", version, about = "Exact and certified bounds for Rademacher-sum tail probabilities")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file whose keys override the flags below
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Grid preset for DP tables
    #[arg(long, global = true, value_enum, default_value = "desk")]
    scale: Scale,
    /// Use this table file instead of the cache
    #[arg(long, global = true, value_name = "PATH")]
    table: Option<PathBuf>,
    /// Directory holding cached tables
    #[arg(long, global = true, env = "RADSUM_TABLE_DIR", default_value = ".radsum-tables")]
    table_dir: PathBuf,
    /// Directory searched for case files given by bare name
    #[arg(long, global = true)]
    case_dir: Option<PathBuf>,
    /// Where reports are written
    #[arg(long, global = true, default_value = "reports")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Wall-clock budget in seconds; work past it is reported inconclusive
    #[arg(long, global = true, value_name = "SECS")]
    time_budget: Option<u64>,
    /// Memory budget for DP tables in MiB
    #[arg(long, global = true, value_name = "MIB")]
    memory_budget: Option<usize>,
    /// Maximum boxes tested per search round
    #[arg(long, global = true, value_name = "BOXES")]
    search_budget: Option<u64>,
    /// Accepted samples per variance-polynomial check
    #[arg(long, global = true, default_value_t = 400)]
    samples: usize,
    /// Seed for the sampling checks
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            scale: self.scale,
            table: self.table,
            table_dir: self.table_dir,
            case_dir: self.case_dir,
            out_dir: self.out_dir,
            threads: self.threads,
            time_budget: self.time_budget.map(Duration::from_secs),
            memory_budget_mb: self.memory_budget,
            search_budget: self.search_budget,
            samples: self.samples,
            seed: self.seed,
        };
        if let Some(path) = &self.config {
            cfg.apply(FileConfig::load(path)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact tail probability P(sum w_i e_i >= x)
    Oracle {
        /// Weights, e.g. "1,1,1" or "1/2 1/4 1/4"
        #[arg(long)]
        w: String,
        /// Threshold, e.g. "4" or "1/sqrt(7)"
        #[arg(long, required_unless_present = "x_sq", conflicts_with = "x_sq", allow_hyphen_values = true)]
        x: Option<String>,
        /// Threshold given by its square
        #[arg(long)]
        x_sq: Option<String>,
        /// P(X > x) instead of P(X >= x)
        #[arg(long)]
        strict: bool,
        /// P(|X| >= x)
        #[arg(long)]
        two_sided: bool,
        /// Treat x as a multiple of the standard deviation
        #[arg(long)]
        standardized: bool,
    },
    /// Certified Prawitz lower bound on inf P(X >= x) over largest weight <= a
    Prawitz {
        #[arg(long)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Cutoffs T to try (default: a grid scaled by 1/a)
        #[arg(long = "T", value_delimiter = ',')]
        t: Vec<f64>,
        /// Split points q to try
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Quadrature panels
        #[arg(long, default_value_t = 256)]
        panels: usize,
    },
    /// Build or query the DP table
    Dp {
        #[command(subcommand)]
        command: DpCommand,
    },
    /// Run a case file's feedback search
    Search {
        /// Case file, or a name looked up in --case-dir
        #[arg(long)]
        case: PathBuf,
        /// JSON report path (default: <out-dir>/<name>.search.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check one certificate case, or "all"
    Reproduce {
        /// A, B, ..., H, sqrt7, sqrt5, sqrt3, 2sqrt6 or all
        case: String,
    },
    /// Summarize case reports into the step function
    Report {
        /// Directory of case reports (default: --out-dir)
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DpCommand {
    /// Build a table and write it to a file
    Build {
        /// Granularity, e.g. "1/200" (default: the preset's)
        #[arg(long)]
        beta: Option<String>,
        /// Refinement iterations (default: the preset's)
        #[arg(long)]
        iters: Option<usize>,
        /// Output file (default: the cache in --table-dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look up D(a, x)
    Query {
        #[arg(long)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn code(self) -> ExitCode {
        ExitCode::from(match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        })
    }

    fn of(verdicts: impl IntoIterator<Item = Verdict>) -> Status {
        let mut out = Status::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Status::Fail,
                Verdict::Inconclusive => out = Status::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.run.resolve().and_then(|cfg| {
        if let Some(n) = cfg.threads {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        run(cli.command, &cfg)
    });
    match result {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, cfg: &RunConfig) -> Result<Status> {
    match command {
        Command::Oracle { w, x, x_sq, strict, two_sided, standardized } => {
            cmd_oracle(&w, x.as_deref(), x_sq.as_deref(), strict, two_sided, standardized)
        }
        Command::Prawitz { a, x, t, q, panels } => cmd_prawitz(a, x, t, q, panels),
        Command::Dp { command: DpCommand::Build { beta, iters, out } } => cmd_dp_build(cfg, beta.as_deref(), iters, out),
        Command::Dp { command: DpCommand::Query { a, x } } => {
            let table = load_table(cfg)?;
            println!("{}", table.query(a, x)?);
            Ok(Status::Pass)
        }
        Command::Search { case, out } => cmd_search(cfg, &case, out),
        Command::Reproduce { case } => cmd_reproduce(cfg, &case),
        Command::Report { dir } => cmd_report(dir.as_deref().unwrap_or(&cfg.out_dir)),
    }
}

fn cmd_oracle(w: &str, x: Option<&str>, x_sq: Option<&str>, strict: bool, two_sided: bool, standardized: bool) -> Result<Status> {
    let w = WeightVector::parse(w).context("--w")?;
    let mut x = match (x, x_sq) {
        (Some(x), _) => Surd::parse(x).context("--x")?,
        (None, Some(sq)) => Surd::sqrt(&parse_rational(sq).context("--x-sq")?).context("--x-sq")?,
        (None, None) => bail!("give --x or --x-sq"),
    };
    if standardized {
        x = w.standardized_threshold(&x)?;
    }
    let p = tail_probability(&w, &x, strict, two_sided)?;
    println!("{} ({})", p.value, p.value.to_f64().unwrap_or(f64::NAN));
    Ok(Status::Pass)
}

fn cmd_prawitz(a: f64, x: f64, t: Vec<f64>, q: Vec<f64>, panels: usize) -> Result<Status> {
    let defaults = PrawitzConfig::default();
    let t = if t.is_empty() { defaults.t_grid(a) } else { t };
    let q = if q.is_empty() { defaults.q_grid } else { q };
    let best = optimize_prawitz(a, x, &t, &q, panels)?;
    println!("{}", best.value);
    println!("T = {}, q = {}, panels = {panels}", best.t, best.q);
    Ok(Status::Pass)
}

fn grid_for(cfg: &RunConfig, beta: Option<&str>, iters: Option<usize>) -> Result<GridSpec> {
    let mut spec = cfg.grid();
    if let Some(beta) = beta {
        let b = parse_rational(beta).context("--beta")?;
        let n = b.recip();
        if !n.is_integer() || n <= num_rational::BigRational::from_integer(0.into()) {
            bail!("--beta must be 1/n for a positive integer n, got {beta}");
        }
        let n: u32 = n.to_integer().try_into().map_err(|_| anyhow!("--beta {beta} is too fine"))?;
        spec.n = n;
        spec.x_lo = -3 * i64::from(n);
        spec.x_hi = 3 * i64::from(n);
        spec.seed_a_stride = (n / 50).max(1);
        spec.seed_x_stride = (n / 20).max(1);
    }
    if let Some(i) = iters {
        spec.iterations = i;
    }
    spec.validate()?;
    Ok(spec)
}

/// Builds a table, stopping refinement once the time budget runs out.
/// Returns the table and whether every planned iteration ran.
fn build_table(cfg: &RunConfig, spec: &GridSpec, started: Instant) -> Result<(DPGrid, bool)> {
    if cfg.scale == Scale::Full {
        eprintln!("warning: the full-scale table takes hours to build and about 1 GiB of memory");
    }
    let mut grid = build_initial(spec)?;
    let plan = RefinePlan::new(&grid);
    for i in 0..spec.iterations {
        if cfg.time_budget.is_some_and(|b| started.elapsed() > b) {
            eprintln!("time budget exhausted after {i} of {} iterations", spec.iterations);
            return Ok((grid, false));
        }
        let (next, gain) = refine_with(&grid, &plan);
        grid = next;
        eprintln!("iteration {}/{}: max gain {gain:.3e}", i + 1, spec.iterations);
        if gain <= spec.epsilon {
            break;
        }
    }
    Ok((grid, true))
}

fn cmd_dp_build(cfg: &RunConfig, beta: Option<&str>, iters: Option<usize>, out: Option<PathBuf>) -> Result<Status> {
    let spec = grid_for(cfg, beta, iters)?;
    let out = out.unwrap_or_else(|| cache_path(&cfg.table_dir, &spec));
    let started = Instant::now();
    let (table, complete) = build_table(cfg, &spec, started)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    table.persist(&out)?;
    println!("{} ({} iterations, {:.1?})", out.display(), table.iterations_done(), started.elapsed());
    Ok(if complete { Status::Pass } else { Status::Inconclusive })
}

/// The explicit table, else the cached table for the scale, building it
/// when absent. An incomplete build is used but not cached.
fn obtain_table(cfg: &RunConfig, started: Instant) -> Result<(DPGrid, bool)> {
    if let Some(path) = &cfg.table {
        return Ok((DPGrid::load(path).with_context(|| format!("loading {}", path.display()))?, true));
    }
    let spec = cfg.grid();
    let path = cache_path(&cfg.table_dir, &spec);
    if let Ok(t) = DPGrid::load_expecting(&path, spec.n) {
        return Ok((t, true));
    }
    eprintln!("building {:?} table into {}", cfg.scale, path.display());
    let (table, complete) = build_table(cfg, &spec, started)?;
    if complete {
        fs::create_dir_all(&cfg.table_dir)?;
        table.persist(&path)?;
    }
    Ok((table, complete))
}

fn load_table(cfg: &RunConfig) -> Result<DPGrid> {
    match &cfg.table {
        Some(path) => DPGrid::load(path).with_context(|| format!("loading {}", path.display())),
        None => {
            let spec = cfg.grid();
            let path = cache_path(&cfg.table_dir, &spec);
            DPGrid::load_expecting(&path, spec.n)
                .with_context(|| format!("no table at {}; run `radsum dp build` or pass --table", path.display()))
        }
    }
}

#[derive(Serialize)]
struct RoundReport {
    d: usize,
    survivors: usize,
    unresolved: usize,
    tested: u64,
    discarded: u64,
    conclusive: bool,
    envelope: Option<Vec<Interval>>,
}

#[derive(Serialize)]
struct ExpectationReport {
    description: String,
    met: bool,
}

#[derive(Serialize)]
struct SearchReport {
    name: String,
    threshold: String,
    target: String,
    depth: usize,
    rounds: Vec<RoundReport>,
    expectations: Vec<ExpectationReport>,
    verdict: Verdict,
}

fn resolve_case(cfg: &RunConfig, case: &Path) -> PathBuf {
    match &cfg.case_dir {
        Some(dir) if !case.exists() => {
            let joined = dir.join(case);
            if joined.extension().is_none() {
                joined.with_extension("case")
            } else {
                joined
            }
        }
        _ => case.to_path_buf(),
    }
}

fn cmd_search(cfg: &RunConfig, case: &Path, out: Option<PathBuf>) -> Result<Status> {
    let path = resolve_case(cfg, case);
    let case = CaseFile::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let started = Instant::now();
    let (table, complete) = obtain_table(cfg, started)?;
    let mut config = case.search_config();
    if let Some(b) = cfg.search_budget {
        config.budget = b;
    }
    let runs = feedback_iterate(&config, &table, &case.constraint_set(), &case.prior, case.rounds)?;
    let last = runs.last().expect("at least one round");
    let expectations: Vec<_> = case.check(last).into_iter().map(|e| ExpectationReport { description: e.description, met: e.met }).collect();
    let verdict = if !last.conclusive || !complete {
        Verdict::Inconclusive
    } else if expectations.iter().all(|e| e.met) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let report = SearchReport {
        name: case.name.clone(),
        threshold: case.threshold.to_string(),
        target: case.target.to_string(),
        depth: case.depth,
        rounds: runs
            .iter()
            .map(|r| RoundReport {
                d: r.d,
                survivors: r.survivors.len(),
                unresolved: r.unresolved.len(),
                tested: r.stats.tested,
                discarded: r.stats.discarded,
                conclusive: r.conclusive,
                envelope: r.envelope.clone(),
            })
            .collect(),
        expectations,
        verdict,
    };
    for r in &report.rounds {
        println!("d = {:>5}: {} survivors, {} unresolved, {} tested", r.d, r.survivors, r.unresolved, r.tested);
    }
    for e in &report.expectations {
        println!("[{}] {}", if e.met { "met" } else { "NOT MET" }, e.description);
    }
    println!("verdict: {verdict}");
    let out = out.unwrap_or_else(|| cfg.out_dir.join(format!("{}.search.json", case.name)));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(Status::of([verdict]))
}

fn out_of_time(id: CaseId) -> CaseReport {
    CaseReport {
        id,
        title: id.title().to_string(),
        steps: vec![Step {
            name: "time budget".into(),
            expected: None,
            computed: "exhausted before this case ran".into(),
            verdict: StepVerdict::Inconclusive,
        }],
        verdict: Verdict::Inconclusive,
    }
}

fn cmd_reproduce(cfg: &RunConfig, which: &str) -> Result<Status> {
    let ids: Vec<CaseId> = if which.eq_ignore_ascii_case("all") {
        CaseId::ALL.to_vec()
    } else {
        vec![which.parse().map_err(|e| anyhow!("{e}"))?]
    };
    let started = Instant::now();
    let table = if ids.contains(&CaseId::Sqrt7) { Some(obtain_table(cfg, started)?) } else { None };
    let ctx = CaseContext { table: table.as_ref().map(|t| &t.0), samples: cfg.samples, seed: cfg.seed };
    let mut verdicts = Vec::new();
    for id in ids {
        let mut report = if cfg.time_budget.is_some_and(|b| started.elapsed() > b) { out_of_time(id) } else { run_case(id, &ctx) };
        if id == CaseId::Sqrt7 && table.as_ref().is_some_and(|t| !t.1) && report.verdict == Verdict::Pass {
            report.verdict = Verdict::Inconclusive;
        }
        write_report(&cfg.out_dir, &report)?;
        print!("{}", render_text(&report));
        verdicts.push(report.verdict);
    }
    Ok(Status::of(verdicts))
}

fn cmd_report(dir: &Path) -> Result<Status> {
    let summary = summarize_dir(dir)?;
    let text = render_summary(&summary);
    fs::write(dir.join("summary.txt"), &text)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    print!("{text}");
    Ok(if summary.passed() {
        Status::Pass
    } else if summary.inconclusive() {
        Status::Inconclusive
    } else {
        Status::Fail
    })
}
