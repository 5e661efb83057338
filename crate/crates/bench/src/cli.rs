//! The `ttr` command line.
//!
//! Results go to stdout as `key=value` lines; failures print a single
//! `error: kind=<kind> message=<text>` line on stderr and exit nonzero.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ttr_core::instance_gen::{generate_batch, GenConfig};
use ttr_core::io::{read_instance, read_solution, to_text, write_instance, write_solution};
use ttr_core::lp::export_lp;
use ttr_core::objective::objective;
use ttr_core::oracle::{oracle_search, DEFAULT_GUARD};
use ttr_core::{validate, F64Objective, Instance, LpExportConfig, Profile, TimetableConfig};
use ttr_neural::{load_checkpoint, save_checkpoint, CheckpointMeta};
use ttr_rl::train::{read_curve, write_curve};
use ttr_rl::{train, TrainConfig};

use crate::error::BenchError;
use crate::eval::{default_threads, evaluate, Baseline};
use crate::method::{ensure_feasible, Method};
use crate::plot;
use crate::report::EvalReport;

const SEED_ENV: &str = "TTR_SEED";

#[derive(Debug, Parser)]
#[command(name = "ttr", version, about = "Train timetable rescheduling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random instances from the bundled seed timetable.
    Generate(GenerateArgs),
    /// Train a policy stage and write a checkpoint.
    Train(TrainArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Compare methods over a set of instances.
    Evaluate(EvaluateArgs),
    /// Check a solution against an instance.
    Validate(ValidateArgs),
    /// Exhaustive search over departure orders.
    Oracle(OracleArgs),
    /// Write the mixed-integer model in LP format.
    ExportLp(ExportLpArgs),
    /// Emit CSV series for plotting.
    PlotData(PlotArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5)]
    stations: usize,
    #[arg(long, default_value_t = 5)]
    trains: usize,
    #[arg(long, default_value_t = 20.0)]
    tau1: f64,
    #[arg(long, default_value_t = 60)]
    tau2: i64,
    #[arg(long, default_value_t = 0.3)]
    tau3: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Instance `n` uses seed `seed + n`.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// TOML training configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    stage: Option<u8>,
    /// Stage-1 checkpoint, required for stage 2.
    #[arg(long)]
    teacher: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    /// Learning curve CSV; defaults to the checkpoint path with `.curve.csv`.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// `fcfs`, `fsfs` or a checkpoint path.
    #[arg(long)]
    policy: String,
    #[arg(long)]
    instance: PathBuf,
    /// Local-search iterations applied afterwards.
    #[arg(long, default_value_t = 0)]
    local_search: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Methods to compare: `fcfs`, `fsfs` or checkpoint paths.
    #[arg(long, num_args = 1.., required = true)]
    policy: Vec<String>,
    /// An instance file or a directory of them.
    #[arg(long)]
    instances: PathBuf,
    /// `oracle`, or a CSV of known objectives with `instance,objective` columns.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long, default_value_t = 0)]
    local_search: usize,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: u128,
    #[arg(long)]
    threads: Option<usize>,
    /// Per-instance CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, default_value = "operational")]
    profile: Profile,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportLpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "strict-milp")]
    profile: Profile,
    /// Defaults to a value safe for the instance horizon.
    #[arg(long)]
    big_m: Option<i64>,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct PlotSource {
    /// Evaluation report: emits per-method aggregates.
    #[arg(long, group = "source")]
    report: Option<PathBuf>,
    /// Learning curve written by `train`.
    #[arg(long, group = "source")]
    curve: Option<PathBuf>,
    /// Solution to draw; needs `--instance`.
    #[arg(long, group = "source", requires = "instance")]
    solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    source: PlotSource,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (program name first), runs the command and reports errors.
pub fn main<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", BenchError::Usage(first.to_string()).line());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(if matches!(e, BenchError::Usage(_)) { 2 } else { 1 })
        }
    }
}

fn run(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train_cmd(a),
        Command::Solve(a) => solve(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::ExportLp(a) => export(a),
        Command::PlotData(a) => plot_data(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path).map(BufWriter::new).map_err(|e| BenchError::file(path, e))
}

fn open(path: &Path) -> Result<File, BenchError> {
    File::open(path).map_err(|e| BenchError::file(path, e))
}

fn generate(a: GenerateArgs) -> Result<(), BenchError> {
    let cfg = GenConfig {
        stations: a.stations,
        trains: a.trains,
        tau1: a.tau1,
        tau2: a.tau2,
        tau3: a.tau3,
        seed: a.seed,
        count: a.count,
    };
    let batch = generate_batch(&cfg)?;
    fs::create_dir_all(&a.out).map_err(|e| BenchError::file(&a.out, e))?;
    for (n, inst) in batch.iter().enumerate() {
        write_instance(a.out.join(format!("instance_{n:04}.toml")), inst)?;
    }
    let manifest = a.out.join("manifest.toml");
    fs::write(&manifest, to_text(&cfg)?).map_err(|e| BenchError::file(&manifest, e))?;
    println!("generated={} out={}", batch.len(), a.out.display());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<(), BenchError> {
    let mut cfg = match &a.config {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = a.stage {
        cfg.stage = s;
    }
    if let Some(n) = a.episodes {
        cfg.episodes = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let teacher = a.teacher.as_ref().map(load_checkpoint).transpose()?.map(|(p, _)| p);
    let outcome = train(&cfg, teacher.as_ref(), |p| {
        log::info!("episode {} validation mean J {:.3}", p.episode, p.mean_objective)
    })?;
    let meta = CheckpointMeta { seed: cfg.seed, stage: cfg.stage, episodes: outcome.episodes };
    save_checkpoint(&a.out, &outcome.params, meta)?;
    let curve_path = a.curve.unwrap_or_else(|| a.out.with_extension("curve.csv"));
    write_curve(create(&curve_path)?, &outcome.curve)?;
    let last = outcome.curve.last().map_or(f64::NAN, |p| p.mean_objective);
    println!(
        "stage={} episodes={} decisions={} validation_objective={last:.4} checkpoint={} curve={}",
        cfg.stage,
        outcome.episodes,
        outcome.decisions,
        a.out.display(),
        curve_path.display()
    );
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), BenchError> {
    let method = Method::parse(&a.policy, a.local_search)?;
    let inst = read_instance(&a.instance)?;
    let solved = method.solve(&inst)?;
    let Some(sched) = solved.schedule else {
        return Err(BenchError::Infeasible { count: 1, first: format!("{} has no feasible departure order", method.name()) });
    };
    ensure_feasible(&sched, &inst)?;
    if let Some(out) = &a.out {
        write_solution(out, &sched.solution)?;
    }
    println!(
        "method={} objective={} wall_ms={:.3}",
        method.name(),
        solved.objective.unwrap_or(f64::NAN),
        solved.wall_ms
    );
    Ok(())
}

/// `(name, instance)` pairs from a file or the `.toml` files of a directory,
/// sorted by name; `manifest.toml` is skipped.
pub fn load_instances(path: &Path) -> Result<Vec<(String, Instance)>, BenchError> {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if path.is_file() {
        return Ok(vec![(stem(path), read_instance(path)?)]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| BenchError::file(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml") && p.file_name().is_some_and(|n| n != "manifest.toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::Usage(format!("no instance files in {}", path.display())));
    }
    files.iter().map(|p| Ok((stem(p), read_instance(p)?))).collect()
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), BenchError> {
    let methods = a.policy.iter().map(|p| Method::parse(p, a.local_search)).collect::<Result<Vec<_>, _>>()?;
    let instances = load_instances(&a.instances)?;
    let baseline = match a.baseline.as_deref() {
        None => Baseline::None,
        Some("oracle") => Baseline::Oracle { guard: a.guard },
        Some(path) => Baseline::read_csv(open(Path::new(path))?)?,
    };
    let report = evaluate(&instances, &methods, &baseline, a.threads.unwrap_or_else(default_threads))?;
    if let Some(out) = &a.report {
        report.write_csv(create(out)?)?;
    }
    let fmt = |x: Option<f64>, scale: f64| x.map_or("na".to_string(), |v| format!("{:.2}", v * scale));
    for s in report.summaries() {
        println!(
            "method={} instances={} infeasible={} mean_objective={} gap_percent={} mean_wall_ms={:.3}",
            s.method,
            s.instances,
            s.infeasible,
            fmt(s.mean_objective, 1.0),
            fmt(s.gap, 100.0),
            s.mean_wall_ms
        );
    }
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<(), BenchError> {
    let inst = read_instance(&a.instance)?;
    let sol = read_solution(&a.solution)?;
    let violations = validate(&sol, &inst, a.profile)?;
    for v in &violations {
        println!("violation {v}");
    }
    if let Some(first) = violations.first() {
        return Err(BenchError::Infeasible { count: violations.len(), first: first.to_string() });
    }
    let j = objective(&sol, &inst, &F64Objective::standard())?;
    println!("violations=0 objective={j}");
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), BenchError> {
    let inst = read_instance(&a.instance)?;
    let r = oracle_search(&inst, TimetableConfig::default(), &F64Objective::standard(), a.guard)?;
    if let Some(out) = &a.out {
        write_solution(out, &r.schedule.solution)?;
    }
    println!("objective={} leaves={}", r.objective, r.leaves);
    Ok(())
}

fn export(a: ExportLpArgs) -> Result<(), BenchError> {
    let inst = read_instance(&a.instance)?;
    let lp = match a.big_m {
        Some(big_m) => LpExportConfig { big_m },
        None => LpExportConfig::for_instance(&inst),
    };
    let mut out = create(&a.out)?;
    let stats = export_lp(&inst, &F64Objective::standard(), &lp, a.profile, &mut out)?;
    out.flush().map_err(|e| BenchError::file(&a.out, e))?;
    println!(
        "variables={} binaries={} constraints={} out={}",
        stats.variables(),
        stats.binaries,
        stats.constraints,
        a.out.display()
    );
    Ok(())
}

fn plot_data(a: PlotArgs) -> Result<(), BenchError> {
    let out = create(&a.out)?;
    let rows = if let Some(path) = &a.source.report {
        let report = EvalReport::read_csv(open(path)?)?;
        plot::write_summary(out, &report)?;
        report.methods().len()
    } else if let Some(path) = &a.source.curve {
        let curve = read_curve(open(path)?)?;
        plot::write_curve(out, &curve)?;
        curve.len()
    } else {
        let (Some(sol_path), Some(inst_path)) = (&a.source.solution, &a.instance) else {
            return Err(BenchError::Usage("--solution needs --instance".into()));
        };
        let inst = read_instance(inst_path)?;
        let sol = read_solution(sol_path)?;
        sol.check_dimensions(&inst)?;
        let series = plot::timetable_series(&inst, &sol);
        plot::write_rows(out, &series)?;
        series.len()
    };
    println!("rows={rows} out={}", a.out.display());
    io::stdout().flush().ok();
    Ok(())
}
