//! Command-line front end for the `cecsp` scheduling toolkit: generate
//! instances, check and solve them, validate schedules, export the integer
//! model, and run whole directories as a batch.

mod batch;
mod gantt;
mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use cecsp::exact::{build_milp, enumerate_exact, EnumerateOptions, ExactOutcome};
use cecsp::feasibility::check_feasibility;
use cecsp::generator::{generate, GenConfig};
use cecsp::model::{
    implicit_precedences, validate_schedule, Instance, Schedule, ScheduleFile,
};
use cecsp::search::{greedy_initial_order, simulated_annealing, SAConfig, SearchError};

use record::RunRecord;

/// Tolerance applied when deciding whether a solved schedule is feasible.
pub(crate) const FEASIBILITY_TOL: f64 = 1e-6;

const EXIT_HELP: &str = "Exit codes:
  0  success
  2  usage error
  3  I/O failure
  4  malformed input
  5  negative verdict (failed check or infeasible result)
  6  size guard triggered";

#[derive(Parser)]
#[command(
    name = "cecsp",
    version,
    about = "Toolkit for scheduling continuously divisible work under a shared capacity",
    after_help = EXIT_HELP,
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances as JSON files
    Generate(GenerateArgs),
    /// Run the max-flow necessary feasibility check on an instance
    Check(CheckArgs),
    /// Solve an instance with a greedy start plus simulated annealing
    Solve(SolveArgs),
    /// Solve a small instance exactly by enumerating event orders
    Exact(ExactArgs),
    /// Write the mixed-integer model of an instance in LP format
    Export(ExportArgs),
    /// Check a schedule file against an instance
    Validate(ValidateArgs),
    /// Solve every instance in a directory and write a CSV summary
    Batch(batch::BatchArgs),
}

/// A command failure carrying its process exit code.
pub(crate) struct Fail {
    pub code: u8,
    pub message: String,
}

impl Fail {
    pub fn usage(message: impl Into<String>) -> Self {
        Fail { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Fail { code: 3, message: message.into() }
    }

    pub fn format(message: impl Into<String>) -> Self {
        Fail { code: 4, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Fail { code: 1, message: message.into() }
    }
}

pub(crate) const VERDICT_FAIL: u8 = 5;
const GUARD: u8 = 6;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Check(args) => cmd_check(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Export(args) => cmd_export(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Batch(args) => batch::cmd_batch(args),
    };
    match result {
        Ok(code) => code,
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}

pub(crate) fn read_instance(path: &Path) -> Result<Instance, Fail> {
    let text = fs::read_to_string(path)
        .map_err(|e| Fail::io(format!("{}: {e}", path.display())))?;
    Instance::from_json_str(&text)
        .map_err(|e| Fail::format(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Fail> {
    fs::write(path, contents).map_err(|e| Fail::io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct GenerateArgs {
    /// Jobs per instance
    #[arg(long)]
    n: usize,
    /// Shared resource capacity
    #[arg(long)]
    capacity: f64,
    /// How many instances to generate
    #[arg(long, default_value_t = 1)]
    count: u32,
    /// Pair the largest weights with the latest deadlines
    #[arg(long)]
    adversarial: bool,
    /// Draw a constant objective offset per job
    #[arg(long)]
    with_offsets: bool,
    /// Base seed; instance i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [defaults to $CECSP_OUT_DIR, then .]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode, Fail> {
    let dir = args.out_dir.unwrap_or_else(|| {
        std::env::var_os("CECSP_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    fs::create_dir_all(&dir).map_err(|e| Fail::io(format!("{}: {e}", dir.display())))?;
    for i in 0..args.count {
        let mut config =
            GenConfig::preset(args.n, args.capacity, args.adversarial, args.seed + u64::from(i));
        config.with_offsets = args.with_offsets;
        let (inst, log) = generate(&config).map_err(|e| Fail::usage(e.to_string()))?;
        let name = format!(
            "n{}_p{:.2}_a{}_i{}.json",
            args.n,
            args.capacity,
            u8::from(args.adversarial),
            i
        );
        let path = dir.join(name);
        write_file(&path, &inst.to_json_string())?;
        for note in &log.notes {
            eprintln!("note: {}: {note}", path.display());
        }
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CheckArgs {
    /// Instance file
    instance: PathBuf,
    /// Print a JSON report instead of text
    #[arg(long)]
    json: bool,
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, Fail> {
    let inst = read_instance(&args.instance)?;
    let report = check_feasibility(&inst);
    if args.json {
        let shortfalls: Vec<_> = report
            .shortfalls
            .iter()
            .map(|(job, missing)| serde_json::json!({ "job": job, "missing": missing }))
            .collect();
        let out = serde_json::json!({
            "passes": report.passes,
            "max_flow": report.max_flow,
            "demand": report.demand,
            "shortfalls": shortfalls,
        });
        println!("{out}");
    } else {
        println!(
            "routable energy {:.6} of {:.6} demanded",
            report.max_flow, report.demand
        );
        for (job, missing) in &report.shortfalls {
            println!("  job {}: {missing:.6} cannot be placed", job.index());
        }
        println!(
            "feasibility check: {}",
            if report.passes { "PASS" } else { "FAIL" }
        );
    }
    Ok(if report.passes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(VERDICT_FAIL)
    })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SolveArgs {
    /// Instance file
    instance: PathBuf,
    /// Random seed for the annealer
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accepted-move budget [default: scaled to the instance]
    #[arg(long)]
    iterations: Option<u64>,
    /// Wall-clock limit in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// Never restart after exhausting the neighborhood
    #[arg(long)]
    no_restart: bool,
    /// Write the best schedule to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSON record of the run to this file
    #[arg(long)]
    record: Option<PathBuf>,
    /// Write an SVG chart of the best schedule to this file
    #[arg(long)]
    gantt: Option<PathBuf>,
    /// Print a JSON summary instead of text
    #[arg(long)]
    json: bool,
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Fail> {
    let inst = read_instance(&args.instance)?;
    let prec = implicit_precedences(&inst);
    let initial = greedy_initial_order(&inst);
    let mut config = SAConfig::defaults_for(inst.n());
    config.seed = args.seed;
    if let Some(iterations) = args.iterations {
        config.max_iterations = iterations;
    }
    if args.no_restart {
        config.restart.enabled = false;
    }
    let limit = args.time_limit.map(Duration::from_secs_f64);
    let result = simulated_annealing(&inst, &prec, &initial, &config, limit).map_err(
        |e| match e {
            SearchError::InvalidConfig(_) => Fail::usage(e.to_string()),
            other => Fail::internal(other.to_string()),
        },
    )?;
    let feasible = result.feasible(FEASIBILITY_TOL);

    let mut schedule_path = None;
    match &result.best_schedule {
        Some(schedule) => {
            if let Some(path) = &args.out {
                let file = schedule.to_file(&result.best_order);
                let text = serde_json::to_string_pretty(&file)
                    .map_err(|e| Fail::internal(e.to_string()))?;
                write_file(path, &format!("{text}\n"))?;
                schedule_path = Some(path.display().to_string());
            }
            if let Some(path) = &args.gantt {
                let svg = gantt::render(&inst, &result.best_order, schedule);
                write_file(path, &svg)?;
            }
        }
        None => {
            if args.out.is_some() || args.gantt.is_some() {
                eprintln!(
                    "warning: nothing to write; the best order still has a release/deadline \
                     conflict"
                );
            }
        }
    }
    if let Some(path) = &args.record {
        let record = RunRecord {
            instance: args.instance.display().to_string(),
            n: inst.n(),
            capacity: inst.capacity(),
            config: &config,
            initial_score: result.initial_score,
            best_score: result.best_score,
            feasible,
            iterations: result.iterations,
            evaluations: result.evaluations,
            restarts: result.restarts,
            wall_seconds: result.wall.as_secs_f64(),
            schedule_path: schedule_path.clone(),
        };
        let text =
            serde_json::to_string_pretty(&record).map_err(|e| Fail::internal(e.to_string()))?;
        write_file(path, &format!("{text}\n"))?;
    }

    if args.json {
        let out = serde_json::json!({
            "instance": args.instance.display().to_string(),
            "n": inst.n(),
            "initial_score": result.initial_score,
            "best_score": result.best_score,
            "feasible": feasible,
            "order": result.best_order.events(),
            "iterations": result.iterations,
            "evaluations": result.evaluations,
            "restarts": result.restarts,
            "wall_seconds": result.wall.as_secs_f64(),
            "schedule_path": schedule_path,
        });
        println!("{out}");
    } else {
        println!("initial order scores {:.6}", result.initial_score);
        println!(
            "best order scores {:.6} ({})",
            result.best_score,
            if feasible { "feasible" } else { "not feasible" }
        );
        println!("order: {}", result.best_order);
        println!(
            "{} accepted moves, {} evaluations, {} restarts in {:.3}s",
            result.iterations,
            result.evaluations,
            result.restarts,
            result.wall.as_secs_f64()
        );
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// exact
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ExactArgs {
    /// Instance file
    instance: PathBuf,
    /// Largest job count to enumerate; bigger instances are exported instead
    #[arg(long, default_value_t = 7)]
    max_n: usize,
    /// Write the optimal schedule to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the integer model when the guard triggers
    /// [default: the instance path with an .lp extension]
    #[arg(long)]
    export: Option<PathBuf>,
    /// Print a JSON summary instead of text
    #[arg(long)]
    json: bool,
}

fn cmd_exact(args: ExactArgs) -> Result<ExitCode, Fail> {
    let inst = read_instance(&args.instance)?;
    if inst.n() > args.max_n {
        let path = args
            .export
            .unwrap_or_else(|| args.instance.with_extension("lp"));
        let milp = build_milp(&inst);
        let mut out = Vec::new();
        milp.write_lp(&mut out).map_err(|e| Fail::internal(e.to_string()))?;
        fs::write(&path, out).map_err(|e| Fail::io(format!("{}: {e}", path.display())))?;
        eprintln!(
            "instance has {} jobs, above the enumeration limit of {}; wrote the integer model \
             to {} for an external solver",
            inst.n(),
            args.max_n,
            path.display()
        );
        if args.json {
            let out = serde_json::json!({
                "outcome": "too-large",
                "n": inst.n(),
                "max_n": args.max_n,
                "exported": path.display().to_string(),
            });
            println!("{out}");
        }
        return Ok(ExitCode::from(GUARD));
    }
    let prec = implicit_precedences(&inst);
    let options = EnumerateOptions { max_jobs: args.max_n };
    let result =
        enumerate_exact(&inst, &prec, options).map_err(|e| Fail::internal(e.to_string()))?;
    match result.outcome {
        ExactOutcome::Optimal(solution) => {
            if let Some(path) = &args.out {
                let file = solution.schedule.to_file(&solution.order);
                let text = serde_json::to_string_pretty(&file)
                    .map_err(|e| Fail::internal(e.to_string()))?;
                write_file(path, &format!("{text}\n"))?;
            }
            if args.json {
                let out = serde_json::json!({
                    "outcome": "optimal",
                    "objective": solution.objective,
                    "order": solution.order.events(),
                    "explored": result.explored,
                });
                println!("{out}");
            } else {
                println!("optimum {:.6}", solution.objective);
                println!("order: {}", solution.order);
                println!("{} orders explored", result.explored);
            }
            Ok(ExitCode::SUCCESS)
        }
        ExactOutcome::Infeasible => {
            if args.json {
                let out = serde_json::json!({
                    "outcome": "infeasible",
                    "explored": result.explored,
                });
                println!("{out}");
            } else {
                println!(
                    "no event order admits a feasible schedule ({} orders explored)",
                    result.explored
                );
            }
            Ok(ExitCode::from(VERDICT_FAIL))
        }
    }
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ExportArgs {
    /// Instance file
    instance: PathBuf,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_export(args: ExportArgs) -> Result<ExitCode, Fail> {
    let inst = read_instance(&args.instance)?;
    let milp = build_milp(&inst);
    let mut text = Vec::new();
    milp.write_lp(&mut text).map_err(|e| Fail::internal(e.to_string()))?;
    match &args.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Fail::io(format!("{}: {e}", path.display())))?;
            println!("{}", path.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&text)
                .map_err(|e| Fail::io(e.to_string()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ValidateArgs {
    /// Schedule file produced by `solve --out` or `exact --out`
    schedule: PathBuf,
    /// Instance the schedule claims to solve
    #[arg(long)]
    instance: PathBuf,
    /// Largest violation still counted as feasible
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Print a JSON report instead of text
    #[arg(long)]
    json: bool,
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, Fail> {
    let inst = read_instance(&args.instance)?;
    let text = fs::read_to_string(&args.schedule)
        .map_err(|e| Fail::io(format!("{}: {e}", args.schedule.display())))?;
    let file: ScheduleFile = serde_json::from_str(&text)
        .map_err(|e| Fail::format(format!("{}: {e}", args.schedule.display())))?;
    let (order, schedule) = Schedule::from_file(file)
        .map_err(|e| Fail::format(format!("{}: {e}", args.schedule.display())))?;
    let report = validate_schedule(&inst, &order, &schedule, args.tolerance)
        .map_err(|e| Fail::format(format!("{}: {e}", args.schedule.display())))?;
    if args.json {
        let violations: Vec<_> = report
            .violations()
            .iter()
            .map(|v| {
                serde_json::json!({
                    "constraint": v.constraint.label(),
                    "job": v.job,
                    "interval": v.interval,
                    "magnitude": v.magnitude,
                })
            })
            .collect();
        let out = serde_json::json!({
            "feasible": report.is_feasible(),
            "tolerance": report.tolerance(),
            "score": schedule.score(),
            "violations": violations,
        });
        println!("{out}");
    } else {
        println!("{report}");
        println!("score {:.6}", schedule.score());
    }
    Ok(if report.is_feasible() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(VERDICT_FAIL)
    })
}
