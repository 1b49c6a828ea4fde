//! The `batch` subcommand: solve every instance in a directory and summarize
//! the results as one CSV row per instance.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;

use cecsp::exact::{enumerate_exact, EnumerateOptions, ExactOutcome};
use cecsp::feasibility::check_feasibility;
use cecsp::model::implicit_precedences;
use cecsp::search::{greedy_initial_order, simulated_annealing, SAConfig};

use crate::{read_instance, Fail, FEASIBILITY_TOL};

#[derive(Args)]
pub struct BatchArgs {
    /// Directory holding instance files named like n3_p40.00_a0_i0.json
    dir: PathBuf,
    /// CSV file to write
    #[arg(long, default_value = "batch.csv")]
    out: PathBuf,
    /// Base seed; the i-th instance (sorted by name) uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses one per core
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Accepted-move budget per instance
    #[arg(long, default_value_t = 1500)]
    iterations: u64,
    /// Also solve instances with at most this many jobs exactly; 0 disables
    #[arg(long, default_value_t = 0)]
    exact_max_n: usize,
    /// CSV with columns file,best_known to merge into the output
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Zero out wall-clock columns so reruns produce identical bytes
    #[arg(long)]
    stable_output: bool,
}

/// Fields recovered from a generated instance's file name.
struct Meta {
    name: String,
    n: String,
    p: String,
    adv: String,
    idx: String,
}

fn parse_meta(name: &str) -> Option<Meta> {
    let stem = name.strip_suffix(".json")?;
    let mut parts = stem.split('_');
    let n = parts.next()?.strip_prefix('n')?;
    let p = parts.next()?.strip_prefix('p')?;
    let adv = parts.next()?.strip_prefix('a')?;
    let idx = parts.next()?.strip_prefix('i')?;
    if parts.next().is_some()
        || n.parse::<usize>().is_err()
        || p.parse::<f64>().is_err()
        || adv.parse::<u8>().is_err()
        || idx.parse::<u64>().is_err()
    {
        return None;
    }
    Some(Meta {
        name: name.to_string(),
        n: n.to_string(),
        p: p.to_string(),
        adv: adv.to_string(),
        idx: idx.to_string(),
    })
}

struct Row {
    meta: Meta,
    flow_feas: bool,
    sa_time: f64,
    sa_obj: f64,
    sa_feasible: bool,
    init_obj: f64,
    /// Wall time and objective of the exact run, when one happened; an
    /// objective of `None` means every order was infeasible.
    exact: Option<(f64, Option<f64>)>,
}

fn fmt_time(seconds: f64, stable: bool) -> String {
    if stable {
        "0.000".to_string()
    } else {
        format!("{seconds:.3}")
    }
}

fn fmt_obj(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.6}")
    } else {
        "inf".to_string()
    }
}

fn read_reference(path: &Path) -> Result<HashMap<String, String>, Fail> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Fail::io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Fail::format(format!("{}: {e}", path.display())))?;
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (file_col, best_col) = match (find("file"), find("best_known")) {
        (Some(f), Some(b)) => (f, b),
        _ => {
            return Err(Fail::format(format!(
                "{}: expected columns `file` and `best_known`",
                path.display()
            )))
        }
    };
    let mut map = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Fail::format(format!("{}: {e}", path.display())))?;
        match (record.get(file_col), record.get(best_col)) {
            (Some(file), Some(best)) => {
                map.insert(file.to_string(), best.to_string());
            }
            _ => {
                return Err(Fail::format(format!(
                    "{}: short record in reference file",
                    path.display()
                )))
            }
        }
    }
    Ok(map)
}

fn solve_one(args: &BatchArgs, index: usize, meta: Meta, path: &Path) -> Result<Row, Fail> {
    let inst = read_instance(path)?;
    let flow_feas = check_feasibility(&inst).passes;

    let prec = implicit_precedences(&inst);
    let initial = greedy_initial_order(&inst);
    let mut config = SAConfig::defaults_for(inst.n());
    config.max_iterations = args.iterations;
    config.restart.enabled = false;
    config.seed = args.seed + index as u64;
    let started = Instant::now();
    let result = simulated_annealing(&inst, &prec, &initial, &config, None)
        .map_err(|e| Fail::internal(format!("{}: {e}", path.display())))?;
    let sa_time = started.elapsed().as_secs_f64();

    let exact = if args.exact_max_n > 0 && inst.n() <= args.exact_max_n {
        let options = EnumerateOptions { max_jobs: args.exact_max_n };
        let started = Instant::now();
        let outcome = enumerate_exact(&inst, &prec, options)
            .map_err(|e| Fail::internal(format!("{}: {e}", path.display())))?
            .outcome;
        let elapsed = started.elapsed().as_secs_f64();
        let objective = match outcome {
            ExactOutcome::Optimal(solution) => Some(solution.objective),
            ExactOutcome::Infeasible => None,
        };
        Some((elapsed, objective))
    } else {
        None
    };

    Ok(Row {
        meta,
        flow_feas,
        sa_time,
        sa_obj: result.best_score,
        sa_feasible: result.feasible(FEASIBILITY_TOL),
        init_obj: result.initial_score,
        exact,
    })
}

pub fn cmd_batch(args: BatchArgs) -> Result<ExitCode, Fail> {
    let reference = args
        .reference
        .as_deref()
        .map(read_reference)
        .transpose()?;

    let mut entries: Vec<(Meta, PathBuf)> = Vec::new();
    let listing = std::fs::read_dir(&args.dir)
        .map_err(|e| Fail::io(format!("{}: {e}", args.dir.display())))?;
    for entry in listing {
        let entry = entry.map_err(|e| Fail::io(format!("{}: {e}", args.dir.display())))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if !name.ends_with(".json") {
            continue;
        }
        match parse_meta(name) {
            Some(meta) => entries.push((meta, path)),
            None => eprintln!("warning: skipping {name}: file name does not follow the n*_p*_a*_i*.json convention"),
        }
    }
    entries.sort_by(|a, b| a.0.name.cmp(&b.0.name));
    if entries.is_empty() {
        return Err(Fail::usage(format!(
            "{}: no instance files found",
            args.dir.display()
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| Fail::internal(e.to_string()))?;
    let rows: Result<Vec<Row>, Fail> = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(index, (meta, path))| {
                let meta = Meta {
                    name: meta.name.clone(),
                    n: meta.n.clone(),
                    p: meta.p.clone(),
                    adv: meta.adv.clone(),
                    idx: meta.idx.clone(),
                };
                solve_one(&args, index, meta, path)
            })
            .collect()
    });
    let rows = rows?;

    let mut writer = csv::Writer::from_path(&args.out)
        .map_err(|e| Fail::io(format!("{}: {e}", args.out.display())))?;
    let mut header = vec![
        "n",
        "P",
        "adv",
        "idx",
        "flow_feas",
        "sa_time",
        "sa_obj",
        "sa_feasible",
        "init_obj",
        "exact_time",
        "exact_obj",
    ];
    if reference.is_some() {
        header.push("best_known");
    }
    writer
        .write_record(&header)
        .map_err(|e| Fail::io(format!("{}: {e}", args.out.display())))?;
    for row in &rows {
        let (exact_time, exact_obj) = match row.exact {
            Some((elapsed, objective)) => (
                fmt_time(elapsed, args.stable_output),
                objective.map_or_else(|| "inf".to_string(), fmt_obj),
            ),
            None => (String::new(), String::new()),
        };
        let mut record = vec![
            row.meta.n.clone(),
            row.meta.p.clone(),
            row.meta.adv.clone(),
            row.meta.idx.clone(),
            u8::from(row.flow_feas).to_string(),
            fmt_time(row.sa_time, args.stable_output),
            fmt_obj(row.sa_obj),
            u8::from(row.sa_feasible).to_string(),
            fmt_obj(row.init_obj),
            exact_time,
            exact_obj,
        ];
        if let Some(reference) = &reference {
            record.push(reference.get(&row.meta.name).cloned().unwrap_or_default());
        }
        writer
            .write_record(&record)
            .map_err(|e| Fail::io(format!("{}: {e}", args.out.display())))?;
    }
    writer
        .flush()
        .map_err(|e| Fail::io(format!("{}: {e}", args.out.display())))?;
    println!("{} ({} rows)", args.out.display(), rows.len());
    Ok(ExitCode::SUCCESS)
}
