use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde_json::json;
use uavsched_core::datagen::{self, GenSpec};
use uavsched_core::eat::{self, Assignment};
use uavsched_core::experiment::{self, ExperimentGrid, RunRecord};
use uavsched_core::pso::{self, PriorityRule, PsoConfig};
use uavsched_core::{gantt, io, sample, validate_schedule, PositionKind, ProblemInstance, Schedule, TaskId, TaskType};

use crate::args::{ExperimentArgs, Format, GenerateArgs, InstanceSource, Output, ScheduleArgs, SearchArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Usage,
    Validation,
    Runtime,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

type Result<T> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn or_fail(self, kind: FailureKind) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn or_fail(self, kind: FailureKind) -> Result<T> {
        self.map_err(|e| Failure { kind, error: e.into() })
    }
}

fn fail<T>(kind: FailureKind, msg: String) -> Result<T> {
    Err(Failure { kind, error: anyhow!(msg) })
}

/// Unreadable files are runtime failures; anything that parses wrong or
/// breaks an instance rule is a validation failure.
fn classify_io(e: io::IoError) -> Failure {
    let kind = match e {
        io::IoError::File { .. } => FailureKind::Runtime,
        _ => FailureKind::Validation,
    };
    Failure { kind, error: e.into() }
}

fn load(source: &InstanceSource) -> Result<ProblemInstance> {
    if source.sample {
        return Ok(sample::twelve_task_instance());
    }
    if let Some(path) = &source.instance {
        return io::load_instance(path).map_err(classify_io);
    }
    let path = source.tasks.as_ref().expect("clap enforces one source");
    let map = sample::lab_map();
    let text = io::read_file(path).map_err(classify_io)?;
    let tasks = io::tasks_from_csv(text.as_bytes(), &map).map_err(classify_io)?;
    let uavs = sample::default_uavs(&map);
    let stations = sample::default_stations(&map);
    ProblemInstance::new(map, tasks, uavs, stations).or_fail(FailureKind::Validation)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).or_fail(FailureKind::Runtime)?;
    io::write_file(&dir.join(name), contents).or_fail(FailureKind::Runtime)
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}

fn assignments_json(assignments: &[Assignment], instance: &ProblemInstance) -> serde_json::Value {
    assignments
        .iter()
        .map(|a| {
            json!({
                "task": a.task,
                "uav": instance.uavs()[a.uav].id,
                "start": a.start,
                "end": a.end,
                "recharged_before": a.recharged,
            })
        })
        .collect()
}

fn check_schedule(schedule: &Schedule, instance: &ProblemInstance) -> Result<()> {
    let violations = validate_schedule(schedule, instance);
    if violations.is_empty() {
        return Ok(());
    }
    for v in &violations {
        eprintln!("violation: {v}");
    }
    fail(FailureKind::Validation, format!("schedule has {} constraint violation(s)", violations.len()))
}

fn write_schedule_artifacts(out: &Output, schedule: &Schedule, instance: &ProblemInstance) -> Result<()> {
    if out.wants(Format::Csv) {
        write(&out.out_dir, "schedule.csv", &io::schedule_to_csv(schedule, instance))?;
    }
    if out.wants(Format::Svg) {
        write(&out.out_dir, "schedule.svg", &gantt::gantt_svg(schedule, instance))?;
    }
    Ok(())
}

fn parse_ids(text: &str) -> Result<Vec<u32>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().with_context(|| format!("bad task id `{s}`")).or_fail(FailureKind::Validation))
        .collect()
}

/// Checks `prefix` and appends the missing tasks in topological order.
pub fn complete_sequence(prefix: &[TaskId], instance: &ProblemInstance) -> Result<Vec<TaskId>> {
    let mut seen = std::collections::HashSet::new();
    for &t in prefix {
        if instance.task(t).is_none() {
            return fail(FailureKind::Validation, format!("unknown task {t} in sequence"));
        }
        if !seen.insert(t) {
            return fail(FailureKind::Validation, format!("task {t} appears more than once in the sequence"));
        }
    }
    if let Some((pred, succ)) = instance.graph().first_violation(prefix) {
        return fail(FailureKind::Validation, format!("sequence places task {succ} before its predecessor {pred}"));
    }
    let topo = instance
        .graph()
        .topological_order()
        .ok_or_else(|| Failure { kind: FailureKind::Validation, error: anyhow!("precedence graph is cyclic") })?;
    let mut seq = prefix.to_vec();
    seq.extend(topo.into_iter().filter(|t| !seen.contains(t)));
    Ok(seq)
}

pub fn schedule(args: ScheduleArgs) -> Result<()> {
    let instance = load(&args.source)?;
    let (label, prefix) = if let Some(ids) = &args.sequence {
        ("explicit".to_string(), ids.iter().copied().map(TaskId).collect::<Vec<_>>())
    } else if let Some(path) = &args.sequence_file {
        let text = io::read_file(path).map_err(classify_io)?;
        ("file".to_string(), parse_ids(&text)?.into_iter().map(TaskId).collect())
    } else {
        let name = args.rule.as_deref().unwrap_or("max-rpw");
        let rule: PriorityRule = name.parse().map_err(|e: String| {
            let names: Vec<&str> = PriorityRule::ALL.iter().map(|r| r.slug()).collect();
            Failure { kind: FailureKind::Usage, error: anyhow!("{e}; expected one of {}", names.join(", ")) }
        })?;
        (rule.slug().to_string(), rule.ordering(&instance).or_fail(FailureKind::Validation)?)
    };
    let sequence = complete_sequence(&prefix, &instance)?;
    let (schedule, assignments) = eat::build_with_assignments(&sequence, &instance).or_fail(FailureKind::Runtime)?;

    for a in &assignments {
        let marker = if a.recharged { " (after recharge)" } else { "" };
        println!("task {:>4} -> {:<8} {:>7} .. {:<7}{marker}", a.task, instance.uavs()[a.uav].id, a.start, a.end);
    }
    println!("makespan: {}", schedule.makespan());

    write_schedule_artifacts(&args.output, &schedule, &instance)?;
    if args.output.wants(Format::Json) {
        let doc = json!({
            "source": label,
            "sequence": sequence,
            "makespan": schedule.makespan(),
            "assignments": assignments_json(&assignments, &instance),
        });
        write(&args.output.out_dir, "schedule.json", &to_json(&doc))?;
    }
    check_schedule(&schedule, &instance)
}

fn jobs(jobs: Option<usize>) -> Result<Option<usize>> {
    if jobs == Some(0) {
        return fail(FailureKind::Usage, "--jobs must be at least 1".into());
    }
    Ok(jobs)
}

pub fn search(args: SearchArgs) -> Result<()> {
    let instance = load(&args.source)?;
    let config = PsoConfig {
        c1: args.c1,
        c2: args.c2,
        swarm_size: args.particles,
        max_iterations: args.max_iter,
        convergence_window: args.window,
        initial_velocity_pairs: None,
        seed: args.seed,
    };
    config.validate().or_fail(FailureKind::Usage)?;
    let jobs = jobs(args.jobs)?;
    let report = experiment::run_in_pool(jobs, || pso::run_pso(&instance, &config))
        .or_fail(FailureKind::Runtime)?
        .or_fail(FailureKind::Runtime)?;

    println!(
        "best makespan: {} (initial best {}), {} iterations, last improvement at {}, converged: {}",
        report.best_makespan,
        report.initial_best_makespan,
        report.iterations,
        report.convergence_iteration,
        report.converged
    );
    println!("wall clock: {:.1} ms", report.wall_clock_ms);

    let out = &args.output;
    write_schedule_artifacts(out, &report.best_schedule, &instance)?;
    if out.wants(Format::Csv) {
        write(&out.out_dir, "history.csv", &io::history_to_csv(&report.history))?;
    }
    if out.wants(Format::Json) {
        let mut doc = serde_json::to_value(&report).expect("report serializes");
        if out.timings {
            doc["wall_clock_ms"] = json!(report.wall_clock_ms);
        }
        write(&out.out_dir, "report.json", &to_json(&doc))?;
    }
    check_schedule(&report.best_schedule, &instance)
}

pub fn experiment(args: ExperimentArgs) -> Result<()> {
    let instances: Vec<(String, ProblemInstance)> = if let Some(sizes) = &args.sizes {
        sizes
            .iter()
            .map(|&n| {
                let spec = GenSpec { n_tasks: n, seed: args.gen_seed, ..GenSpec::default() };
                datagen::generate_lab_instance(&spec).map(|i| (format!("n{n}"), i)).or_fail(FailureKind::Validation)
            })
            .collect::<Result<_>>()?
    } else if !args.instance.is_empty() {
        args.instance
            .iter()
            .map(|p| {
                let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                io::load_instance(p).map(|i| (name, i)).map_err(classify_io)
            })
            .collect::<Result<_>>()?
    } else {
        return fail(FailureKind::Usage, "give --instance files or --sizes".into());
    };
    let grid = ExperimentGrid {
        c1: args.c1.clone(),
        c2: args.c2.clone(),
        particles: args.particles.clone(),
        repetitions: args.reps,
        base_seed: args.seed,
        max_iterations: args.max_iter,
        convergence_window: args.window,
    };
    grid.validate().or_fail(FailureKind::Usage)?;
    let jobs = jobs(args.jobs)?;
    println!("running {} runs", grid.total_runs(instances.len()));
    let records = experiment::run_experiment(&grid, &instances, jobs).or_fail(FailureKind::Runtime)?;
    let summaries = experiment::summarize(&records);

    print_summary(&summaries, &records);

    let out = &args.output;
    if out.wants(Format::Csv) {
        write(&out.out_dir, "runs.csv", &experiment::raw_runs_csv(&records, out.timings))?;
        write(&out.out_dir, "summary.csv", &experiment::summary_csv(&summaries))?;
    }
    if out.wants(Format::Json) {
        let doc = json!({ "grid": grid, "total_runs": records.len(), "cells": summaries });
        write(&out.out_dir, "summary.json", &to_json(&doc))?;
    }
    if out.wants(Format::Svg) {
        write(&out.out_dir, "makespan.svg", &experiment::makespan_plot_svg(&records, 5))?;
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return fail(FailureKind::Runtime, format!("{failed} run(s) failed; see the error column of runs.csv"));
    }
    Ok(())
}

fn print_summary(summaries: &[experiment::CellSummary], records: &[RunRecord]) {
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    println!(
        "{:<14} {:>5} {:>4} {:>4} {:>5} {:>5} {:>8} {:>8} {:>10} {:>10} {:>9}",
        "instance", "tasks", "c1", "c2", "swarm", "runs", "min", "max", "average", "median", "mean ms"
    );
    for s in summaries {
        let times: Vec<f64> = records
            .iter()
            .filter(|r| r.instance == s.instance && r.c1 == s.c1 && r.c2 == s.c2 && r.particles == s.particles)
            .map(|r| r.wall_clock_ms)
            .collect();
        let mean_ms = times.iter().sum::<f64>() / times.len().max(1) as f64;
        println!(
            "{:<14} {:>5} {:>4} {:>4} {:>5} {:>5} {:>8} {:>8} {:>10} {:>10} {:>9.1}",
            s.instance,
            s.n_tasks,
            s.c1,
            s.c2,
            s.particles,
            s.runs,
            s.min.map_or_else(|| "-".into(), |v| v.to_string()),
            s.max.map_or_else(|| "-".into(), |v| v.to_string()),
            fmt_opt(s.average),
            fmt_opt(s.median),
            mean_ms
        );
        if let (Some(r), true) = (experiment::reference_for(s.n_tasks), s.c1 == 1.0 && s.c2 == 2.0 && s.particles == 40) {
            println!(
                "{:<14} {:>5} {:>4} {:>4} {:>5} {:>5} {:>8} {:>8} {:>10.2} {:>10.2} {:>9.1}",
                "  published", r.n_tasks, 1, 2, 40, 20, r.min, r.max, r.average, r.median, r.mean_ms
            );
        }
    }
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let weights: [u32; 3] = args
        .weights
        .as_slice()
        .try_into()
        .map_err(|_| Failure { kind: FailureKind::Usage, error: anyhow!("--weights takes exactly three values") })?;
    let spec = GenSpec {
        n_tasks: args.n_tasks,
        max_predecessors: args.max_preds,
        type_weights: weights,
        seed: args.seed,
        ..GenSpec::default()
    };
    let instance = match &args.map {
        None => datagen::generate_lab_instance(&spec),
        Some(path) => {
            let map = io::map_from_json(&io::read_file(path).map_err(classify_io)?).map_err(classify_io)?;
            if !map.positions().iter().any(|p| p.kind == PositionKind::Recharge) {
                return fail(FailureKind::Validation, "map has no recharge positions".into());
            }
            let uavs = sample::default_uavs(&map);
            let stations = sample::default_stations(&map);
            datagen::generate_instance(&spec, map, uavs, stations)
        }
    }
    .or_fail(FailureKind::Validation)?;

    let text = io::instance_to_json(&instance);
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| args.out_dir.join(format!("instance-n{}-s{}.json", args.n_tasks, args.seed)));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).or_fail(FailureKind::Runtime)?;
    }
    io::write_file(&path, &text).or_fail(FailureKind::Runtime)?;

    // Reload to make sure the file passes every load check.
    io::load_instance(&path).map_err(classify_io)?;
    let count = |k: TaskType| instance.tasks().iter().filter(|t| t.task_type == k).count();
    println!(
        "wrote {}: {} tasks ({} single inspection, {} compound inspection, {} material handling), {} precedence edges, {} UAVs, {} stations; all load checks passed",
        path.display(),
        instance.tasks().len(),
        count(TaskType::SingleInspection),
        count(TaskType::CompoundInspection),
        count(TaskType::MaterialHandling),
        instance.graph().edge_count(),
        instance.uavs().len(),
        instance.stations().len()
    );
    Ok(())
}
