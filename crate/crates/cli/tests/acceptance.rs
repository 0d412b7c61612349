//! Acceptance criteria. Runs without the libtest harness so that each
//! criterion prints exactly one PASS/FAIL line; the process fails if any
//! criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavsched_core::datagen::{generate_instance, generate_lab_instance, GenSpec};
use uavsched_core::eat::{build_prefix, build_schedule};
use uavsched_core::experiment::reference_for;
use uavsched_core::pso::{
    apply_swaps, combine_velocity, priority_orderings, run_pso, sequence_difference, PriorityRule, PsoConfig,
    SwapPair, SwapPairList,
};
use uavsched_core::{
    sample, validate_schedule, ActionKind, PosIdx, Position, ProblemInstance, RechargeStation, Schedule, Seconds,
    TaskId, TrajectoryMap, Uav,
};

// Tolerances and thresholds.
const TRACE_RUNTIME_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_INSTANCES: usize = 24;
const ORACLE_MAX_TASKS: usize = 7;
const ORACLE_MATCH_SHARE: f64 = 0.90;
const ORACLE_MAX_GAP: f64 = 0.05;
const ORACLE_RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const INVARIANT_DRAWS: usize = 1000;
const CONVERGENCE_RUNS: usize = 20;
const CONVERGENCE_SHARE: f64 = 0.95;
const CONVERGENCE_BY_ITERATION: usize = 40;
const RUNTIME_LIMIT_10: Duration = Duration::from_secs(2);
const RUNTIME_LIMIT_100: Duration = Duration::from_secs(30);
const BATTERY: Seconds = 1200;
const RECHARGE: Seconds = 2700;

fn ids(v: &[u32]) -> Vec<TaskId> {
    v.iter().copied().map(TaskId).collect()
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, bad: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad.into())
    }
}

// ---------------------------------------------------------------- oracles

/// Every precedence-feasible ordering, by depth-first extension.
fn feasible_orderings(inst: &ProblemInstance) -> Vec<Vec<TaskId>> {
    let preds: HashMap<TaskId, Vec<TaskId>> =
        inst.tasks().iter().map(|t| (t.id, t.predecessors.clone())).collect();
    let mut out = Vec::new();
    let mut seq = Vec::new();
    let mut left: Vec<TaskId> = inst.tasks().iter().map(|t| t.id).collect();
    fn rec(
        preds: &HashMap<TaskId, Vec<TaskId>>,
        seq: &mut Vec<TaskId>,
        left: &mut Vec<TaskId>,
        out: &mut Vec<Vec<TaskId>>,
    ) {
        if left.is_empty() {
            out.push(seq.clone());
            return;
        }
        for i in 0..left.len() {
            let t = left[i];
            if preds[&t].iter().all(|p| seq.contains(p)) {
                left.remove(i);
                seq.push(t);
                rec(preds, seq, left, out);
                seq.pop();
                left.insert(i, t);
            }
        }
    }
    rec(&preds, &mut seq, &mut left, &mut out);
    out
}

fn brute_force_optimum(inst: &ProblemInstance) -> Seconds {
    feasible_orderings(inst)
        .iter()
        .map(|s| build_schedule(s, inst).expect("feasible ordering schedules").makespan())
        .min()
        .unwrap_or(0)
}

fn precedence_ok(inst: &ProblemInstance, seq: &[TaskId]) -> bool {
    let pos: HashMap<TaskId, usize> = seq.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    pos.len() == inst.tasks().len()
        && inst.tasks().iter().all(|t| t.predecessors.iter().all(|p| pos.get(p) < pos.get(&t.id)))
}

/// Uniformly picks among ready tasks at every step.
fn random_feasible_sequence<R: Rng>(inst: &ProblemInstance, rng: &mut R) -> Vec<TaskId> {
    let mut seq: Vec<TaskId> = Vec::new();
    let mut left: Vec<_> = inst.tasks().to_vec();
    while !left.is_empty() {
        let ready: Vec<usize> =
            (0..left.len()).filter(|&i| left[i].predecessors.iter().all(|p| seq.contains(p))).collect();
        let pick = *ready.choose(rng).expect("acyclic");
        seq.push(left.remove(pick).id);
    }
    seq
}

/// Minimal schedule checker written against the problem statement only:
/// precedence on task executions, battery per airborne span, recharge length,
/// continuity of each timeline, position exclusivity during executions and
/// bay capacity. Returns a description of the first problem found.
fn independent_check(inst: &ProblemInstance, sched: &Schedule) -> Option<String> {
    let mut exec: HashMap<TaskId, (usize, Seconds, Seconds)> = HashMap::new();
    for (u, lane) in sched.lanes().iter().enumerate() {
        let uav = &inst.uavs()[u];
        let mut at = uav.initial_pos;
        let mut clock = 0;
        let mut airborne: Seconds = 0;
        for a in lane {
            if a.start != clock {
                return Some(format!("{}: gap/overlap at {clock}..{}", uav.id, a.start));
            }
            if a.from != at {
                return Some(format!("{}: teleport at {}", uav.id, a.start));
            }
            match a.kind {
                ActionKind::Flight | ActionKind::Hover | ActionKind::TaskExec => airborne += a.end - a.start,
                ActionKind::Recharge => {
                    if a.end - a.start != RECHARGE {
                        return Some(format!("{}: recharge of {}s", uav.id, a.end - a.start));
                    }
                    airborne = 0;
                }
                ActionKind::WaitOnGround => {}
            }
            if a.kind == ActionKind::Flight && a.end - a.start != inst.map().flight(a.from, a.to) {
                return Some(format!("{}: flight duration mismatch at {}", uav.id, a.start));
            }
            if airborne > BATTERY {
                return Some(format!("{}: battery {airborne}s at {}", uav.id, a.end));
            }
            if a.kind == ActionKind::TaskExec {
                let t = a.task.expect("execution names its task");
                let task = inst.task(t).expect("known task");
                if a.end - a.start != task.proc_time || a.from != task.start || a.to != task.end {
                    return Some(format!("task {t} executed wrongly"));
                }
                if exec.insert(t, (u, a.start, a.end)).is_some() {
                    return Some(format!("task {t} executed twice"));
                }
            }
            at = a.to;
            clock = a.end;
        }
    }
    for t in inst.tasks() {
        let Some(&(_, s, _)) = exec.get(&t.id) else { return Some(format!("task {} missing", t.id)) };
        for p in &t.predecessors {
            if exec[p].2 > s {
                return Some(format!("task {} starts before {} ends", t.id, p));
            }
        }
    }
    let tasks: Vec<_> = inst.tasks().iter().collect();
    for (i, a) in tasks.iter().enumerate() {
        for b in &tasks[i + 1..] {
            let shared = [a.start, a.end].iter().any(|p| *p == b.start || *p == b.end);
            let (_, s1, e1) = exec[&a.id];
            let (_, s2, e2) = exec[&b.id];
            if shared && s1 < e2 && s2 < e1 {
                return Some(format!("tasks {} and {} share a position concurrently", a.id, b.id));
            }
        }
    }
    for st in inst.stations() {
        let mut events: Vec<(Seconds, i64)> = Vec::new();
        for lane in sched.lanes() {
            for a in lane.iter().filter(|a| a.kind == ActionKind::Recharge && a.from == st.pos) {
                events.push((a.start, 1));
                events.push((a.end, -1));
            }
        }
        events.sort();
        let mut load = 0;
        for (_, d) in events {
            load += d;
            if load > st.slots as i64 {
                return Some(format!("station {} over capacity", inst.map().id(st.pos)));
            }
        }
    }
    None
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let inst = sample::twelve_task_instance();
    let uav = |name: &str| inst.uavs().iter().position(|u| u.id == name).unwrap();
    let eat = build_prefix(&ids(&sample::TRACE_PREFIX), &inst).map_err(|e| e.to_string())?;
    let got: Vec<(u32, usize, Seconds)> = eat.assignments().iter().map(|a| (a.task.0, a.uav, a.start)).collect();
    let want = vec![
        (3, uav("UAV3"), 40),
        (2, uav("UAV1"), 60),
        (1, uav("UAV2"), 260),
        (4, uav("UAV1"), 533),
        (6, uav("UAV2"), 759),
        (5, uav("UAV3"), 890),
        (7, uav("UAV1"), 1083 + 60 + 2700 + 40),
    ];
    let sched = eat.into_schedule();
    let r1 = inst.map().index_of("R1").unwrap();
    let d = inst.map().index_of("d").unwrap();
    let hover = sched.lane(uav("UAV2")).iter().any(|a| a.kind == ActionKind::Hover && (a.start, a.end, a.from) == (625, 759, d));
    let recharge = sched
        .lane(uav("UAV1"))
        .iter()
        .any(|a| a.kind == ActionKind::Recharge && (a.start, a.end, a.from) == (1143, 3843, r1));
    let elapsed = started.elapsed();

    // Best-effort, not gated: the completed 12-task makespan.
    let prefix = ids(&sample::TRACE_PREFIX);
    let best_completion = feasible_orderings(&inst)
        .into_iter()
        .filter(|s| s[..7] == prefix[..])
        .map(|s| build_schedule(&s, &inst).unwrap().makespan())
        .min()
        .unwrap();
    let note = format!(
        "best-effort 4963 s full makespan: {} (best completion of the prefix = {best_completion} s)",
        if best_completion == 4963 { "reproduced" } else { "not reproduced" }
    );

    check(
        got == want && hover && recharge && elapsed < TRACE_RUNTIME_LIMIT,
        format!("7 steps exact, hover 625-759, R1 recharge 1143-3843, {elapsed:.2?}; {note}"),
        format!("assignments {got:?} (want {want:?}), hover {hover}, recharge {recharge}, {elapsed:.2?}; {note}"),
    )
}

fn criterion_2() -> Outcome {
    let particle = ids(&[1, 2, 4, 6, 5, 8, 7, 3, 10, 9, 12, 11]);
    let local = ids(&[1, 2, 4, 6, 5, 8, 3, 7, 10, 9, 11, 12]);
    let global = ids(&[2, 6, 1, 4, 3, 5, 7, 8, 10, 9, 11, 12]);
    let old: SwapPairList = [SwapPair(6, 7), SwapPair(10, 11)].into_iter().collect();
    let cog = sequence_difference(&local, &particle).map_err(|e| e.to_string())?;
    let soc = sequence_difference(&global, &particle).map_err(|e| e.to_string())?;
    // c1*U1 = 0.2 of 2 pairs rounds to none; c2*U2 = 0.8 of 6 pairs rounds to 5, the first five.
    let v = combine_velocity(&old, &cog, &[], &soc, &[0, 1, 2, 3, 4]);
    let moved = apply_swaps(&particle, &v).map_err(|e| e.to_string())?;
    let want = ids(&[2, 6, 1, 4, 7, 5, 3, 8, 10, 9, 11, 12]);
    check(
        moved == want && v.len() == 7,
        format!("7-pair velocity moves the particle to {:?}", want.iter().map(|t| t.0).collect::<Vec<_>>()),
        format!("got {:?} with {} pairs", moved.iter().map(|t| t.0).collect::<Vec<_>>(), v.len()),
    )
}

fn criterion_3() -> Outcome {
    let inst = sample::twelve_task_instance();
    let table: BTreeMap<&str, Vec<TaskId>> = [
        ("max-rpw", ids(&[1, 2, 4, 6, 5, 8, 3, 7, 10, 9, 11, 12])),
        ("min-ipw", ids(&[1, 2, 3, 4, 5, 6, 7, 12, 9, 8, 10, 11])),
        ("min-total-preds", ids(&[1, 2, 3, 4, 5, 6, 7, 9, 12, 8, 10, 11])),
        ("max-total-followers", ids(&[1, 2, 4, 5, 6, 8, 3, 7, 10, 9, 11, 12])),
        ("max-time", ids(&[3, 2, 1, 4, 7, 9, 6, 12, 5, 8, 10, 11])),
        ("min-time", ids(&[1, 2, 5, 6, 4, 8, 10, 11, 7, 9, 3, 12])),
        ("min-cum-preds", ids(&[1, 2, 3, 4, 5, 6, 7, 9, 8, 10, 11, 12])),
        ("max-cum-followers", ids(&[2, 6, 1, 4, 3, 5, 7, 8, 10, 9, 11, 12])),
    ]
    .into_iter()
    .collect();
    let rules = priority_orderings(&inst).map_err(|e| e.to_string())?;
    let all_feasible = rules.len() == 8 && rules.iter().all(|(_, s)| precedence_ok(&inst, s));
    let gated = [PriorityRule::MaxTaskTime, PriorityRule::MinTaskTime]
        .iter()
        .all(|r| rules.iter().any(|(rr, s)| rr == r && *s == table[r.slug()]));
    let matched: Vec<&str> = rules.iter().filter(|(r, s)| *s == table[r.slug()]).map(|(r, _)| r.slug()).collect();
    let unmatched: Vec<&str> = rules.iter().filter(|(r, s)| *s != table[r.slug()]).map(|(r, _)| r.slug()).collect();
    check(
        gated && all_feasible,
        format!(
            "max/min execution time rows exact, all 8 feasible; best-effort rows matched {}/8 (unmatched: {})",
            matched.len(),
            unmatched.join(", ")
        ),
        format!("gated rows exact: {gated}, all feasible: {all_feasible}"),
    )
}

fn two_uav_instance(n: usize, seed: u64) -> ProblemInstance {
    let map = sample::lab_map();
    let stations = sample::default_stations(&map);
    let uavs = vec![Uav::new("UAV1", stations[0].pos), Uav::new("UAV2", stations[1].pos)];
    generate_instance(&GenSpec { n_tasks: n, seed, ..GenSpec::default() }, map, uavs, stations).unwrap()
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let mut exact = 0;
    let mut worst_gap: f64 = 0.0;
    for k in 0..ORACLE_INSTANCES {
        let n = ORACLE_MAX_TASKS - (k % 3);
        let inst = two_uav_instance(n, 4000 + k as u64);
        assert!(inst.uavs().len() == 2 && inst.stations().len() == 2 && inst.tasks().len() <= ORACLE_MAX_TASKS);
        let opt = brute_force_optimum(&inst);
        let cfg = PsoConfig { swarm_size: 40, max_iterations: 40, seed: k as u64, ..PsoConfig::default() };
        let found = run_pso(&inst, &cfg).map_err(|e| e.to_string())?.best_makespan;
        if found == opt {
            exact += 1;
        }
        worst_gap = worst_gap.max((found as f64 - opt as f64) / opt.max(1) as f64);
    }
    let elapsed = started.elapsed();
    let share = exact as f64 / ORACLE_INSTANCES as f64;
    let msg = format!("{exact}/{ORACLE_INSTANCES} optimal, worst gap {:.2}%, {elapsed:.2?}", worst_gap * 100.0);
    check(
        share >= ORACLE_MATCH_SHARE && worst_gap <= ORACLE_MAX_GAP && elapsed < ORACLE_RUNTIME_LIMIT,
        msg.clone(),
        msg,
    )
}

/// Random symmetric map with `w` work positions and `r` stations.
#[allow(clippy::needless_range_loop)]
fn random_map<R: Rng>(rng: &mut R, w: usize, r: usize) -> TrajectoryMap {
    let n = w + r;
    let mut m = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = rng.gen_range(20..=200);
            m[i][j] = t;
            m[j][i] = t;
        }
    }
    let positions = (0..w)
        .map(|i| Position::work(format!("w{i}")))
        .chain((0..r).map(|i| Position::recharge(format!("R{i}"))))
        .collect();
    TrajectoryMap::new(positions, m).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut recharges = 0;
    for draw in 0..INVARIANT_DRAWS {
        let w = rng.gen_range(2..=6);
        let r = rng.gen_range(1..=3);
        let map = random_map(&mut rng, w, r);
        let stations: Vec<RechargeStation> =
            (0..r).map(|i| RechargeStation { pos: PosIdx(w + i), slots: rng.gen_range(1..=2) }).collect();
        let uavs: Vec<Uav> = (0..rng.gen_range(1..=4))
            .map(|i| Uav::new(format!("U{i}"), stations[rng.gen_range(0..r)].pos))
            .collect();
        let spec = GenSpec {
            n_tasks: rng.gen_range(0..=14),
            max_predecessors: rng.gen_range(0..=3),
            seed: draw as u64,
            ..GenSpec::default()
        };
        let inst = match generate_instance(&spec, map, uavs, stations) {
            Ok(i) => i,
            Err(e) => {
                failures.push(format!("draw {draw}: generation failed: {e}"));
                continue;
            }
        };
        let seq = random_feasible_sequence(&inst, &mut rng);
        let sched = match build_schedule(&seq, &inst) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("draw {draw}: {e}"));
                continue;
            }
        };
        recharges += sched.lanes().iter().flatten().filter(|a| a.kind == ActionKind::Recharge).count();
        let violations = validate_schedule(&sched, &inst);
        if let Some(v) = violations.first() {
            failures.push(format!("draw {draw}: {v}"));
        }
        if let Some(p) = independent_check(&inst, &sched) {
            failures.push(format!("draw {draw}: {p}"));
        }
    }
    check(
        failures.is_empty(),
        format!("{INVARIANT_DRAWS} draws, 0 violations ({recharges} recharges exercised)"),
        format!("{} failing draws, first: {}", failures.len(), failures.first().cloned().unwrap_or_default()),
    )
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [10, 50, 100] {
        let inst = generate_lab_instance(&GenSpec { n_tasks: n, seed: 600 + n as u64, ..GenSpec::default() }).unwrap();
        let mut converged = 0;
        let mut monotone = 0;
        for s in 0..CONVERGENCE_RUNS {
            let r = run_pso(&inst, &PsoConfig { seed: s as u64, ..PsoConfig::default() }).map_err(|e| e.to_string())?;
            if r.converged && r.iterations <= CONVERGENCE_BY_ITERATION {
                converged += 1;
            }
            if r.history.windows(2).all(|w| w[1].best <= w[0].best) {
                monotone += 1;
            }
        }
        ok &= converged as f64 / CONVERGENCE_RUNS as f64 >= CONVERGENCE_SHARE && monotone == CONVERGENCE_RUNS;
        lines.push(format!("n={n}: {converged}/{CONVERGENCE_RUNS} converged, {monotone}/{CONVERGENCE_RUNS} monotone"));
    }
    check(ok, lines.join("; "), lines.join("; "))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, limit) in [(10, RUNTIME_LIMIT_10), (100, RUNTIME_LIMIT_100)] {
        let inst = generate_lab_instance(&GenSpec { n_tasks: n, seed: 700 + n as u64, ..GenSpec::default() }).unwrap();
        let started = Instant::now();
        let r = run_pso(&inst, &PsoConfig { seed: 1, ..PsoConfig::default() }).map_err(|e| e.to_string())?;
        let elapsed = started.elapsed();
        ok &= elapsed < limit;
        let reference = reference_for(n).unwrap();
        parts.push(format!(
            "n={n}: {elapsed:.2?} (limit {limit:?}), makespan {} [published: ~{} ms, min makespan {}]",
            r.best_makespan, reference.mean_ms, reference.min
        ));
    }
    check(ok, parts.join("; "), parts.join("; "))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_uavsched"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
    }
    out
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    run_cli(&["generate", "--n-tasks", "20", "--seed", "8"], &root.join("gen"))?;
    let inst_path = root.join("gen/instance-n20-s8.json");
    let inst = inst_path.to_str().unwrap();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("generate", vec!["generate", "--n-tasks", "20", "--seed", "8"]),
        ("schedule", vec!["schedule", "--instance", inst, "--rule", "min-time"]),
        ("search", vec!["search", "--instance", inst, "--seed", "42"]),
        ("search-jobs", vec!["search", "--instance", inst, "--seed", "42", "--jobs", "1"]),
        (
            "experiment",
            vec!["experiment", "--sizes", "10,20", "--seed", "3", "--reps", "2", "--particles", "8", "--c1", "1", "--c2", "2"],
        ),
    ];
    let mut compared = 0;
    let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
    for (name, args) in &commands {
        run_cli(args, &root.join(format!("{name}-a")))?;
        run_cli(args, &root.join(format!("{name}-b")))?;
        let a = dir_contents(&root.join(format!("{name}-a")));
        let b = dir_contents(&root.join(format!("{name}-b")));
        if a.is_empty() || a != b {
            return Err(format!("`{name}` outputs differ between identical runs"));
        }
        compared += a.len();
        // A single worker thread must not change the search result either.
        if *name == "search" {
            reference = Some(a);
        } else if *name == "search-jobs" && reference.as_ref() != Some(&a) {
            return Err("search output depends on --jobs".into());
        }
    }
    Ok(format!("{} commands x 2 runs, {compared} files byte-identical (also across --jobs 1)", commands.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden trace prefix", criterion_1),
        ("worked velocity update", criterion_2),
        ("priority-rule sequences", criterion_3),
        ("oracle optimality", criterion_4),
        ("schedule invariants", criterion_5),
        ("convergence behavior", criterion_6),
        ("scale and runtime", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("acceptance {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
