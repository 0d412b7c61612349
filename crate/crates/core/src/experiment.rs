//! Parameter sweeps: every (instance, c1, c2, swarm size) cell is run a fixed
//! number of times with seeds `base_seed + run_index`, then summarized per
//! cell as min/max/average/median makespan.

use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ProblemInstance, Seconds};
use crate::pso::{run_pso, PsoConfig};

#[derive(Error, Debug)]
pub enum ExperimentError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("malformed raw-run CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub particles: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub max_iterations: usize,
    pub convergence_window: usize,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            c1: vec![1.0, 2.0],
            c2: vec![1.0, 2.0],
            particles: vec![8, 20, 40],
            repetitions: 20,
            base_seed: 0,
            max_iterations: 40,
            convergence_window: 10,
        }
    }
}

impl ExperimentGrid {
    pub fn cells_per_instance(&self) -> usize {
        self.c1.len() * self.c2.len() * self.particles.len()
    }

    pub fn total_runs(&self, instances: usize) -> usize {
        self.cells_per_instance() * instances * self.repetitions
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.c1.is_empty() || self.c2.is_empty() || self.particles.is_empty() || self.repetitions == 0 {
            return Err(ExperimentError::Grid("every axis needs at least one value".into()));
        }
        let base = PsoConfig::default();
        for &c1 in &self.c1 {
            for &c2 in &self.c2 {
                for &swarm_size in &self.particles {
                    let cfg = PsoConfig { c1, c2, swarm_size, convergence_window: self.convergence_window, ..base.clone() };
                    cfg.validate().map_err(|e| ExperimentError::Grid(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// Every run in execution order: instance, then c1, c2, swarm size, repetition.
    pub fn runs(&self, instances: &[(String, ProblemInstance)]) -> Vec<RunSpec> {
        let mut out = Vec::with_capacity(self.total_runs(instances.len()));
        for (inst, (name, _)) in instances.iter().enumerate() {
            for &c1 in &self.c1 {
                for &c2 in &self.c2 {
                    for &particles in &self.particles {
                        for rep in 0..self.repetitions {
                            let run = out.len();
                            out.push(RunSpec {
                                run,
                                instance_index: inst,
                                instance: name.clone(),
                                c1,
                                c2,
                                particles,
                                rep,
                                seed: self.base_seed + run as u64,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub run: usize,
    pub instance_index: usize,
    pub instance: String,
    pub c1: f64,
    pub c2: f64,
    pub particles: usize,
    pub rep: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub instance: String,
    pub n_tasks: usize,
    pub c1: f64,
    pub c2: f64,
    pub particles: usize,
    pub rep: usize,
    pub seed: u64,
    pub makespan: Option<Seconds>,
    pub convergence_iteration: Option<usize>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_clock_ms: f64,
}

/// Runs `f` on a dedicated pool of `jobs` threads (`None` = all cores), so
/// every parallel loop inside it is bounded too.
pub fn run_in_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    Ok(builder.build()?.install(f))
}

/// Runs the grid on at most `jobs` threads (`None` = all cores). Results come
/// back in run order regardless of scheduling.
pub fn run_experiment(
    grid: &ExperimentGrid,
    instances: &[(String, ProblemInstance)],
    jobs: Option<usize>,
) -> Result<Vec<RunRecord>, ExperimentError> {
    grid.validate()?;
    let specs = grid.runs(instances);
    run_in_pool(jobs, || {
        specs
            .par_iter()
            .map(|s| {
                let inst = &instances[s.instance_index].1;
                let cfg = PsoConfig {
                    c1: s.c1,
                    c2: s.c2,
                    swarm_size: s.particles,
                    max_iterations: grid.max_iterations,
                    convergence_window: grid.convergence_window,
                    initial_velocity_pairs: None,
                    seed: s.seed,
                };
                let mut rec = RunRecord {
                    run: s.run,
                    instance: s.instance.clone(),
                    n_tasks: inst.tasks().len(),
                    c1: s.c1,
                    c2: s.c2,
                    particles: s.particles,
                    rep: s.rep,
                    seed: s.seed,
                    makespan: None,
                    convergence_iteration: None,
                    converged: None,
                    iterations: None,
                    error: None,
                    wall_clock_ms: 0.0,
                };
                match run_pso(inst, &cfg) {
                    Ok(r) => {
                        rec.makespan = Some(r.best_makespan);
                        rec.convergence_iteration = Some(r.convergence_iteration);
                        rec.converged = Some(r.converged);
                        rec.iterations = Some(r.iterations);
                        rec.wall_clock_ms = r.wall_clock_ms;
                    }
                    Err(e) => rec.error = Some(e.to_string()),
                }
                rec
            })
            .collect()
    })
}

/// Raw per-run CSV. Wall-clock milliseconds are appended only with `timings`.
pub fn raw_runs_csv(records: &[RunRecord], timings: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "run", "instance", "n_tasks", "c1", "c2", "particles", "rep", "seed", "makespan",
        "convergence_iteration", "converged", "iterations", "error",
    ];
    if timings {
        header.push("wall_clock_ms");
    }
    w.write_record(&header).expect("in-memory write");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        let mut row = vec![
            r.run.to_string(),
            r.instance.clone(),
            r.n_tasks.to_string(),
            r.c1.to_string(),
            r.c2.to_string(),
            r.particles.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            opt(r.makespan.map(|v| v.to_string())),
            opt(r.convergence_iteration.map(|v| v.to_string())),
            opt(r.converged.map(|v| v.to_string())),
            opt(r.iterations.map(|v| v.to_string())),
            opt(r.error.clone()),
        ];
        if timings {
            row.push(format!("{:.3}", r.wall_clock_ms));
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Parses [`raw_runs_csv`] output (with or without the timing column).
pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>, ExperimentError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: RunRecord = row?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub instance: String,
    pub n_tasks: usize,
    pub c1: f64,
    pub c2: f64,
    pub particles: usize,
    pub runs: usize,
    pub failed: usize,
    pub min: Option<Seconds>,
    pub max: Option<Seconds>,
    pub average: Option<f64>,
    pub median: Option<f64>,
}

/// Median of an already sorted slice; the mean of the two middle values for
/// even lengths.
pub fn median(sorted: &[Seconds]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2] as f64),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    }
}

/// One summary per cell, in first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut order: Vec<(String, u64, u64, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, u64, u64, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.instance.clone(), r.c1.to_bits(), r.c2.to_bits(), r.particles);
        let entry = groups.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let mut ms: Vec<Seconds> = rs.iter().filter_map(|r| r.makespan).collect();
            ms.sort_unstable();
            CellSummary {
                instance: key.0.clone(),
                n_tasks: rs[0].n_tasks,
                c1: rs[0].c1,
                c2: rs[0].c2,
                particles: key.3,
                runs: rs.len(),
                failed: rs.len() - ms.len(),
                min: ms.first().copied(),
                max: ms.last().copied(),
                average: (!ms.is_empty()).then(|| ms.iter().sum::<Seconds>() as f64 / ms.len() as f64),
                median: median(&ms),
            }
        })
        .collect()
}

pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in summaries {
        w.serialize(s).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Published results for c1 = 1, c2 = 2, 40 particles on 10, 50 and
/// 100-task datasets: makespan min/max/average/median and mean wall-clock
/// milliseconds. The datasets are not public, so these only serve as an
/// order-of-magnitude comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceResult {
    pub n_tasks: usize,
    pub min: Seconds,
    pub max: Seconds,
    pub average: f64,
    pub median: f64,
    pub mean_ms: f64,
}

pub const REFERENCE_RESULTS: [ReferenceResult; 3] = [
    ReferenceResult { n_tasks: 10, min: 1818, max: 1937, average: 1835.85, median: 1818.0, mean_ms: 102.1 },
    ReferenceResult { n_tasks: 50, min: 17076, max: 18948, average: 18559.65, median: 18677.5, mean_ms: 639.25 },
    ReferenceResult { n_tasks: 100, min: 30009, max: 31876, average: 30865.65, median: 30865.0, mean_ms: 1158.25 },
];

pub fn reference_for(n_tasks: usize) -> Option<ReferenceResult> {
    REFERENCE_RESULTS.iter().copied().find(|r| r.n_tasks == n_tasks)
}

/// Trailing simple moving average; the first `window - 1` points average
/// what is available.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let slice = &values[lo..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];

/// Makespan against run number, one panel per instance: raw points plus a
/// moving average over `window` runs.
pub fn makespan_plot_svg(records: &[RunRecord], window: usize) -> String {
    let mut by_instance: Vec<(String, Vec<(usize, Seconds)>)> = Vec::new();
    for r in records {
        let Some(m) = r.makespan else { continue };
        match by_instance.iter_mut().find(|(n, _)| *n == r.instance) {
            Some((_, pts)) => pts.push((r.run, m)),
            None => by_instance.push((r.instance.clone(), vec![(r.run, m)])),
        }
    }
    let (pw, ph, margin) = (600.0, 220.0, 50.0);
    let height = by_instance.len().max(1) as f64 * (ph + margin) + margin;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        pw + 2.0 * margin
    );
    for (k, (name, pts)) in by_instance.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let top = margin + k as f64 * (ph + margin);
        let lo = pts.iter().map(|p| p.1).min().unwrap_or(0) as f64;
        let hi = pts.iter().map(|p| p.1).max().unwrap_or(0) as f64;
        let span = (hi - lo).max(1.0);
        let x = |i: usize| margin + if pts.len() > 1 { i as f64 * pw / (pts.len() - 1) as f64 } else { pw / 2.0 };
        let y = |v: f64| top + ph - (v - lo) / span * ph;
        let _ = writeln!(
            s,
            r##"<rect x="{margin}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#999"/><text x="{margin}" y="{:.1}">{name}: makespan per run (min {lo}, max {hi})</text>"##,
            top - 8.0
        );
        for (i, &(_, m)) in pts.iter().enumerate() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, x(i), y(m as f64));
        }
        let avg = moving_average(&pts.iter().map(|p| p.1 as f64).collect::<Vec<_>>(), window);
        let path: Vec<String> = avg.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, path.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_lab_instance, GenSpec};

    fn small() -> Vec<(String, ProblemInstance)> {
        (0..2)
            .map(|i| {
                let spec = GenSpec { n_tasks: 5, seed: i, ..GenSpec::default() };
                (format!("t5-{i}"), generate_lab_instance(&spec).unwrap())
            })
            .collect()
    }

    #[test]
    fn default_grid_has_720_runs() {
        let g = ExperimentGrid::default();
        assert_eq!(g.total_runs(3), 720);
        assert_eq!(g.cells_per_instance(), 12);
    }

    #[test]
    fn run_order_and_seeds() {
        let g = ExperimentGrid { repetitions: 2, base_seed: 100, ..ExperimentGrid::default() };
        let runs = g.runs(&small());
        assert_eq!(runs.len(), 48);
        assert!(runs.iter().enumerate().all(|(i, r)| r.run == i && r.seed == 100 + i as u64));
        assert_eq!((runs[0].c1, runs[0].c2, runs[0].particles, runs[0].rep), (1.0, 1.0, 8, 0));
        assert_eq!(runs[1].rep, 1);
        assert_eq!(runs[24].instance, "t5-1");
    }

    #[test]
    fn single_cell_single_rep() {
        let g = ExperimentGrid { c1: vec![1.0], c2: vec![2.0], particles: vec![8], repetitions: 1, ..Default::default() };
        let recs = run_experiment(&g, &small()[..1], Some(1)).unwrap();
        assert_eq!(recs.len(), 1);
        let s = summarize(&recs);
        assert_eq!(s.len(), 1);
        let m = s[0].min.unwrap();
        assert_eq!(s[0].max, Some(m));
        assert_eq!(s[0].average, Some(m as f64));
        assert_eq!(s[0].median, Some(m as f64));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let g = ExperimentGrid { c1: vec![1.0], c2: vec![1.0, 2.0], particles: vec![8], repetitions: 3, ..Default::default() };
        let a = run_experiment(&g, &small(), Some(1)).unwrap();
        let b = run_experiment(&g, &small(), Some(4)).unwrap();
        assert_eq!(raw_runs_csv(&a, false), raw_runs_csv(&b, false));
        assert_eq!(records_from_csv(&raw_runs_csv(&a, false)).unwrap(), a.iter().cloned().map(|mut r| {
            r.wall_clock_ms = 0.0;
            r
        }).collect::<Vec<_>>());
        assert!(raw_runs_csv(&a, true).lines().next().unwrap().ends_with(",wall_clock_ms"));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3]), Some(3.0));
        assert_eq!(median(&[1, 4]), Some(2.5));
        assert_eq!(median(&[1, 2, 9]), Some(2.0));
    }

    #[test]
    fn moving_average_window() {
        assert_eq!(moving_average(&[2.0, 4.0, 6.0, 8.0], 2), vec![2.0, 3.0, 5.0, 7.0]);
        assert_eq!(moving_average(&[], 3), Vec::<f64>::new());
    }

    #[test]
    fn failures_are_marked() {
        let mut rec = RunRecord {
            run: 0,
            instance: "x".into(),
            n_tasks: 1,
            c1: 1.0,
            c2: 1.0,
            particles: 8,
            rep: 0,
            seed: 0,
            makespan: None,
            convergence_iteration: None,
            converged: None,
            iterations: None,
            error: Some("boom".into()),
            wall_clock_ms: 0.0,
        };
        let ok = RunRecord { run: 1, rep: 1, makespan: Some(50), error: None, ..rec.clone() };
        let s = summarize(&[rec.clone(), ok]);
        assert_eq!((s[0].runs, s[0].failed, s[0].min), (2, 1, Some(50)));
        rec.run = 2;
        let s = summarize(&[rec]);
        assert_eq!((s[0].failed, s[0].average), (1, None));
    }

    #[test]
    fn plot_has_points_per_run() {
        let g = ExperimentGrid { c1: vec![1.0], c2: vec![2.0], particles: vec![8], repetitions: 4, ..Default::default() };
        let recs = run_experiment(&g, &small(), None).unwrap();
        let svg = makespan_plot_svg(&recs, 3);
        assert_eq!(svg.matches("<circle").count(), 8);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(g.validate().is_ok());
        assert!(ExperimentGrid { particles: vec![4], ..g }.validate().is_err());
    }
}
